#include "focalflow/trajectory.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace focalflow {

using nlohmann::json;

namespace {
constexpr const char* kDemosVersion = "focalflow-demos/1";
}

TaskId task_from_string(const std::string& name) {
  if (name == "lissajous") return TaskId::kLissajous;
  if (name == "reach") return TaskId::kReach;
  if (name == "pick-sketch") return TaskId::kPickSketch;
  throw std::invalid_argument("unknown task '" + name + "' (expected lissajous, reach, or pick-sketch)");
}

std::string task_to_string(TaskId task) {
  switch (task) {
    case TaskId::kLissajous: return "lissajous";
    case TaskId::kReach: return "reach";
    case TaskId::kPickSketch: return "pick-sketch";
  }
  throw std::logic_error("task_to_string: bad enum");
}

int task_action_dim(TaskId task) { return task == TaskId::kPickSketch ? 3 : 2; }

std::vector<double> Demonstration::goal() const {
  std::vector<double> g(states.cols);
  for (int j = 0; j < states.cols; ++j) g[j] = states(states.rows - 1, j);
  return g;
}

Mat Normalization::normalize_actions(const Mat& a) const {
  if (a.cols != static_cast<int>(action_shift.size())) {
    throw std::invalid_argument("normalize_actions: " + std::to_string(a.cols) + " dims, stats have " +
                                std::to_string(action_shift.size()));
  }
  Mat out = a;
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out(i, j) = (out(i, j) - action_shift[j]) / action_scale[j];
  return out;
}

Mat Normalization::denormalize_actions(const Mat& a) const {
  if (a.cols != static_cast<int>(action_shift.size())) {
    throw std::invalid_argument("denormalize_actions: " + std::to_string(a.cols) + " dims, stats have " +
                                std::to_string(action_shift.size()));
  }
  Mat out = a;
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out(i, j) = out(i, j) * action_scale[j] + action_shift[j];
  return out;
}

std::vector<double> Normalization::normalize_obs(const std::vector<double>& obs) const {
  const size_t d = pos_shift.size();
  if (d == 0 || obs.size() % d != 0) {
    throw std::invalid_argument("normalize_obs: length " + std::to_string(obs.size()) +
                                " is not a multiple of position dim " + std::to_string(d));
  }
  std::vector<double> out(obs.size());
  for (size_t i = 0; i < obs.size(); ++i) {
    const size_t j = i % d;
    out[i] = (obs[i] - pos_shift[j]) / pos_scale[j];
  }
  return out;
}

int Dataset::num_windows(int demo, int macro_len) const {
  const int t = demos.at(demo).steps();
  return std::max(0, t - macro_len + 1);
}

MacroTrajectory concat_chunks(const std::vector<ActionChunk>& chunks) {
  if (chunks.empty()) throw std::invalid_argument("concat_chunks: no chunks");
  const int h = chunks.front().actions.rows;
  const int d = chunks.front().actions.cols;
  const int base = chunks.front().start_step;
  for (size_t i = 0; i < chunks.size(); ++i) {
    const auto& c = chunks[i];
    if (c.actions.rows != h || c.actions.cols != d) {
      throw std::invalid_argument("concat_chunks: chunk " + std::to_string(i) + " is " +
                                  std::to_string(c.actions.rows) + "x" + std::to_string(c.actions.cols) +
                                  ", expected " + std::to_string(h) + "x" + std::to_string(d));
    }
    if (c.start_step != base + static_cast<int>(i) * h) {
      throw std::invalid_argument("concat_chunks: chunk " + std::to_string(i) + " starts at step " +
                                  std::to_string(c.start_step) + ", expected " +
                                  std::to_string(base + static_cast<int>(i) * h));
    }
  }
  MacroTrajectory macro;
  macro.chunk_size = h;
  macro.num_chunks = static_cast<int>(chunks.size());
  macro.actions = Mat(h * macro.num_chunks, d);
  for (size_t i = 0; i < chunks.size(); ++i)
    for (int r = 0; r < h; ++r)
      for (int j = 0; j < d; ++j) macro.actions(static_cast<int>(i) * h + r, j) = chunks[i].actions(r, j);
  return macro;
}

Observation make_observation(const Mat& states, int t, int n_obs) {
  if (t < 0 || t >= states.rows) {
    throw std::out_of_range("make_observation: step " + std::to_string(t) + " outside [0, " +
                            std::to_string(states.rows - 1) + "]");
  }
  if (n_obs < 1) throw std::invalid_argument("make_observation: n_obs must be >= 1");
  Observation obs;
  obs.values.reserve(static_cast<size_t>(n_obs) * states.cols);
  for (int k = 0; k < n_obs; ++k) {
    const int row = std::max(0, t - k);   // clamp before episode start
    for (int j = 0; j < states.cols; ++j) obs.values.push_back(states(row, j));
  }
  return obs;
}

std::pair<Observation, MacroTrajectory> extract_macro(const Demonstration& demo, int t,
                                                      int chunk_size, int num_chunks, int n_obs) {
  const int macro_len = chunk_size * num_chunks;
  if (chunk_size < 1 || num_chunks < 1) throw std::invalid_argument("extract_macro: chunk_size and num_chunks must be >= 1");
  if (t < 0 || t + macro_len > demo.steps()) {
    throw std::out_of_range("extract_macro: window [" + std::to_string(t) + ", " + std::to_string(t + macro_len) +
                            ") exceeds demo of " + std::to_string(demo.steps()) + " steps");
  }
  MacroTrajectory macro;
  macro.chunk_size = chunk_size;
  macro.num_chunks = num_chunks;
  macro.actions = Mat(macro_len, demo.dim());
  for (int r = 0; r < macro_len; ++r)
    for (int j = 0; j < demo.dim(); ++j) macro.actions(r, j) = demo.actions(t + r, j);
  return {make_observation(demo.states, t, n_obs), std::move(macro)};
}

namespace {

// Quintic minimum-jerk blend: 0 -> 1 with zero velocity/acceleration at both ends.
double min_jerk(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }

// Positions are produced analytically, then re-integrated from the rounded
// per-step actions so the incremental-state invariant is exact.
Demonstration integrate(TaskId task, uint64_t seed, int index, const Mat& analytic) {
  const int t_total = analytic.rows - 1;
  const int d = analytic.cols;
  Demonstration demo;
  demo.task = task;
  demo.seed = seed;
  demo.index = index;
  demo.actions = Mat(t_total, d);
  demo.states = Mat(t_total + 1, d);
  for (int j = 0; j < d; ++j) demo.states(0, j) = analytic(0, j);
  for (int k = 0; k < t_total; ++k)
    for (int j = 0; j < d; ++j) {
      demo.actions(k, j) = analytic(k + 1, j) - analytic(k, j);
      demo.states(k + 1, j) = demo.states(k, j) + demo.actions(k, j);
    }
  return demo;
}

Mat gen_lissajous(int t_total, Rng& rng) {
  const double ax = rng.uniform(0.4, 0.9);
  const double ay = rng.uniform(0.4, 0.9);
  const int fx = 1 + static_cast<int>(rng.next_u64() % 3);
  const int fy = 1 + static_cast<int>(rng.next_u64() % 3);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  Mat p(t_total + 1, 2);
  for (int k = 0; k <= t_total; ++k) {
    // Integer frequencies close the curve over exactly one period.
    const double th = 2.0 * std::numbers::pi * k / t_total;
    p(k, 0) = ax * std::sin(fx * th + phase);
    p(k, 1) = ay * std::sin(fy * th);
  }
  return p;
}

Mat gen_reach(int t_total, Rng& rng) {
  // Goal is the start reflected through the origin, so the first observation
  // determines the target.
  const double radius = rng.uniform(0.35, 0.75);
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double sx = radius * std::cos(angle);
  const double sy = radius * std::sin(angle);
  Mat p(t_total + 1, 2);
  for (int k = 0; k <= t_total; ++k) {
    const double blend = min_jerk(static_cast<double>(k) / t_total);
    p(k, 0) = sx * (1.0 - 2.0 * blend);
    p(k, 1) = sy * (1.0 - 2.0 * blend);
  }
  return p;
}

Mat gen_pick_sketch(int t_total, Rng& rng) {
  // Approach, hold (grasp pause), transport. Each moving segment is a
  // minimum-jerk spline between waypoints.
  double start[3], grasp[3], place[3];
  for (int j = 0; j < 3; ++j) {
    start[j] = rng.uniform(-0.7, 0.7);
    grasp[j] = rng.uniform(-0.7, 0.7);
    place[j] = rng.uniform(-0.7, 0.7);
  }
  const int t_grasp = (t_total * 7) / 20;   // 35%
  const int t_lift = t_total / 2;           // pause until 50%
  Mat p(t_total + 1, 3);
  for (int k = 0; k <= t_total; ++k) {
    double blend;
    const double* a;
    const double* b;
    if (k <= t_grasp) {
      blend = min_jerk(static_cast<double>(k) / t_grasp);
      a = start; b = grasp;
    } else if (k <= t_lift) {
      blend = 1.0;  // hold still at the grasp point
      a = start; b = grasp;
    } else {
      blend = min_jerk(static_cast<double>(k - t_lift) / (t_total - t_lift));
      a = grasp; b = place;
    }
    for (int j = 0; j < 3; ++j) p(k, j) = a[j] + (b[j] - a[j]) * blend;
  }
  return p;
}

}  // namespace

std::vector<Demonstration> generate_expert(TaskId task, uint64_t seed, int count, int length) {
  if (count < 0) throw std::invalid_argument("generate_expert: negative count");
  if (length < 8) throw std::invalid_argument("generate_expert: length must be >= 8, got " + std::to_string(length));
  Rng root(seed);
  std::vector<Demonstration> demos;
  demos.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng = root.derive("demo", static_cast<uint64_t>(i));
    Mat analytic;
    switch (task) {
      case TaskId::kLissajous: analytic = gen_lissajous(length, rng); break;
      case TaskId::kReach: analytic = gen_reach(length, rng); break;
      case TaskId::kPickSketch: analytic = gen_pick_sketch(length, rng); break;
    }
    demos.push_back(integrate(task, seed, i, analytic));
  }
  return demos;
}

Dataset build_dataset(std::vector<Demonstration> demos, int n_obs) {
  if (demos.empty()) throw std::invalid_argument("build_dataset: no demonstrations");
  if (n_obs < 1) throw std::invalid_argument("build_dataset: n_obs must be >= 1");
  const int d = demos.front().dim();
  for (const auto& demo : demos) {
    if (demo.dim() != d) throw std::invalid_argument("build_dataset: mixed action dimensions");
  }
  Dataset ds;
  ds.n_obs = n_obs;
  ds.norm.action_shift.assign(d, 0.0);
  ds.norm.action_scale.assign(d, 1.0);
  ds.norm.pos_shift.assign(d, 0.0);
  ds.norm.pos_scale.assign(d, 1.0);

  // Empirical per-dimension mean/std across every demo.
  auto fit = [d](auto&& rows, std::vector<double>& shift, std::vector<double>& scale) {
    std::vector<double> sum(d, 0.0), sumsq(d, 0.0);
    long n = 0;
    rows([&](const Mat& m) {
      for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < d; ++j) {
          sum[j] += m(i, j);
          sumsq[j] += m(i, j) * m(i, j);
        }
      n += m.rows;
    });
    for (int j = 0; j < d; ++j) {
      shift[j] = sum[j] / n;
      const double var = std::max(0.0, sumsq[j] / n - shift[j] * shift[j]);
      scale[j] = std::max(std::sqrt(var), 1e-8);
    }
  };
  fit([&](auto&& f) { for (const auto& demo : demos) f(demo.actions); }, ds.norm.action_shift, ds.norm.action_scale);
  fit([&](auto&& f) { for (const auto& demo : demos) f(demo.states); }, ds.norm.pos_shift, ds.norm.pos_scale);

  ds.demos = std::move(demos);
  return ds;
}

namespace {

json mat_to_json(const Mat& m) {
  json arr = json::array();
  for (double x : m.v) arr.push_back(x);
  return arr;
}

Mat mat_from_json(const json& arr, int rows, int cols, const char* what) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != rows * cols) {
    throw std::runtime_error(std::string("demos file: ") + what + " has wrong element count");
  }
  Mat m(rows, cols);
  for (size_t i = 0; i < m.v.size(); ++i) m.v[i] = arr[i].get<double>();
  return m;
}

}  // namespace

void save_demos(const std::filesystem::path& path, const std::vector<Demonstration>& demos) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_demos: cannot open " + path.string());
  json header = {{"version", kDemosVersion}, {"count", demos.size()}};
  out << header.dump() << "\n";
  for (const auto& demo : demos) {
    json rec = {
        {"task", task_to_string(demo.task)},
        {"seed", demo.seed},
        {"index", demo.index},
        {"dim", demo.dim()},
        {"steps", demo.steps()},
        {"states", mat_to_json(demo.states)},
        {"actions", mat_to_json(demo.actions)},
    };
    out << rec.dump() << "\n";
  }
  if (!out) throw std::runtime_error("save_demos: write failed for " + path.string());
}

std::vector<Demonstration> load_demos(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_demos: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_demos: " + path.string() + " is empty");
  json header = json::parse(line);
  const std::string version = header.value("version", "<missing>");
  if (version != kDemosVersion) {
    throw std::runtime_error("load_demos: unsupported version '" + version + "' (expected '" +
                             kDemosVersion + "')");
  }
  std::vector<Demonstration> demos;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    Demonstration demo;
    demo.task = task_from_string(rec.at("task").get<std::string>());
    demo.seed = rec.at("seed").get<uint64_t>();
    demo.index = rec.at("index").get<int>();
    const int d = rec.at("dim").get<int>();
    const int steps = rec.at("steps").get<int>();
    demo.states = mat_from_json(rec.at("states"), steps + 1, d, "states");
    demo.actions = mat_from_json(rec.at("actions"), steps, d, "actions");
    demos.push_back(std::move(demo));
  }
  if (header.at("count").get<size_t>() != demos.size()) {
    throw std::runtime_error("load_demos: header count " + std::to_string(header.at("count").get<size_t>()) +
                             " does not match " + std::to_string(demos.size()) + " records");
  }
  return demos;
}

}  // namespace focalflow
