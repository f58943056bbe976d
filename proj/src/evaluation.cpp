#include "focalflow/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "focalflow/flow.hpp"

namespace focalflow {

namespace {

// Shortest round-trip decimal form, so CSV output is bit-reproducible.
std::string fmt(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

double row_distance(const Mat& a, int ra, const Mat& b, int rb) {
  double s = 0.0;
  for (int j = 0; j < a.cols; ++j) {
    double d = a(ra, j) - b(rb, j);
    s += d * d;
  }
  return std::sqrt(s);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_and_se(std::span<const double> xs) {
  MeanSe out;
  size_t n = xs.size();
  if (n == 0) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(n);
  if (n < 2) return out;
  double ss = 0.0;
  for (double x : xs) {
    double d = x - out.mean;
    ss += d * d;
  }
  out.se = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  return out;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  return f;
}

Mat flatten_rows(std::span<const FlowSample> samples, const std::function<Mat(const FlowSample&)>& pick) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  Mat first = pick(samples[0]);
  int dim = first.rows * first.cols;
  Mat out(static_cast<int>(samples.size()), dim);
  for (size_t i = 0; i < samples.size(); ++i) {
    Mat m = pick(samples[i]);
    std::copy(m.v.begin(), m.v.end(), out.v.begin() + static_cast<long>(i) * dim);
  }
  return out;
}

Mat obs_matrix(std::span<const FlowSample> samples) {
  int dim = static_cast<int>(samples[0].obs.size());
  Mat out(static_cast<int>(samples.size()), dim);
  for (size_t i = 0; i < samples.size(); ++i)
    std::copy(samples[i].obs.begin(), samples[i].obs.end(), out.v.begin() + static_cast<long>(i) * dim);
  return out;
}

}  // namespace

double atv(const Mat& actions) {
  if (actions.rows < 2) throw std::out_of_range("atv needs at least 2 rows, got " + std::to_string(actions.rows));
  double s = 0.0;
  for (int t = 0; t + 1 < actions.rows; ++t)
    for (int j = 0; j < actions.cols; ++j) s += std::abs(actions(t + 1, j) - actions(t, j));
  return s / (static_cast<double>(actions.rows - 1) * actions.cols);
}

double ts_statistic(const Mat& actions) {
  if (actions.rows < 3) throw std::out_of_range("ts needs at least 3 rows, got " + std::to_string(actions.rows));
  double s = 0.0;
  for (int t = 0; t + 2 < actions.rows; ++t) {
    double sq = 0.0;
    for (int j = 0; j < actions.cols; ++j) {
      double d2 = actions(t + 2, j) - 2.0 * actions(t + 1, j) + actions(t, j);
      sq += d2 * d2;
    }
    s += std::sqrt(sq);
  }
  return s / static_cast<double>(actions.rows - 2);
}

double ts_score(const Mat& policy_actions, const Mat& expert_actions) {
  return std::abs(ts_statistic(expert_actions) - ts_statistic(policy_actions));
}

std::vector<double> compounding_error(const Mat& policy_actions, const Mat& expert_actions) {
  if (policy_actions.rows != expert_actions.rows || policy_actions.cols != expert_actions.cols)
    throw std::invalid_argument("compounding_error shape mismatch: " + std::to_string(policy_actions.rows) + "x" +
                                std::to_string(policy_actions.cols) + " vs " + std::to_string(expert_actions.rows) +
                                "x" + std::to_string(expert_actions.cols));
  std::vector<double> pp(policy_actions.cols, 0.0), pe(policy_actions.cols, 0.0);
  std::vector<double> curve(policy_actions.rows, 0.0);
  for (int t = 0; t < policy_actions.rows; ++t) {
    double sq = 0.0;
    for (int j = 0; j < policy_actions.cols; ++j) {
      pp[j] += policy_actions(t, j);
      pe[j] += expert_actions(t, j);
      double d = pp[j] - pe[j];
      sq += d * d;
    }
    curve[t] = std::sqrt(sq);
  }
  return curve;
}

bool task_success(TaskId task, const RolloutTrace& trace, std::span<const double> goal, double tolerance) {
  if (trace.length() == 0) return false;
  if (task == TaskId::kLissajous) {
    double total = 0.0;
    for (int t = 0; t < trace.positions.rows; ++t)
      total += row_distance(trace.positions, t, trace.expert_positions, t);
    return total / trace.positions.rows < tolerance;
  }
  if (static_cast<int>(goal.size()) != trace.positions.cols)
    throw std::invalid_argument("goal dimension " + std::to_string(goal.size()) + " does not match trace dimension " +
                                std::to_string(trace.positions.cols));
  double sq = 0.0;
  int last = trace.positions.rows - 1;
  for (int j = 0; j < trace.positions.cols; ++j) {
    double d = trace.positions(last, j) - goal[j];
    sq += d * d;
  }
  return std::sqrt(sq) < tolerance;
}

MetricReport evaluate_trace(TaskId task, const RolloutTrace& trace, std::span<const double> goal,
                            double tolerance) {
  MetricReport rep;
  if (trace.length() >= 2) {
    rep.atv = atv(trace.actions);
    rep.atv_expert = atv(trace.expert_actions);
  }
  if (trace.length() >= 3) rep.ts_score = ts_score(trace.actions, trace.expert_actions);
  rep.error_curve.resize(trace.length());
  for (int t = 0; t < trace.length(); ++t)
    rep.error_curve[t] = row_distance(trace.positions, t, trace.expert_positions, t);
  rep.endpoint_error = rep.error_curve.empty() ? 0.0 : rep.error_curve.back();
  rep.success = task_success(task, trace, goal, tolerance);
  rep.inference_calls = trace.inference_calls;
  rep.nfe_per_decision =
      trace.inference_calls > 0 ? static_cast<double>(trace.nfe) / trace.inference_calls : 0.0;
  return rep;
}

EvalAggregate aggregate_reports(const std::vector<MetricReport>& reports) {
  EvalAggregate agg;
  agg.episodes = static_cast<int>(reports.size());
  if (reports.empty()) return agg;
  for (const MetricReport& r : reports) {
    agg.success_rate += r.success ? 1.0 : 0.0;
    agg.endpoint_error_mean += r.endpoint_error;
    agg.atv_mean += r.atv;
    agg.atv_expert_mean += r.atv_expert;
    agg.ts_score_mean += r.ts_score;
    agg.nfe_per_decision += r.nfe_per_decision;
  }
  double n = static_cast<double>(reports.size());
  agg.success_rate /= n;
  agg.endpoint_error_mean /= n;
  agg.atv_mean /= n;
  agg.atv_expert_mean /= n;
  agg.ts_score_mean /= n;
  agg.nfe_per_decision /= n;
  agg.atv_gap = std::abs(agg.atv_mean - agg.atv_expert_mean);
  return agg;
}

void write_episode_csv(const std::filesystem::path& path, const std::vector<MetricReport>& reports) {
  std::ofstream f = open_csv(path);
  f << "episode,success,endpoint_error,atv,atv_expert,ts_score,inference_calls,nfe_per_decision\n";
  for (size_t i = 0; i < reports.size(); ++i) {
    const MetricReport& r = reports[i];
    f << i << ',' << (r.success ? 1 : 0) << ',' << fmt(r.endpoint_error) << ',' << fmt(r.atv) << ','
      << fmt(r.atv_expert) << ',' << fmt(r.ts_score) << ',' << r.inference_calls << ','
      << fmt(r.nfe_per_decision) << '\n';
  }
}

void write_summary_csv(const std::filesystem::path& path, const EvalAggregate& agg) {
  std::ofstream f = open_csv(path);
  f << "episodes,success_rate,endpoint_error_mean,atv_mean,atv_expert_mean,atv_gap,ts_score_mean,"
       "nfe_per_decision\n";
  f << agg.episodes << ',' << fmt(agg.success_rate) << ',' << fmt(agg.endpoint_error_mean) << ','
    << fmt(agg.atv_mean) << ',' << fmt(agg.atv_expert_mean) << ',' << fmt(agg.atv_gap) << ','
    << fmt(agg.ts_score_mean) << ',' << fmt(agg.nfe_per_decision) << '\n';
}

void write_curves_csv(const std::filesystem::path& path, const std::vector<MetricReport>& reports) {
  std::ofstream f = open_csv(path);
  f << "episode,step,error\n";
  for (size_t i = 0; i < reports.size(); ++i)
    for (size_t t = 0; t < reports[i].error_curve.size(); ++t)
      f << i << ',' << t << ',' << fmt(reports[i].error_curve[t]) << '\n';
}

std::vector<FlowSample> draw_flow_samples(const Dataset& ds, int chunk_size, int num_chunks,
                                          int count, Rng& rng) {
  if (ds.demos.empty()) throw std::invalid_argument("dataset has no demonstrations");
  int macro_len = chunk_size * num_chunks;
  std::vector<FlowSample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    int demo = static_cast<int>(rng.below(ds.demos.size()));
    int windows = ds.num_windows(demo, macro_len);
    if (windows <= 0)
      throw std::out_of_range("demo " + std::to_string(demo) + " shorter than macro length " +
                              std::to_string(macro_len));
    int t = static_cast<int>(rng.below(static_cast<uint64_t>(windows)));
    auto [obs, macro] = extract_macro(ds.demos[demo], t, chunk_size, num_chunks, ds.n_obs);
    FlowSample s;
    s.m1 = ds.norm.normalize_actions(macro.actions);
    s.m0 = Mat(macro_len, s.m1.cols);
    for (double& x : s.m0.v) x = rng.normal();
    s.obs = ds.norm.normalize_obs(obs.values);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<CurvePoint> teacher_error_eval(const VelocityEval& teacher,
                                           std::span<const FlowSample> samples,
                                           std::span<const double> s_grid) {
  if (s_grid.empty()) throw std::invalid_argument("teacher_error: empty time grid");
  if (samples.empty()) throw std::invalid_argument("teacher_error: no samples");
  Mat obs = obs_matrix(samples);
  Mat drift = flatten_rows(samples, [](const FlowSample& s) { return s.m1 - s.m0; });
  std::vector<CurvePoint> out;
  out.reserve(s_grid.size());
  for (double s : s_grid) {
    Mat states = flatten_rows(samples, [s](const FlowSample& fs) { return ot_interpolate(fs.m0, fs.m1, s); });
    std::vector<double> times(samples.size(), s);
    Mat v = teacher(states, times, obs);
    std::vector<double> errs(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
      double sq = 0.0;
      for (int j = 0; j < drift.cols; ++j) {
        double d = v(static_cast<int>(i), j) - drift(static_cast<int>(i), j);
        sq += d * d;
      }
      errs[i] = sq;
    }
    MeanSe ms = mean_and_se(errs);
    out.push_back({s, ms.mean, ms.se});
  }
  return out;
}

std::vector<CurvePoint> teacher_error(const VelocityField& net, const MlpParams& teacher,
                                      const Dataset& ds, int chunk_size, int num_chunks,
                                      std::span<const double> s_grid, int samples, Rng& rng) {
  std::vector<FlowSample> xs = draw_flow_samples(ds, chunk_size, num_chunks, samples, rng);
  VelocityEval eval = [&](const Mat& states, const std::vector<double>& times, const Mat& obs) {
    return net.forward(teacher, states, times, obs);
  };
  return teacher_error_eval(eval, xs, s_grid);
}

PropagationPoint propagation_point_eval(const VelocityEval& student, const VelocityEval& teacher,
                                        double tau, std::span<const FlowSample> raw_samples,
                                        std::span<const double> raw_anchors,
                                        std::span<const FlowSample> simp_samples,
                                        std::span<const double> simp_anchors) {
  if (raw_samples.size() != raw_anchors.size() || simp_samples.size() != simp_anchors.size())
    throw std::invalid_argument("propagation: anchor count does not match sample count");
  PropagationPoint pt;
  pt.tau = tau;

  {
    Mat obs = obs_matrix(raw_samples);
    Mat student_states =
        flatten_rows(raw_samples, [tau](const FlowSample& fs) { return ot_interpolate(fs.m0, fs.m1, tau); });
    std::vector<double> student_times(raw_samples.size(), tau);
    Mat v_s = student(student_states, student_times, obs);

    Mat teacher_states(v_s.rows, v_s.cols);
    std::vector<double> teacher_times(raw_anchors.begin(), raw_anchors.end());
    for (size_t i = 0; i < raw_samples.size(); ++i) {
      Mat mr = ot_interpolate(raw_samples[i].m0, raw_samples[i].m1, raw_anchors[i]);
      std::copy(mr.v.begin(), mr.v.end(), teacher_states.v.begin() + static_cast<long>(i) * v_s.cols);
    }
    Mat v_t = teacher(teacher_states, teacher_times, obs);

    Mat drift = flatten_rows(raw_samples, [](const FlowSample& s) { return s.m1 - s.m0; });
    std::vector<double> gaps(raw_samples.size());
    for (size_t i = 0; i < raw_samples.size(); ++i) {
      double sq = 0.0;
      for (int j = 0; j < v_s.cols; ++j) {
        int r = static_cast<int>(i);
        double g_cons = 2.0 * (v_s(r, j) - v_t(r, j));
        double g_sup = 2.0 * (v_s(r, j) - drift(r, j));
        double d = g_cons - g_sup;
        sq += d * d;
      }
      gaps[i] = sq;
    }
    MeanSe ms = mean_and_se(gaps);
    pt.raw = -ms.mean;
    pt.raw_se = ms.se;
  }

  {
    Mat obs = obs_matrix(simp_samples);
    Mat states(static_cast<int>(simp_samples.size()), static_cast<int>(simp_samples[0].m0.v.size()));
    std::vector<double> times(simp_anchors.begin(), simp_anchors.end());
    for (size_t i = 0; i < simp_samples.size(); ++i) {
      Mat mr = ot_interpolate(simp_samples[i].m0, simp_samples[i].m1, simp_anchors[i]);
      std::copy(mr.v.begin(), mr.v.end(), states.v.begin() + static_cast<long>(i) * states.cols);
    }
    Mat v_t = teacher(states, times, obs);
    Mat drift = flatten_rows(simp_samples, [](const FlowSample& s) { return s.m1 - s.m0; });
    std::vector<double> gaps(simp_samples.size());
    for (size_t i = 0; i < simp_samples.size(); ++i) {
      double sq = 0.0;
      for (int j = 0; j < states.cols; ++j) {
        int r = static_cast<int>(i);
        double d = drift(r, j) - v_t(r, j);
        sq += d * d;
      }
      gaps[i] = 4.0 * sq;
    }
    MeanSe ms = mean_and_se(gaps);
    pt.simplified = -ms.mean;
    pt.simplified_se = ms.se;
  }
  return pt;
}

std::vector<PropagationPoint> propagation_efficiency(const VelocityField& net, const MlpParams& live,
                                                     const MlpParams& teacher, const Dataset& ds,
                                                     const AnchorConfig& anchor, int chunk_size,
                                                     int num_chunks, std::span<const double> tau_grid,
                                                     int samples, Rng& rng) {
  if (tau_grid.empty()) throw std::invalid_argument("propagation_efficiency: empty time grid");
  VelocityEval student_eval = [&](const Mat& states, const std::vector<double>& times, const Mat& obs) {
    return net.forward(live, states, times, obs);
  };
  VelocityEval teacher_eval = [&](const Mat& states, const std::vector<double>& times, const Mat& obs) {
    return net.forward(teacher, states, times, obs);
  };
  std::vector<PropagationPoint> out;
  out.reserve(tau_grid.size());
  for (double tau : tau_grid) {
    std::vector<FlowSample> raw = draw_flow_samples(ds, chunk_size, num_chunks, samples, rng);
    std::vector<double> raw_r(raw.size());
    for (double& r : raw_r) r = sample_anchor(anchor, rng);
    std::vector<FlowSample> simp = draw_flow_samples(ds, chunk_size, num_chunks, samples, rng);
    std::vector<double> simp_r(simp.size());
    for (double& r : simp_r) r = sample_anchor(anchor, rng);
    out.push_back(propagation_point_eval(student_eval, teacher_eval, tau, raw, raw_r, simp, simp_r));
  }
  return out;
}

void write_propagation_csv(const std::filesystem::path& path, const std::vector<PropagationPoint>& points) {
  std::ofstream f = open_csv(path);
  f << "tau,raw,raw_se,simplified,simplified_se\n";
  for (const PropagationPoint& p : points)
    f << fmt(p.tau) << ',' << fmt(p.raw) << ',' << fmt(p.raw_se) << ',' << fmt(p.simplified) << ','
      << fmt(p.simplified_se) << '\n';
}

void write_teacher_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& curve) {
  std::ofstream f = open_csv(path);
  f << "s,value,std_error\n";
  for (const CurvePoint& p : curve) f << fmt(p.s) << ',' << fmt(p.value) << ',' << fmt(p.std_error) << '\n';
}

}  // namespace focalflow
