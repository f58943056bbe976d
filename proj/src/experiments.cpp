#include "focalflow/experiments.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "focalflow/errors.hpp"
#include "focalflow/flow.hpp"
#include "focalflow/format.hpp"
#include "focalflow/verification.hpp"
#include "json.hpp"

namespace focalflow {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(trim(part));
  return out;
}

std::string path_safe(std::string s) {
  for (char& c : s)
    if (c == '/' || c == '\\' || c == ' ' || c == '=') c = '-';
  return s;
}

// Name parsers throw invalid_argument; everything reaching this layer is user
// input, so rethrow as the config-error type the CLI maps to exit code 2.
template <typename Fn>
auto user_input(const std::string& where, Fn&& parse) {
  try {
    return parse();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

std::filesystem::path output_root() {
  const char* env = std::getenv("FOCALFLOW_OUT");
  if (env != nullptr && *env != '\0') return std::filesystem::path(env);
  return std::filesystem::path("runs");
}

std::filesystem::path run_gen(const GenArgs& args) {
  TaskId task = user_input("gen", [&] { return task_from_string(args.task); });
  if (args.count < 0) throw ConfigError("gen: count must be >= 0");
  if (args.count > 0 && args.length < 8) throw ConfigError("gen: length must be >= 8");
  std::filesystem::path out =
      args.out.empty() ? output_root() / "demos.jsonl" : std::filesystem::path(args.out);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  std::vector<Demonstration> demos = generate_expert(task, args.seed, args.count, args.length);
  save_demos(out, demos);
  return out;
}

void apply_variant(KeyValues& kv, const std::string& variant) {
  ObjectiveVariant v = user_input("variant", [&] { return variant_from_string(variant); });
  kv["objective.variant"] = variant;
  switch (v) {
    case ObjectiveVariant::kWoLas:
      kv["anchor.kind"] = "uniform";
      break;
    case ObjectiveVariant::kFixedRLas:
      kv["anchor.kind"] = "fixed";
      break;
    case ObjectiveVariant::kWoFcoLas:
    case ObjectiveVariant::kFlowPolicyBaseline:
    case ObjectiveVariant::kFmBaseline:
      // Adjacent-time or plain regression arms; the anchor stream is unused.
      break;
    default:
      kv["anchor.kind"] = "logit_normal";
      break;
  }
}

TrainOutcome run_train(const TrainArgs& args) {
  if (args.config_path.empty()) throw ConfigError("train: --config is required");
  KeyValues kv = load_key_values(args.config_path);
  if (!args.variant.empty()) apply_variant(kv, args.variant);
  for (const std::string& s : args.sets) apply_assignment(kv, s);
  TrainConfig cfg = config_from_keys(kv);

  std::filesystem::path run_dir;
  if (!args.out_dir.empty()) {
    run_dir = args.out_dir;
  } else {
    std::string name = task_to_string(cfg.task) + "_" + variant_to_string(cfg.objective.variant) + "_seed" +
                       std::to_string(cfg.seed);
    run_dir = output_root() / name;
  }
  std::filesystem::create_directories(run_dir);

  {
    std::ofstream f(run_dir / "config.resolved", std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write resolved config: " + (run_dir / "config.resolved").string());
    f << serialize_key_values(keys_from_config(cfg));
  }

  Trainer trainer(cfg);
  if (args.resume) {
    std::filesystem::path ckpt = run_dir / "checkpoint.json";
    if (!std::filesystem::exists(ckpt))
      throw ConfigError("resume requested but no checkpoint at " + ckpt.string());
    trainer.restore(load_checkpoint(ckpt));
  }
  RunResult result = trainer.run(run_dir);
  return TrainOutcome{run_dir, result};
}

EvalAggregate run_eval(const EvalArgs& args) {
  if (args.ckpt.empty()) throw ConfigError("eval: --ckpt is required");
  if (args.demos.empty()) throw ConfigError("eval: --demos is required");
  if (args.episodes < 1) throw ConfigError("eval: episodes must be >= 1");
  if (args.euler_steps < 0) throw ConfigError("eval: euler steps must be >= 0");
  RolloutMode mode = user_input("eval", [&] { return rollout_mode_from_string(args.mode); });

  Checkpoint ck = load_checkpoint(args.ckpt);
  TaskId task = user_input("eval", [&] { return task_from_string(ck.task); });
  std::vector<Demonstration> demos = load_demos(args.demos);
  if (demos.empty()) throw ConfigError("eval: demo file is empty: " + args.demos);
  for (const Demonstration& d : demos) {
    if (d.task != task)
      throw ConfigError("eval: demo task '" + task_to_string(d.task) + "' does not match checkpoint task '" +
                        ck.task + "'");
    if (d.dim() != ck.action_dim)
      throw ConfigError("eval: demo action dimension " + std::to_string(d.dim()) +
                        " does not match checkpoint (" + std::to_string(ck.action_dim) + ")");
  }

  VelocityField net(ck.mlp_config());
  net.params().unflatten(ck.live);

  std::filesystem::path out_dir =
      args.out_dir.empty() ? output_root() / "eval" : std::filesystem::path(args.out_dir);
  std::filesystem::create_directories(out_dir);

  std::vector<MetricReport> reports;
  reports.reserve(args.episodes);
  Rng root(args.seed);
  for (int e = 0; e < args.episodes; ++e) {
    const Demonstration& demo = demos[static_cast<size_t>(e) % demos.size()];
    Rng noise = root.derive("episode", static_cast<uint64_t>(e));
    RolloutTrace trace;
    if (ck.oracle) {
      OraclePolicy policy(demo, ck.norm, ck.chunk_size, ck.num_chunks);
      trace = rollout(policy, demo, mode, ck.chunk_size, demo.steps(), noise);
    } else if (args.euler_steps > 0) {
      EulerPolicy policy(net, net.params(), ck.norm, ck.chunk_size, ck.num_chunks, args.euler_steps, ck.n_obs);
      trace = rollout(policy, demo, mode, ck.chunk_size, demo.steps(), noise);
    } else {
      OneStepPolicy policy(net, net.params(), ck.norm, ck.chunk_size, ck.num_chunks, ck.n_obs);
      trace = rollout(policy, demo, mode, ck.chunk_size, demo.steps(), noise);
    }
    reports.push_back(evaluate_trace(task, trace, demo.goal()));
  }

  EvalAggregate agg = aggregate_reports(reports);
  write_episode_csv(out_dir / "episodes.csv", reports);
  write_summary_csv(out_dir / "summary.csv", agg);
  write_curves_csv(out_dir / "curves.csv", reports);
  return agg;
}

bool run_verify(const VerifyArgs& args) {
  std::vector<CheckResult> results = run_all_checks(args.seed, args.only);
  bool all = true;
  for (const CheckResult& r : results) {
    all = all && r.pass;
    if (!args.quiet)
      std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
  }
  std::filesystem::path report =
      args.report_path.empty() ? output_root() / "verify_report.json" : std::filesystem::path(args.report_path);
  if (report.has_parent_path()) std::filesystem::create_directories(report.parent_path());
  write_check_report(report, results);
  if (!all && !args.quiet)
    std::cout << "verification failed; reproduce with --seed " << args.seed << "\n";
  return all;
}

namespace {

struct SweepSpec {
  std::string base_config;
  std::vector<std::string> sets;
  std::vector<std::vector<std::string>> axis_keys;                 // keys per sweep line
  std::vector<std::vector<std::vector<std::string>>> axis_values;  // [line][point][key]
};

// Grid file lines:
//   base = path/to/config
//   set key = value
//   sweep key = v1, v2, v3
//   sweep key1|key2 = a1|b1, a2|b2     (zipped assignment per point)
SweepSpec parse_grid(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open grid: " + path.string());
  SweepSpec spec;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw ConfigError("grid line " + std::to_string(lineno) + ": " + why);
    };
    if (line.rfind("base", 0) == 0) {
      size_t eq = line.find('=');
      if (eq == std::string::npos) fail("expected base = <path>");
      spec.base_config = trim(line.substr(eq + 1));
    } else if (line.rfind("set ", 0) == 0) {
      std::string rest = trim(line.substr(4));
      size_t eq = rest.find('=');
      if (eq == std::string::npos) fail("expected set <key> = <value>");
      spec.sets.push_back(trim(rest.substr(0, eq)) + "=" + trim(rest.substr(eq + 1)));
    } else if (line.rfind("sweep ", 0) == 0) {
      std::string rest = trim(line.substr(6));
      size_t eq = rest.find('=');
      if (eq == std::string::npos) fail("expected sweep <keys> = <values>");
      std::vector<std::string> keys = split(rest.substr(0, eq), '|');
      std::vector<std::string> points = split(rest.substr(eq + 1), ',');
      if (keys.empty() || points.empty()) fail("empty sweep axis");
      std::vector<std::vector<std::string>> values;
      for (const std::string& p : points) {
        std::vector<std::string> vs = split(p, '|');
        if (vs.size() != keys.size())
          fail("point '" + p + "' has " + std::to_string(vs.size()) + " values for " +
               std::to_string(keys.size()) + " keys");
        values.push_back(vs);
      }
      spec.axis_keys.push_back(keys);
      spec.axis_values.push_back(values);
    } else {
      fail("unrecognized directive: " + line);
    }
  }
  if (spec.base_config.empty())
    throw ConfigError("grid " + path.string() + " never sets base = <config path>");
  return spec;
}

}  // namespace

std::filesystem::path run_sweep(const SweepArgs& args) {
  if (args.grid_path.empty()) throw ConfigError("sweep: --grid is required");
  SweepSpec spec = parse_grid(args.grid_path);
  std::filesystem::path out =
      args.out_dir.empty() ? output_root() / "sweep" : std::filesystem::path(args.out_dir);
  std::filesystem::create_directories(out);

  // Cross product in file order, last axis fastest.
  std::vector<std::vector<int>> points{{}};
  for (const auto& axis : spec.axis_values) {
    std::vector<std::vector<int>> next;
    for (const std::vector<int>& p : points)
      for (size_t i = 0; i < axis.size(); ++i) {
        std::vector<int> q = p;
        q.push_back(static_cast<int>(i));
        next.push_back(q);
      }
    points = next;
  }

  std::vector<std::string> swept_columns;
  for (const auto& keys : spec.axis_keys)
    for (const std::string& k : keys) swept_columns.push_back(k);

  std::ofstream summary(out / "summary.csv", std::ios::trunc);
  if (!summary) throw std::runtime_error("cannot write sweep summary: " + (out / "summary.csv").string());
  summary << "point";
  for (const std::string& k : swept_columns) summary << ',' << k;
  summary << ",steps,top5_success,closed_success,closed_endpoint,closed_atv_gap,open_endpoint,open_atv_gap,"
             "skipped\n";

  for (const std::vector<int>& choice : points) {
    std::vector<std::string> assigns;
    std::string name;
    std::vector<std::string> row_values;
    for (size_t axis = 0; axis < choice.size(); ++axis) {
      const auto& keys = spec.axis_keys[axis];
      const auto& vals = spec.axis_values[axis][choice[axis]];
      for (size_t k = 0; k < keys.size(); ++k) {
        assigns.push_back(keys[k] + "=" + vals[k]);
        row_values.push_back(vals[k]);
        if (!name.empty()) name += "_";
        name += path_safe(keys[k]) + "-" + path_safe(vals[k]);
      }
    }
    if (name.empty()) name = "point";
    std::filesystem::path run_dir = out / name;

    bool skipped = std::filesystem::exists(run_dir / "final.json");
    if (!skipped) {
      TrainArgs ta;
      ta.config_path = spec.base_config;
      ta.sets = spec.sets;
      ta.sets.insert(ta.sets.end(), assigns.begin(), assigns.end());
      ta.out_dir = run_dir.string();
      run_train(ta);
    }

    std::ifstream fj(run_dir / "final.json");
    if (!fj) throw std::runtime_error("sweep point missing summary: " + (run_dir / "final.json").string());
    json fin;
    fj >> fin;
    summary << name;
    for (const std::string& v : row_values) summary << ',' << v;
    summary << ',' << fin.value("steps", int64_t{0}) << ',' << format_double(fin.value("top5_success", 0.0))
            << ',' << format_double(fin.at("closed").value("success_rate", 0.0)) << ','
            << format_double(fin.at("closed").value("endpoint_error", 0.0)) << ','
            << format_double(fin.at("closed").value("atv_gap", 0.0)) << ','
            << format_double(fin.at("open").value("endpoint_error", 0.0)) << ','
            << format_double(fin.at("open").value("atv_gap", 0.0)) << ',' << (skipped ? 1 : 0) << '\n';
    summary.flush();
  }
  return out;
}

}  // namespace focalflow
