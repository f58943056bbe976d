#include "focalflow/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "focalflow/errors.hpp"
#include "json.hpp"

namespace focalflow {

namespace {

using nlohmann::json;

MlpConfig mlp_config_for(const TrainConfig& cfg) {
  MlpConfig mc;
  int d = task_action_dim(cfg.task);
  mc.state_dim = cfg.macro_len() * d;
  mc.obs_dim = cfg.n_obs * d;
  mc.hidden = cfg.hidden;
  mc.time_embed_dim = cfg.time_embed_dim;
  return mc;
}

std::vector<Demonstration> demos_for(const TrainConfig& cfg) {
  if (!cfg.demos_path.empty()) {
    std::vector<Demonstration> demos = load_demos(cfg.demos_path);
    for (const Demonstration& d : demos)
      if (d.task != cfg.task)
        throw ConfigError("demo file task '" + task_to_string(d.task) + "' does not match configured task '" +
                          task_to_string(cfg.task) + "'");
    return demos;
  }
  uint64_t data_seed = Rng(cfg.seed).derive("data").state();
  return generate_expert(cfg.task, data_seed, cfg.demo_count, cfg.demo_length);
}

json norm_to_json(const Normalization& n) {
  return json{{"action_shift", n.action_shift},
              {"action_scale", n.action_scale},
              {"pos_shift", n.pos_shift},
              {"pos_scale", n.pos_scale}};
}

Normalization norm_from_json(const json& j) {
  Normalization n;
  n.action_shift = j.at("action_shift").get<std::vector<double>>();
  n.action_scale = j.at("action_scale").get<std::vector<double>>();
  n.pos_shift = j.at("pos_shift").get<std::vector<double>>();
  n.pos_scale = j.at("pos_scale").get<std::vector<double>>();
  return n;
}

}  // namespace

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid training config: " + what);
  };
  require(demo_count >= 1, "demo_count must be >= 1");
  require(demo_length >= macro_len(), "demo_length must cover one macro-trajectory");
  require(n_obs >= 1, "n_obs must be >= 1");
  require(chunk_size >= 1 && num_chunks >= 1, "chunk_size and num_chunks must be >= 1");
  require(epochs >= 1, "epochs must be >= 1");
  require(steps_per_epoch >= 0, "steps_per_epoch must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0, "beta1 must lie in [0, 1)");
  require(beta2 >= 0.0 && beta2 < 1.0, "beta2 must lie in [0, 1)");
  require(weight_decay >= 0.0, "weight_decay must be >= 0");
  require(adam_eps > 0.0, "adam_eps must be positive");
  require(warmup_steps >= 0, "warmup_steps must be >= 0");
  require(ema_max_decay >= 0.0 && ema_max_decay < 1.0, "ema_max_decay must lie in [0, 1)");
  require(eval_episodes >= 1, "eval_episodes must be >= 1");
  require(eval_every >= 0, "eval_every must be >= 0");
  require(probe_every >= 0, "probe_every must be >= 0");
  try {
    mlp_config_for(*this).validate();
    objective.validate(macro_len(), chunk_size);
    anchor.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid training config: ") + e.what());
  }
}

double lr_schedule(int64_t step, int64_t total_steps, int warmup_steps, double lr) {
  if (step < 0) throw std::out_of_range("lr_schedule: negative step");
  if (warmup_steps > 0 && step < warmup_steps) return lr * static_cast<double>(step) / warmup_steps;
  if (step >= total_steps - 1) return 0.0;
  int64_t span = total_steps - 1 - warmup_steps;
  if (span <= 0) return lr;
  double progress = static_cast<double>(step - warmup_steps) / static_cast<double>(span);
  return lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void AdamW::init(size_t n) {
  m.assign(n, 0.0);
  v.assign(n, 0.0);
  t = 0;
}

void AdamW::step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
  if (params.size() != m.size() || grad.size() != m.size())
    throw std::invalid_argument("optimizer state size mismatch: " + std::to_string(m.size()) + " vs params " +
                                std::to_string(params.size()) + ", grad " + std::to_string(grad.size()));
  ++t;
  double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    double mhat = m[i] / c1;
    double vhat = v[i] / c2;
    params[i] -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * params[i]);
  }
}

MlpConfig Checkpoint::mlp_config() const {
  MlpConfig mc;
  mc.state_dim = chunk_size * num_chunks * action_dim;
  mc.obs_dim = n_obs * action_dim;
  mc.hidden = hidden;
  mc.time_embed_dim = time_embed_dim;
  return mc;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  json j;
  j["version"] = "focalflow-ckpt/1";
  j["task"] = ck.task;
  j["chunk_size"] = ck.chunk_size;
  j["num_chunks"] = ck.num_chunks;
  j["n_obs"] = ck.n_obs;
  j["time_embed_dim"] = ck.time_embed_dim;
  j["hidden"] = ck.hidden;
  j["action_dim"] = ck.action_dim;
  j["step"] = ck.step;
  j["live"] = ck.live;
  j["shadow"] = ck.shadow;
  j["adam_m"] = ck.adam_m;
  j["adam_v"] = ck.adam_v;
  j["adam_t"] = ck.adam_t;
  j["norm"] = norm_to_json(ck.norm);
  j["rng"] = json{{"batch", ck.batch_state}, {"noise", ck.noise_state}, {"tau", ck.tau_state},
                  {"anchor", ck.anchor_state}};
  j["oracle"] = ck.oracle;
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write checkpoint: " + path.string());
  f << j.dump(1) << '\n';
  if (!f.good()) throw std::runtime_error("short write on checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open checkpoint: " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed checkpoint " + path.string() + ": " + e.what());
  }
  try {
    std::string version = j.at("version").get<std::string>();
    if (version != "focalflow-ckpt/1")
      throw ConfigError("unsupported checkpoint version '" + version + "' in " + path.string());
    Checkpoint ck;
    ck.task = j.at("task").get<std::string>();
    task_from_string(ck.task);  // validates the name
    ck.chunk_size = j.at("chunk_size").get<int>();
    ck.num_chunks = j.at("num_chunks").get<int>();
    ck.n_obs = j.at("n_obs").get<int>();
    ck.time_embed_dim = j.at("time_embed_dim").get<int>();
    ck.hidden = j.at("hidden").get<std::vector<int>>();
    ck.action_dim = j.at("action_dim").get<int>();
    ck.step = j.at("step").get<int64_t>();
    ck.live = j.at("live").get<std::vector<double>>();
    ck.shadow = j.at("shadow").get<std::vector<double>>();
    ck.adam_m = j.at("adam_m").get<std::vector<double>>();
    ck.adam_v = j.at("adam_v").get<std::vector<double>>();
    ck.adam_t = j.at("adam_t").get<int64_t>();
    ck.norm = norm_from_json(j.at("norm"));
    ck.batch_state = j.at("rng").at("batch").get<uint64_t>();
    ck.noise_state = j.at("rng").at("noise").get<uint64_t>();
    ck.tau_state = j.at("rng").at("tau").get<uint64_t>();
    ck.anchor_state = j.at("rng").at("anchor").get<uint64_t>();
    ck.oracle = j.value("oracle", false);
    MlpConfig mc = ck.mlp_config();
    mc.validate();
    size_t n = 0;
    for (auto [fan_in, fan_out] : mc.layer_shapes()) n += static_cast<size_t>(fan_in + 1) * fan_out;
    if (ck.live.size() != n || ck.shadow.size() != n)
      throw ConfigError("checkpoint parameter count " + std::to_string(ck.live.size()) +
                        " does not match layer shapes (" + std::to_string(n) + ") in " + path.string());
    if (ck.adam_m.size() != n || ck.adam_v.size() != n)
      throw ConfigError("checkpoint moment arrays do not match parameter count in " + path.string());
    return ck;
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint " + path.string() + " missing field: " + e.what());
  }
}

namespace {
TrainConfig checked(TrainConfig cfg) {
  cfg.validate();
  return cfg;
}
}  // namespace

Trainer::Trainer(TrainConfig cfg) : Trainer(cfg, demos_for(cfg)) {}

Trainer::Trainer(TrainConfig cfg, std::vector<Demonstration> demos)
    : cfg_(checked(std::move(cfg))),
      net_(mlp_config_for(cfg_)),
      builder_(cfg_.objective, cfg_.macro_len(), task_action_dim(cfg_.task), cfg_.chunk_size),
      root_(cfg_.seed),
      batch_(root_.derive("batch")),
      noise_(root_.derive("noise")),
      tau_(root_.derive("tau")),
      anchor_(root_.derive("anchor")) {
  if (demos.empty()) throw ConfigError("training requires at least one demonstration");
  ds_ = build_dataset(std::move(demos), cfg_.n_obs);
  if (ds_.action_dim() != task_action_dim(cfg_.task))
    throw ConfigError("demo action dimension " + std::to_string(ds_.action_dim()) + " does not match task '" +
                      task_to_string(cfg_.task) + "'");
  init_from_dataset();
}

void Trainer::init_from_dataset() {
  int64_t windows = 0;
  for (size_t i = 0; i < ds_.demos.size(); ++i) {
    int w = ds_.num_windows(static_cast<int>(i), cfg_.macro_len());
    if (w <= 0)
      throw ConfigError("demonstration " + std::to_string(i) + " is shorter than one macro-trajectory");
    windows += w;
  }
  int64_t spe = cfg_.steps_per_epoch > 0 ? cfg_.steps_per_epoch
                                         : (windows + cfg_.batch_size - 1) / cfg_.batch_size;
  total_steps_ = static_cast<int64_t>(cfg_.epochs) * spe;
  if (cfg_.warmup_steps >= total_steps_)
    throw ConfigError("warmup_steps " + std::to_string(cfg_.warmup_steps) + " must be below total steps " +
                      std::to_string(total_steps_));

  heldout_ = generate_expert(cfg_.task, root_.derive("heldout").state(), cfg_.eval_episodes, cfg_.demo_length);

  Rng init_rng = root_.derive("init");
  net_.init(init_rng);
  shadow_.params = net_.params();
  shadow_.max_decay = cfg_.ema_max_decay;
  opt_.beta1 = cfg_.beta1;
  opt_.beta2 = cfg_.beta2;
  opt_.eps = cfg_.adam_eps;
  opt_.weight_decay = cfg_.weight_decay;
  opt_.init(net_.params().count());
}

StepRecord Trainer::train_step() {
  if (step_ >= total_steps_) throw std::logic_error("train_step called past the configured step budget");
  const int n = cfg_.batch_size;
  const int L = cfg_.macro_len();
  const int d = ds_.action_dim();
  const int ld = L * d;
  const MlpConfig& mc = net_.config();

  Mat m0(n, ld), m1(n, ld), m_tau(n, ld), obs(n, mc.obs_dim);
  std::vector<double> taus(n), anchors(n, 0.0);
  const bool adjacent = builder_.adjacent_teacher();
  const bool teacher = builder_.needs_teacher();
  int below = 0;

  for (int i = 0; i < n; ++i) {
    int demo = static_cast<int>(batch_.below(ds_.demos.size()));
    int w = static_cast<int>(batch_.below(static_cast<uint64_t>(ds_.num_windows(demo, L))));
    auto [o, macro] = extract_macro(ds_.demos[demo], w, cfg_.chunk_size, cfg_.num_chunks, cfg_.n_obs);
    Mat m1_row = ds_.norm.normalize_actions(macro.actions);
    std::copy(m1_row.v.begin(), m1_row.v.end(), m1.v.begin() + static_cast<long>(i) * ld);
    std::vector<double> o_n = ds_.norm.normalize_obs(o.values);
    std::copy(o_n.begin(), o_n.end(), obs.v.begin() + static_cast<long>(i) * mc.obs_dim);

    for (int k = 0; k < ld; ++k) m0(i, k) = noise_.normal();
    double tau = sample_tau(tau_);
    // The adjacent-time baseline needs r = tau + delta inside [0, 1], so tau
    // is drawn uniform on [0, 1 - delta] there.
    if (adjacent) tau *= 1.0 - cfg_.objective.delta_tau;
    taus[i] = tau;
    if (teacher) {
      anchors[i] = adjacent ? tau + cfg_.objective.delta_tau : sample_anchor(cfg_.anchor, anchor_);
      if (anchors[i] < tau) ++below;
    }
    for (int k = 0; k < ld; ++k) m_tau(i, k) = (1.0 - tau) * m0(i, k) + tau * m1(i, k);
  }

  Mat v_teacher(0, 0), f_teacher(0, 0);
  if (teacher) {
    Mat m_r(n, ld);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < ld; ++k) m_r(i, k) = (1.0 - anchors[i]) * m0(i, k) + anchors[i] * m1(i, k);
    v_teacher = net_.forward(shadow_.params, m_r, anchors, obs);
    f_teacher = m_r;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < ld; ++k) f_teacher(i, k) += (1.0 - anchors[i]) * v_teacher(i, k);
  }
  Mat target_velocity = m1 - m0;

  StepRecord rec;
  rec.step = step_;
  if (cfg_.probe_every > 0 && step_ % cfg_.probe_every == 0) {
    GradAlignment ga =
        grad_alignment_probe(net_, net_.params(), m_tau, taus, obs, m1, builder_.prefix_rows(), d);
    rec.has_probe = true;
    rec.probe_inner = ga.inner;
    rec.probe_cosine = ga.cosine;
  }

  Tape tape;
  BoundMlp bound = bind_params(tape, net_.params());
  Var input = tape.constant(assemble_input(mc, m_tau, taus, obs));
  Var v_student = mlp_forward_on_tape(tape, mc, bound, input);
  std::vector<double> residual_scale(n);
  for (int i = 0; i < n; ++i) residual_scale[i] = 1.0 - taus[i];
  Var f_student = tape.add(tape.constant(m_tau), tape.row_scale(v_student, residual_scale));

  BatchTerms terms = builder_.build(tape, f_student, v_student, f_teacher, v_teacher, m1, target_velocity);
  double loss_total = tape.scalar(terms.total);
  tape.backward(terms.total);
  std::vector<double> grad = collect_gradient(tape, bound);

  double gnorm_sq = 0.0, gmax = 0.0;
  bool finite = std::isfinite(loss_total);
  for (double g : grad) {
    if (!std::isfinite(g)) finite = false;
    gnorm_sq += g * g;
    gmax = std::max(gmax, std::abs(g));
  }
  if (!finite) {
    std::ostringstream msg;
    msg << "non-finite loss at step " << step_ << ": time=" << terms.time_value
        << " freq=" << terms.freq_value << " total=" << loss_total << " max|grad|=" << gmax;
    throw std::runtime_error(msg.str());
  }

  rec.lr = lr_schedule(step_, total_steps_, cfg_.warmup_steps, cfg_.learning_rate);
  rec.loss_time = terms.time_value;
  rec.loss_freq = terms.freq_value;
  rec.loss_total = loss_total;
  rec.grad_norm = std::sqrt(gnorm_sq);
  rec.anchor_below_tau = static_cast<double>(below) / n;

  std::vector<double> flat = net_.params().flatten();
  opt_.step(flat, grad, rec.lr);
  net_.params().unflatten(flat);
  ema_update(shadow_, net_.params(), step_);
  ++step_;
  return rec;
}

EvalRecord Trainer::evaluate() {
  std::vector<MetricReport> reports;
  reports.reserve(heldout_.size());
  for (size_t e = 0; e < heldout_.size(); ++e) {
    const Demonstration& demo = heldout_[e];
    OneStepPolicy policy(net_, net_.params(), ds_.norm, cfg_.chunk_size, cfg_.num_chunks, cfg_.n_obs);
    Rng noise = root_.derive("eval-noise", static_cast<uint64_t>(step_) * 1000003ull + e);
    RolloutTrace trace =
        rollout(policy, demo, RolloutMode::kClosedLoop, cfg_.chunk_size, demo.steps(), noise);
    reports.push_back(evaluate_trace(cfg_.task, trace, demo.goal()));
  }
  return EvalRecord{step_, aggregate_reports(reports)};
}

EvalAggregate Trainer::open_loop_eval() {
  std::vector<MetricReport> reports;
  reports.reserve(heldout_.size());
  for (size_t e = 0; e < heldout_.size(); ++e) {
    const Demonstration& demo = heldout_[e];
    OneStepPolicy policy(net_, net_.params(), ds_.norm, cfg_.chunk_size, cfg_.num_chunks, cfg_.n_obs);
    Rng noise = root_.derive("open-noise", e);
    RolloutTrace trace =
        rollout(policy, demo, RolloutMode::kOpenLoop, cfg_.chunk_size, demo.steps(), noise);
    reports.push_back(evaluate_trace(cfg_.task, trace, demo.goal()));
  }
  return aggregate_reports(reports);
}

Checkpoint Trainer::snapshot() const {
  Checkpoint ck;
  ck.task = task_to_string(cfg_.task);
  ck.chunk_size = cfg_.chunk_size;
  ck.num_chunks = cfg_.num_chunks;
  ck.n_obs = cfg_.n_obs;
  ck.time_embed_dim = cfg_.time_embed_dim;
  ck.hidden = cfg_.hidden;
  ck.action_dim = ds_.action_dim();
  ck.step = step_;
  ck.live = net_.params().flatten();
  ck.shadow = shadow_.params.flatten();
  ck.adam_m = opt_.m;
  ck.adam_v = opt_.v;
  ck.adam_t = opt_.t;
  ck.norm = ds_.norm;
  ck.batch_state = batch_.state();
  ck.noise_state = noise_.state();
  ck.tau_state = tau_.state();
  ck.anchor_state = anchor_.state();
  return ck;
}

void Trainer::restore(const Checkpoint& ck) {
  if (ck.task != task_to_string(cfg_.task) || ck.chunk_size != cfg_.chunk_size ||
      ck.num_chunks != cfg_.num_chunks || ck.n_obs != cfg_.n_obs ||
      ck.time_embed_dim != cfg_.time_embed_dim || ck.hidden != cfg_.hidden ||
      ck.action_dim != ds_.action_dim())
    throw ConfigError("checkpoint shape does not match the training configuration");
  if (ck.live.size() != net_.params().count())
    throw ConfigError("checkpoint parameter count " + std::to_string(ck.live.size()) +
                      " does not match the model (" + std::to_string(net_.params().count()) + ")");
  if (ck.step > total_steps_)
    throw ConfigError("checkpoint step " + std::to_string(ck.step) + " exceeds the configured budget " +
                      std::to_string(total_steps_));
  net_.params().unflatten(ck.live);
  shadow_.params.unflatten(ck.shadow);
  opt_.m = ck.adam_m;
  opt_.v = ck.adam_v;
  opt_.t = ck.adam_t;
  step_ = ck.step;
  batch_.set_state(ck.batch_state);
  noise_.set_state(ck.noise_state);
  tau_.set_state(ck.tau_state);
  anchor_.set_state(ck.anchor_state);
  // Normalization is a function of the dataset; a mismatch means the demos
  // differ from the ones the checkpoint was trained on.
  if (ck.norm.action_shift != ds_.norm.action_shift || ck.norm.action_scale != ds_.norm.action_scale)
    throw ConfigError("checkpoint normalization does not match the dataset");
}

RunResult Trainer::run(const std::filesystem::path& run_dir) {
  std::filesystem::create_directories(run_dir);
  std::filesystem::path log_path = run_dir / "metrics.jsonl";
  bool resuming = step_ > 0;

  std::vector<double> successes;
  if (resuming && std::filesystem::exists(log_path)) {
    std::ifstream in(log_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (!j.is_discarded() && j.value("kind", "") == "eval")
        successes.push_back(j.value("success_rate", 0.0));
    }
  }

  std::ofstream log(log_path, resuming ? std::ios::app : std::ios::trunc);
  if (!log) throw std::runtime_error("cannot open metrics log: " + log_path.string());

  auto write_eval = [&](const EvalRecord& er) {
    json j;
    j["kind"] = "eval";
    j["step"] = er.step;
    j["episodes"] = er.closed.episodes;
    j["success_rate"] = er.closed.success_rate;
    j["endpoint_error"] = er.closed.endpoint_error_mean;
    j["atv"] = er.closed.atv_mean;
    j["atv_expert"] = er.closed.atv_expert_mean;
    j["atv_gap"] = er.closed.atv_gap;
    j["ts_score"] = er.closed.ts_score_mean;
    j["nfe_per_decision"] = er.closed.nfe_per_decision;
    log << j.dump() << '\n';
    successes.push_back(er.closed.success_rate);
  };

  std::optional<EvalRecord> last_eval;
  while (step_ < total_steps_) {
    StepRecord rec = train_step();
    json j;
    j["kind"] = "step";
    j["step"] = rec.step;
    j["lr"] = rec.lr;
    j["l_time"] = rec.loss_time;
    j["l_freq"] = rec.loss_freq;
    j["l_total"] = rec.loss_total;
    j["grad_norm"] = rec.grad_norm;
    j["anchor_below_tau"] = rec.anchor_below_tau;
    if (rec.has_probe) {
      j["probe_inner"] = rec.probe_inner;
      j["probe_cosine"] = std::isfinite(rec.probe_cosine) ? json(rec.probe_cosine) : json();
    }
    log << j.dump() << '\n';

    if (cfg_.eval_every > 0 && (rec.step + 1) % cfg_.eval_every == 0) {
      EvalRecord er = evaluate();
      write_eval(er);
      last_eval = er;
      save_checkpoint(run_dir / "checkpoint.json", snapshot());
      log.flush();
    }
  }

  RunResult result;
  if (!last_eval || last_eval->step != step_) {
    EvalRecord er = evaluate();
    write_eval(er);
    last_eval = er;
  }
  result.final_closed = last_eval->closed;
  result.steps = step_;
  result.final_open = open_loop_eval();

  std::vector<double> top = successes;
  std::sort(top.begin(), top.end(), std::greater<>());
  size_t k = std::min<size_t>(5, top.size());
  double sum = 0.0;
  for (size_t i = 0; i < k; ++i) sum += top[i];
  result.top5_success = k > 0 ? sum / static_cast<double>(k) : 0.0;

  save_checkpoint(run_dir / "checkpoint.json", snapshot());

  json fin;
  fin["steps"] = result.steps;
  fin["top5_success"] = result.top5_success;
  fin["closed"] = {{"episodes", result.final_closed.episodes},
                   {"success_rate", result.final_closed.success_rate},
                   {"endpoint_error", result.final_closed.endpoint_error_mean},
                   {"atv", result.final_closed.atv_mean},
                   {"atv_expert", result.final_closed.atv_expert_mean},
                   {"atv_gap", result.final_closed.atv_gap},
                   {"ts_score", result.final_closed.ts_score_mean},
                   {"nfe_per_decision", result.final_closed.nfe_per_decision}};
  fin["open"] = {{"episodes", result.final_open.episodes},
                 {"success_rate", result.final_open.success_rate},
                 {"endpoint_error", result.final_open.endpoint_error_mean},
                 {"atv", result.final_open.atv_mean},
                 {"atv_expert", result.final_open.atv_expert_mean},
                 {"atv_gap", result.final_open.atv_gap},
                 {"ts_score", result.final_open.ts_score_mean},
                 {"nfe_per_decision", result.final_open.nfe_per_decision}};
  std::ofstream fout(run_dir / "final.json", std::ios::trunc);
  if (!fout) throw std::runtime_error("cannot write summary: " + (run_dir / "final.json").string());
  fout << fin.dump(1) << '\n';
  return result;
}

}  // namespace focalflow
