#include "focalflow/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "focalflow/errors.hpp"
#include "focalflow/format.hpp"

namespace focalflow {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  const char* first = value.data();
  const char* last = value.data() + value.size();
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("key '" + key + "': cannot parse '" + value + "' as a real number");
  return out;
}

int64_t to_int(const std::string& key, const std::string& value) {
  const char* first = value.data();
  const char* last = value.data() + value.size();
  int64_t out = 0;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("key '" + key + "': cannot parse '" + value + "' as an integer");
  return out;
}

uint64_t to_u64(const std::string& key, const std::string& value) {
  const char* first = value.data();
  const char* last = value.data() + value.size();
  uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("key '" + key + "': cannot parse '" + value + "' as an unsigned integer");
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  if (trim(value).empty()) return out;
  std::stringstream ss(value);
  std::string part;
  while (std::getline(ss, part, ','))
    out.push_back(static_cast<int>(to_int(key, trim(part))));
  return out;
}

std::vector<double> to_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  if (trim(value).empty()) return out;
  std::stringstream ss(value);
  std::string part;
  while (std::getline(ss, part, ','))
    out.push_back(to_double(key, trim(part)));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& xs, const std::function<std::string(const T&)>& one) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += one(xs[i]);
  }
  return out;
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + " has no '=': " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + " has an empty key");
    kv[key] = value;
  }
  return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_key_values(buf.str());
}

std::string serialize_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

void apply_assignment(KeyValues& kv, const std::string& assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  kv[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

TrainConfig config_from_keys(const KeyValues& kv) {
  TrainConfig cfg;
  for (const auto& [key, value] : kv) {
    // Enum parsers report bad names as invalid_argument; at this boundary the
    // value came from user input, so surface it as a ConfigError.
    try {
      if (key == "task") cfg.task = task_from_string(value);
      else if (key == "demos_path") cfg.demos_path = value;
      else if (key == "demo_count") cfg.demo_count = static_cast<int>(to_int(key, value));
      else if (key == "demo_length") cfg.demo_length = static_cast<int>(to_int(key, value));
      else if (key == "n_obs") cfg.n_obs = static_cast<int>(to_int(key, value));
      else if (key == "chunk_size") cfg.chunk_size = static_cast<int>(to_int(key, value));
      else if (key == "num_chunks") cfg.num_chunks = static_cast<int>(to_int(key, value));
      else if (key == "hidden") cfg.hidden = to_int_list(key, value);
      else if (key == "time_embed_dim") cfg.time_embed_dim = static_cast<int>(to_int(key, value));
      else if (key == "epochs") cfg.epochs = static_cast<int>(to_int(key, value));
      else if (key == "steps_per_epoch") cfg.steps_per_epoch = static_cast<int>(to_int(key, value));
      else if (key == "batch_size") cfg.batch_size = static_cast<int>(to_int(key, value));
      else if (key == "learning_rate") cfg.learning_rate = to_double(key, value);
      else if (key == "beta1") cfg.beta1 = to_double(key, value);
      else if (key == "beta2") cfg.beta2 = to_double(key, value);
      else if (key == "weight_decay") cfg.weight_decay = to_double(key, value);
      else if (key == "adam_eps") cfg.adam_eps = to_double(key, value);
      else if (key == "warmup_steps") cfg.warmup_steps = static_cast<int>(to_int(key, value));
      else if (key == "ema_max_decay") cfg.ema_max_decay = to_double(key, value);
      else if (key == "seed") cfg.seed = to_u64(key, value);
      else if (key == "eval_every") cfg.eval_every = static_cast<int>(to_int(key, value));
      else if (key == "eval_episodes") cfg.eval_episodes = static_cast<int>(to_int(key, value));
      else if (key == "probe_every") cfg.probe_every = static_cast<int>(to_int(key, value));
      else if (key == "objective.variant") cfg.objective.variant = variant_from_string(value);
      else if (key == "objective.lambda") cfg.objective.lambda = to_double(key, value);
      else if (key == "objective.alpha") cfg.objective.alpha = to_double(key, value);
      else if (key == "objective.delta_tau") cfg.objective.delta_tau = to_double(key, value);
      else if (key == "objective.prefix_rows") cfg.objective.prefix_rows = static_cast<int>(to_int(key, value));
      else if (key == "objective.band_mask") cfg.objective.band_mask = band_mask_from_string(value);
      else if (key == "objective.band_split") cfg.objective.band_split = static_cast<int>(to_int(key, value));
      else if (key == "objective.spectral_weights") cfg.objective.spectral_weights = to_double_list(key, value);
      else if (key == "anchor.kind") cfg.anchor.kind = anchor_kind_from_string(value);
      else if (key == "anchor.mu") cfg.anchor.mu = to_double(key, value);
      else if (key == "anchor.sigma") cfg.anchor.sigma = to_double(key, value);
      else if (key == "anchor.fixed_value") cfg.anchor.fixed_value = to_double(key, value);
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw ConfigError("key '" + key + "': " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

KeyValues keys_from_config(const TrainConfig& cfg) {
  KeyValues kv;
  kv["task"] = task_to_string(cfg.task);
  kv["demos_path"] = cfg.demos_path;
  kv["demo_count"] = std::to_string(cfg.demo_count);
  kv["demo_length"] = std::to_string(cfg.demo_length);
  kv["n_obs"] = std::to_string(cfg.n_obs);
  kv["chunk_size"] = std::to_string(cfg.chunk_size);
  kv["num_chunks"] = std::to_string(cfg.num_chunks);
  kv["hidden"] = join<int>(cfg.hidden, [](const int& x) { return std::to_string(x); });
  kv["time_embed_dim"] = std::to_string(cfg.time_embed_dim);
  kv["epochs"] = std::to_string(cfg.epochs);
  kv["steps_per_epoch"] = std::to_string(cfg.steps_per_epoch);
  kv["batch_size"] = std::to_string(cfg.batch_size);
  kv["learning_rate"] = format_double(cfg.learning_rate);
  kv["beta1"] = format_double(cfg.beta1);
  kv["beta2"] = format_double(cfg.beta2);
  kv["weight_decay"] = format_double(cfg.weight_decay);
  kv["adam_eps"] = format_double(cfg.adam_eps);
  kv["warmup_steps"] = std::to_string(cfg.warmup_steps);
  kv["ema_max_decay"] = format_double(cfg.ema_max_decay);
  kv["seed"] = std::to_string(cfg.seed);
  kv["eval_every"] = std::to_string(cfg.eval_every);
  kv["eval_episodes"] = std::to_string(cfg.eval_episodes);
  kv["probe_every"] = std::to_string(cfg.probe_every);
  kv["objective.variant"] = variant_to_string(cfg.objective.variant);
  kv["objective.lambda"] = format_double(cfg.objective.lambda);
  kv["objective.alpha"] = format_double(cfg.objective.alpha);
  kv["objective.delta_tau"] = format_double(cfg.objective.delta_tau);
  kv["objective.prefix_rows"] = std::to_string(cfg.objective.prefix_rows);
  kv["objective.band_mask"] = band_mask_to_string(cfg.objective.band_mask);
  kv["objective.band_split"] = std::to_string(cfg.objective.band_split);
  kv["objective.spectral_weights"] =
      join<double>(cfg.objective.spectral_weights, [](const double& x) { return format_double(x); });
  kv["anchor.kind"] = anchor_kind_to_string(cfg.anchor.kind);
  kv["anchor.mu"] = format_double(cfg.anchor.mu);
  kv["anchor.sigma"] = format_double(cfg.anchor.sigma);
  kv["anchor.fixed_value"] = format_double(cfg.anchor.fixed_value);
  return kv;
}

}  // namespace focalflow
