#include "focalflow/network.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace focalflow {

std::vector<std::pair<int, int>> MlpConfig::layer_shapes() const {
  std::vector<std::pair<int, int>> shapes;
  int in = input_dim();
  for (int h : hidden) {
    shapes.emplace_back(in, h);
    in = h;
  }
  shapes.emplace_back(in, output_dim());
  return shapes;
}

void MlpConfig::validate() const {
  if (state_dim <= 0) throw std::invalid_argument("MlpConfig: state_dim must be positive");
  if (obs_dim < 0) throw std::invalid_argument("MlpConfig: obs_dim must be non-negative");
  if (time_embed_dim < 2 || time_embed_dim % 2 != 0) {
    throw std::invalid_argument("MlpConfig: time_embed_dim must be even and >= 2, got " +
                                std::to_string(time_embed_dim));
  }
  for (int h : hidden)
    if (h <= 0) throw std::invalid_argument("MlpConfig: hidden widths must be positive");
}

size_t MlpParams::count() const {
  size_t n = 0;
  for (const Mat& w : weights) n += w.size();
  for (const Mat& b : biases) n += b.size();
  return n;
}

std::vector<double> MlpParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(count());
  for (size_t l = 0; l < weights.size(); ++l) {
    flat.insert(flat.end(), weights[l].v.begin(), weights[l].v.end());
    flat.insert(flat.end(), biases[l].v.begin(), biases[l].v.end());
  }
  return flat;
}

void MlpParams::unflatten(std::span<const double> flat) {
  if (flat.size() != count()) {
    throw std::invalid_argument("MlpParams::unflatten: got " + std::to_string(flat.size()) +
                                " values, expected " + std::to_string(count()));
  }
  size_t off = 0;
  for (size_t l = 0; l < weights.size(); ++l) {
    std::copy(flat.begin() + off, flat.begin() + off + weights[l].size(), weights[l].v.begin());
    off += weights[l].size();
    std::copy(flat.begin() + off, flat.begin() + off + biases[l].size(), biases[l].v.begin());
    off += biases[l].size();
  }
}

MlpParams init_params(const MlpConfig& cfg, Rng& rng) {
  cfg.validate();
  MlpParams p;
  for (auto [fan_in, fan_out] : cfg.layer_shapes()) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Mat w(fan_in, fan_out);
    for (double& x : w.v) x = rng.uniform(-limit, limit);
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(1, fan_out, 0.0);
  }
  return p;
}

std::vector<double> time_embedding(double t, int dim) {
  if (dim < 2 || dim % 2 != 0) {
    throw std::invalid_argument("time_embedding: dim must be even and >= 2, got " + std::to_string(dim));
  }
  std::vector<double> emb(dim);
  for (int k = 0; k < dim / 2; ++k) {
    const double freq = std::numbers::pi * std::pow(2.0, k);
    emb[2 * k] = std::sin(freq * t);
    emb[2 * k + 1] = std::cos(freq * t);
  }
  return emb;
}

Mat assemble_input(const MlpConfig& cfg, const Mat& states, const std::vector<double>& times, const Mat& obs) {
  const int n = states.rows;
  if (states.cols != cfg.state_dim) {
    throw std::invalid_argument("assemble_input: state width " + std::to_string(states.cols) +
                                ", config expects " + std::to_string(cfg.state_dim));
  }
  if (static_cast<int>(times.size()) != n || obs.rows != n || obs.cols != cfg.obs_dim) {
    throw std::invalid_argument("assemble_input: inconsistent batch (states " + std::to_string(n) +
                                ", times " + std::to_string(times.size()) + ", obs " +
                                std::to_string(obs.rows) + "x" + std::to_string(obs.cols) + ")");
  }
  Mat input(n, cfg.input_dim());
  for (int i = 0; i < n; ++i) {
    double* dst = input.row_ptr(i);
    const double* s = states.row_ptr(i);
    for (int j = 0; j < cfg.state_dim; ++j) dst[j] = s[j];
    const auto emb = time_embedding(times[i], cfg.time_embed_dim);
    for (int j = 0; j < cfg.time_embed_dim; ++j) dst[cfg.state_dim + j] = emb[j];
    const double* o = obs.row_ptr(i);
    for (int j = 0; j < cfg.obs_dim; ++j) dst[cfg.state_dim + cfg.time_embed_dim + j] = o[j];
  }
  return input;
}

VelocityField::VelocityField(MlpConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng zero(0);
  params_ = init_params(cfg_, zero);   // placeholder until init() seeds properly
}

Mat VelocityField::forward(const MlpParams& p, const Mat& states, const std::vector<double>& times,
                           const Mat& obs) const {
  ++evals_;
  Mat h = assemble_input(cfg_, states, times, obs);
  const size_t layers = p.weights.size();
  for (size_t l = 0; l < layers; ++l) {
    Mat z = matmul(h, p.weights[l]);
    for (int i = 0; i < z.rows; ++i) {
      const double* b = p.biases[l].row_ptr(0);
      double* zr = z.row_ptr(i);
      for (int j = 0; j < z.cols; ++j) zr[j] += b[j];
    }
    if (l + 1 < layers) {
      for (double& x : z.v) x = std::tanh(x);
    }
    h = std::move(z);
  }
  return h;
}

BoundMlp bind_params(Tape& tape, const MlpParams& params) {
  BoundMlp bound;
  for (size_t l = 0; l < params.weights.size(); ++l) {
    bound.weights.push_back(tape.leaf(params.weights[l]));
    bound.biases.push_back(tape.leaf(params.biases[l]));
  }
  return bound;
}

Var mlp_forward_on_tape(Tape& tape, const MlpConfig& cfg, const BoundMlp& bound, Var input) {
  (void)cfg;
  Var h = input;
  const size_t layers = bound.weights.size();
  for (size_t l = 0; l < layers; ++l) {
    Var z = tape.add_row(tape.matmul(h, bound.weights[l]), bound.biases[l]);
    h = (l + 1 < layers) ? tape.tanh_act(z) : z;
  }
  return h;
}

std::vector<double> collect_gradient(const Tape& tape, const BoundMlp& bound) {
  std::vector<double> flat;
  for (size_t l = 0; l < bound.weights.size(); ++l) {
    const Mat& gw = tape.grad(bound.weights[l]);
    flat.insert(flat.end(), gw.v.begin(), gw.v.end());
    const Mat& gb = tape.grad(bound.biases[l]);
    flat.insert(flat.end(), gb.v.begin(), gb.v.end());
  }
  return flat;
}

double ema_decay_at(int64_t step, double max_decay) {
  if (step < 0) throw std::invalid_argument("ema_decay_at: negative step");
  return std::min(max_decay, static_cast<double>(1 + step) / static_cast<double>(10 + step));
}

void ema_update(EmaShadow& shadow, const MlpParams& live, int64_t step) {
  const double beta = ema_decay_at(step, shadow.max_decay);
  if (shadow.params.count() != live.count()) {
    throw std::invalid_argument("ema_update: shadow has " + std::to_string(shadow.params.count()) +
                                " params, live has " + std::to_string(live.count()));
  }
  for (size_t l = 0; l < live.weights.size(); ++l) {
    for (size_t i = 0; i < live.weights[l].v.size(); ++i) {
      shadow.params.weights[l].v[i] = beta * shadow.params.weights[l].v[i] + (1.0 - beta) * live.weights[l].v[i];
    }
    for (size_t i = 0; i < live.biases[l].v.size(); ++i) {
      shadow.params.biases[l].v[i] = beta * shadow.params.biases[l].v[i] + (1.0 - beta) * live.biases[l].v[i];
    }
  }
}

}  // namespace focalflow
