#include "focalflow/network.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"

using namespace focalflow;

namespace {

MlpConfig small_config() {
  MlpConfig cfg;
  cfg.state_dim = 6;
  cfg.obs_dim = 4;
  cfg.hidden = {8, 8};
  cfg.time_embed_dim = 4;
  return cfg;
}

Mat random_mat(int r, int c, Rng& rng) {
  Mat m(r, c);
  for (double& v : m.v) v = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("layer shapes chain input to output") {
  MlpConfig cfg = small_config();
  auto shapes = cfg.layer_shapes();
  REQUIRE(shapes.size() == 3);
  CHECK(shapes[0].first == cfg.input_dim());
  CHECK(shapes[0].second == 8);
  CHECK(shapes[1] == std::pair<int, int>{8, 8});
  CHECK(shapes[2] == std::pair<int, int>{8, cfg.output_dim()});
}

TEST_CASE("init produces glorot-bounded weights and zero biases") {
  MlpConfig cfg = small_config();
  Rng rng(1);
  MlpParams p = init_params(cfg, rng);
  auto shapes = cfg.layer_shapes();
  REQUIRE(p.weights.size() == shapes.size());
  REQUIRE(p.biases.size() == shapes.size());
  for (size_t l = 0; l < shapes.size(); ++l) {
    CHECK(p.weights[l].rows == shapes[l].first);
    CHECK(p.weights[l].cols == shapes[l].second);
    CHECK(p.biases[l].rows == 1);
    CHECK(p.biases[l].cols == shapes[l].second);
    double bound = std::sqrt(6.0 / (shapes[l].first + shapes[l].second));
    for (double w : p.weights[l].v) {
      CHECK(w >= -bound);
      CHECK(w <= bound);
    }
    for (double b : p.biases[l].v) CHECK(b == 0.0);
  }
}

TEST_CASE("flatten and unflatten round trip") {
  MlpConfig cfg = small_config();
  Rng rng(2);
  MlpParams p = init_params(cfg, rng);
  std::vector<double> flat = p.flatten();
  REQUIRE(flat.size() == p.count());
  MlpParams q = init_params(cfg, rng);   // different values, same shapes
  q.unflatten(flat);
  CHECK(q.flatten() == flat);
  flat.pop_back();
  CHECK_THROWS(q.unflatten(flat));
}

TEST_CASE("time embedding pinned values") {
  auto emb = time_embedding(0.25, 4);
  REQUIRE(emb.size() == 4);
  // sin(pi/4), cos(pi/4), sin(pi/2), cos(pi/2)
  CHECK(emb[0] == doctest::Approx(0.70710678118654746).epsilon(1e-15));
  CHECK(emb[1] == doctest::Approx(0.70710678118654757).epsilon(1e-15));
  CHECK(emb[2] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(emb[3]) < 1e-15);
  CHECK_THROWS(time_embedding(0.5, 3));
  CHECK_THROWS(time_embedding(0.5, 0));
}

TEST_CASE("assemble_input lays out state, embedding, observation") {
  MlpConfig cfg = small_config();
  Rng rng(3);
  Mat states = random_mat(2, cfg.state_dim, rng);
  Mat obs = random_mat(2, cfg.obs_dim, rng);
  std::vector<double> times{0.25, 0.75};
  Mat in = assemble_input(cfg, states, times, obs);
  REQUIRE(in.rows == 2);
  REQUIRE(in.cols == cfg.input_dim());
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < cfg.state_dim; ++j) CHECK(in(i, j) == states(i, j));
    auto emb = time_embedding(times[i], cfg.time_embed_dim);
    for (int j = 0; j < cfg.time_embed_dim; ++j) CHECK(in(i, cfg.state_dim + j) == emb[j]);
    for (int j = 0; j < cfg.obs_dim; ++j)
      CHECK(in(i, cfg.state_dim + cfg.time_embed_dim + j) == obs(i, j));
  }
  CHECK_THROWS(assemble_input(cfg, random_mat(2, 3, rng), times, obs));
}

TEST_CASE("forward is deterministic and batch rows are independent") {
  MlpConfig cfg = small_config();
  VelocityField net(cfg);
  Rng rng(4);
  net.init(rng);
  Mat states = random_mat(3, cfg.state_dim, rng);
  Mat obs = random_mat(3, cfg.obs_dim, rng);
  std::vector<double> times{0.1, 0.5, 0.9};

  Mat out = net.forward(states, times, obs);
  REQUIRE(out.rows == 3);
  REQUIRE(out.cols == cfg.output_dim());
  Mat again = net.forward(states, times, obs);
  CHECK(out.v == again.v);

  // Row i of the batch equals a single-row forward of the same inputs.
  for (int i = 0; i < 3; ++i) {
    Mat s1(1, cfg.state_dim), o1(1, cfg.obs_dim);
    for (int j = 0; j < cfg.state_dim; ++j) s1(0, j) = states(i, j);
    for (int j = 0; j < cfg.obs_dim; ++j) o1(0, j) = obs(i, j);
    Mat r = net.forward(s1, {times[i]}, o1);
    for (int j = 0; j < cfg.output_dim(); ++j) CHECK(r(0, j) == out(i, j));
  }
}

TEST_CASE("forward counts evaluations") {
  MlpConfig cfg = small_config();
  VelocityField net(cfg);
  Rng rng(5);
  net.init(rng);
  CHECK(net.eval_count() == 0);
  Mat states = random_mat(1, cfg.state_dim, rng);
  Mat obs = random_mat(1, cfg.obs_dim, rng);
  net.forward(states, {0.5}, obs);
  net.forward(states, {0.5}, obs);
  CHECK(net.eval_count() == 2);
  net.reset_eval_count();
  CHECK(net.eval_count() == 0);
}

TEST_CASE("taped forward matches the plain forward") {
  MlpConfig cfg = small_config();
  VelocityField net(cfg);
  Rng rng(6);
  net.init(rng);
  Mat states = random_mat(4, cfg.state_dim, rng);
  Mat obs = random_mat(4, cfg.obs_dim, rng);
  std::vector<double> times{0.0, 0.3, 0.6, 1.0};

  Mat plain = net.forward(states, times, obs);

  Tape tape;
  BoundMlp bound = bind_params(tape, net.params());
  Var input = tape.constant(assemble_input(cfg, states, times, obs));
  Var out = mlp_forward_on_tape(tape, cfg, bound, input);
  const Mat& taped = tape.value(out);
  REQUIRE(taped.same_shape(plain));
  for (size_t i = 0; i < plain.v.size(); ++i)
    CHECK(taped.v[i] == doctest::Approx(plain.v[i]).epsilon(1e-14));
}

TEST_CASE("collect_gradient aligns with flatten order") {
  MlpConfig cfg = small_config();
  VelocityField net(cfg);
  Rng rng(7);
  net.init(rng);
  Mat states = random_mat(2, cfg.state_dim, rng);
  Mat obs = random_mat(2, cfg.obs_dim, rng);
  std::vector<double> times{0.2, 0.8};

  Tape tape;
  BoundMlp bound = bind_params(tape, net.params());
  Var input = tape.constant(assemble_input(cfg, states, times, obs));
  Var out = mlp_forward_on_tape(tape, cfg, bound, input);
  tape.backward(tape.sumsq(out));
  std::vector<double> g = collect_gradient(tape, bound);
  REQUIRE(g.size() == net.params().count());

  // Spot-check one weight entry with central differences on the loss.
  auto loss_at = [&](MlpParams p) {
    Mat o = net.forward(p, states, times, obs);
    return sum_squares(o);
  };
  const double h = 1e-6;
  MlpParams p = net.params();
  std::vector<double> flat = p.flatten();
  for (size_t idx : {size_t{0}, flat.size() / 2, flat.size() - 1}) {
    std::vector<double> up = flat, down = flat;
    up[idx] += h;
    down[idx] -= h;
    MlpParams pu = p, pd = p;
    pu.unflatten(up);
    pd.unflatten(down);
    double fd = (loss_at(pu) - loss_at(pd)) / (2.0 * h);
    CHECK(g[idx] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("ema decay warmup schedule") {
  CHECK(ema_decay_at(0, 0.9999) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(ema_decay_at(9, 0.9999) == doctest::Approx(10.0 / 19.0).epsilon(1e-15));
  CHECK(ema_decay_at(1000000, 0.9999) == 0.9999);
}

TEST_CASE("ema update blends toward the live parameters") {
  MlpConfig cfg = small_config();
  Rng rng(8);
  MlpParams live = init_params(cfg, rng);
  EmaShadow shadow;
  shadow.params = live;
  shadow.max_decay = 0.9999;

  MlpParams moved = live;
  for (double& w : moved.weights[0].v) w += 1.0;
  ema_update(shadow, moved, 0);   // decay 0.1: shadow = 0.1 * old + 0.9 * live
  double expect = live.weights[0].v[0] * 0.1 + moved.weights[0].v[0] * 0.9;
  CHECK(shadow.params.weights[0].v[0] == doctest::Approx(expect).epsilon(1e-14));
  // Untouched layers still pass through the blend, so equality is approximate.
  for (size_t i = 0; i < live.weights[1].v.size(); ++i)
    CHECK(shadow.params.weights[1].v[i] == doctest::Approx(live.weights[1].v[i]).epsilon(1e-14));
}

TEST_CASE("config validation") {
  MlpConfig cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  // No hidden layers degrades to a linear head, still a valid network.
  cfg.hidden = {};
  CHECK_NOTHROW(cfg.validate());
  cfg = small_config();
  cfg.state_dim = 0;
  CHECK_THROWS(cfg.validate());
  cfg = small_config();
  cfg.time_embed_dim = 3;
  CHECK_THROWS(cfg.validate());
}
