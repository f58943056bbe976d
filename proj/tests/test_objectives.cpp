#include "focalflow/objectives.hpp"

#include <cmath>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "focalflow/rng.hpp"

using namespace focalflow;

namespace {

constexpr int kL = 6, kD = 2, kH = 2, kN = 3;

Mat random_mat(int r, int c, Rng& rng) {
  Mat m(r, c);
  for (double& v : m.v) v = rng.normal();
  return m;
}

// One flattened batch row reshaped to its L x d layout.
Mat reshape_row(const Mat& batch, int row, int length, int dim) {
  Mat out(length, dim);
  for (int i = 0; i < length; ++i)
    for (int j = 0; j < dim; ++j) out(i, j) = batch(row, i * dim + j);
  return out;
}

struct BuildResult {
  double total, time_value, freq_value;
};

// Runs build() on constant student nodes so the scalar values can be compared
// against hand-computed losses.
BuildResult run_build(const ObjectiveBuilder& builder, const Mat& f_student, const Mat& v_student,
                      const Mat& f_teacher, const Mat& v_teacher, const Mat& expert,
                      const Mat& target_velocity) {
  Tape tape;
  Var fs = tape.constant(f_student);
  Var vs = tape.constant(v_student);
  BatchTerms terms = builder.build(tape, fs, vs, f_teacher, v_teacher, expert, target_velocity);
  return {tape.scalar(terms.total), terms.time_value, terms.freq_value};
}

ObjectiveConfig config_for(ObjectiveVariant v) {
  ObjectiveConfig cfg;
  cfg.variant = v;
  cfg.lambda = 0.25;
  cfg.alpha = 0.5;
  return cfg;
}

}  // namespace

TEST_CASE("variant and band mask string round trips") {
  for (auto v : {ObjectiveVariant::kFocal, ObjectiveVariant::kWoLas, ObjectiveVariant::kWoFcoLas,
                 ObjectiveVariant::kTimeOnlyFco, ObjectiveVariant::kFreqOnlyFco,
                 ObjectiveVariant::kFixedRLas, ObjectiveVariant::kFcoFullMacro,
                 ObjectiveVariant::kFcoProxFreq, ObjectiveVariant::kFmBaseline,
                 ObjectiveVariant::kFlowPolicyBaseline, ObjectiveVariant::kWeightedSpectral})
    CHECK(variant_from_string(variant_to_string(v)) == v);
  CHECK_THROWS(variant_from_string("focal2"));
  for (auto m : {BandMask::kAll, BandMask::kLowOnly, BandMask::kHighOnly})
    CHECK(band_mask_from_string(band_mask_to_string(m)) == m);
  CHECK_THROWS(band_mask_from_string("mid"));
}

TEST_CASE("objective config validation") {
  ObjectiveConfig cfg;
  CHECK_NOTHROW(cfg.validate(12, 4));
  cfg.lambda = -1.0;
  CHECK_THROWS(cfg.validate(12, 4));
  cfg = ObjectiveConfig{};
  cfg.delta_tau = 0.0;
  CHECK_THROWS(cfg.validate(12, 4));
  cfg = ObjectiveConfig{};
  cfg.prefix_rows = 13;
  CHECK_THROWS(cfg.validate(12, 4));
  cfg = ObjectiveConfig{};
  cfg.band_split = 12;
  CHECK_THROWS(cfg.validate(12, 4));
  cfg = ObjectiveConfig{};
  cfg.spectral_weights = {1.0, 2.0};
  CHECK_THROWS(cfg.validate(12, 4));
  cfg.spectral_weights.assign(12, 1.0);
  cfg.spectral_weights[3] = -0.5;
  CHECK_THROWS(cfg.validate(12, 4));
}

TEST_CASE("loss_time sums squared error over the prefix only") {
  Mat s(3, 2), t(3, 2);
  s(0, 0) = 1; s(0, 1) = 2;
  s(1, 0) = 3; s(1, 1) = 4;
  s(2, 0) = 100; s(2, 1) = 100;   // outside the prefix, must not count
  t(2, 0) = -100; t(2, 1) = -100;
  CHECK(loss_time(s, t, 2) == doctest::Approx(1 + 4 + 9 + 16).epsilon(1e-15));
  CHECK_THROWS(loss_time(s, t, 0));
  CHECK_THROWS(loss_time(s, t, 4));
  CHECK_THROWS(loss_time(s, Mat(2, 2), 1));
}

TEST_CASE("loss_freq equals the time-domain error for an orthonormal transform") {
  Rng rng(1);
  Mat pred = random_mat(kL, kD, rng), expert = random_mat(kL, kD, rng);
  DctPlan plan(kL);
  CHECK(loss_freq(plan, pred, expert) ==
        doctest::Approx(sum_squares(pred - expert)).epsilon(1e-12));
}

TEST_CASE("builder defaults: prefix and band split") {
  ObjectiveBuilder b(ObjectiveConfig{}, 12, 2, 4);
  CHECK(b.prefix_rows() == 4);
  CHECK(b.band_split() == 3);   // ceil(12 / 4)
  ObjectiveConfig cfg;
  cfg.prefix_rows = 7;
  cfg.band_split = 5;
  ObjectiveBuilder c(cfg, 12, 2, 4);
  CHECK(c.prefix_rows() == 7);
  CHECK(c.band_split() == 5);
}

TEST_CASE("teacher requirements per variant") {
  auto flags = [](ObjectiveVariant v) {
    ObjectiveBuilder b(config_for(v), kL, kD, kH);
    return std::tuple{b.needs_teacher(), b.adjacent_teacher(), b.anchored_teacher()};
  };
  CHECK(flags(ObjectiveVariant::kFmBaseline) == std::tuple{false, false, false});
  CHECK(flags(ObjectiveVariant::kWoFcoLas) == std::tuple{true, true, false});
  CHECK(flags(ObjectiveVariant::kFlowPolicyBaseline) == std::tuple{true, true, false});
  for (auto v : {ObjectiveVariant::kFocal, ObjectiveVariant::kWoLas, ObjectiveVariant::kTimeOnlyFco,
                 ObjectiveVariant::kFreqOnlyFco, ObjectiveVariant::kFixedRLas,
                 ObjectiveVariant::kFcoFullMacro, ObjectiveVariant::kFcoProxFreq,
                 ObjectiveVariant::kWeightedSpectral})
    CHECK(flags(v) == std::tuple{true, false, true});
}

TEST_CASE("composite loss matches hand-computed terms on a single sample") {
  Rng rng(2);
  Mat fs = random_mat(1, kL * kD, rng), vs = random_mat(1, kL * kD, rng);
  Mat ft = random_mat(1, kL * kD, rng), vt = random_mat(1, kL * kD, rng);
  Mat expert = random_mat(1, kL * kD, rng), tv = random_mat(1, kL * kD, rng);

  ObjectiveConfig cfg = config_for(ObjectiveVariant::kFocal);
  ObjectiveBuilder b(cfg, kL, kD, kH);
  BuildResult r = run_build(b, fs, vs, ft, vt, expert, tv);

  DctPlan plan(kL);
  double want_time = loss_time(reshape_row(fs, 0, kL, kD), reshape_row(ft, 0, kL, kD), kH);
  double want_freq = loss_freq(plan, reshape_row(fs, 0, kL, kD), reshape_row(expert, 0, kL, kD));
  CHECK(r.time_value == doctest::Approx(want_time).epsilon(1e-11));
  CHECK(r.freq_value == doctest::Approx(want_freq).epsilon(1e-11));
  CHECK(r.total == doctest::Approx(want_time + cfg.lambda * want_freq).epsilon(1e-11));
}

TEST_CASE("composite loss averages over the batch") {
  Rng rng(3);
  const int n = 4;
  Mat fs = random_mat(n, kL * kD, rng), vs = random_mat(n, kL * kD, rng);
  Mat ft = random_mat(n, kL * kD, rng), vt = random_mat(n, kL * kD, rng);
  Mat expert = random_mat(n, kL * kD, rng), tv = random_mat(n, kL * kD, rng);

  ObjectiveConfig cfg = config_for(ObjectiveVariant::kFocal);
  ObjectiveBuilder b(cfg, kL, kD, kH);
  BuildResult r = run_build(b, fs, vs, ft, vt, expert, tv);

  DctPlan plan(kL);
  double time_sum = 0.0, freq_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    time_sum += loss_time(reshape_row(fs, i, kL, kD), reshape_row(ft, i, kL, kD), kH);
    freq_sum += loss_freq(plan, reshape_row(fs, i, kL, kD), reshape_row(expert, i, kL, kD));
  }
  CHECK(r.time_value == doctest::Approx(time_sum / n).epsilon(1e-11));
  CHECK(r.freq_value == doctest::Approx(freq_sum / n).epsilon(1e-11));
}

TEST_CASE("student equal to teacher with zero lambda gives zero loss") {
  Rng rng(4);
  Mat fs = random_mat(2, kL * kD, rng);
  Mat vs = random_mat(2, kL * kD, rng);
  Mat expert = random_mat(2, kL * kD, rng);
  ObjectiveConfig cfg = config_for(ObjectiveVariant::kFocal);
  cfg.lambda = 0.0;
  ObjectiveBuilder b(cfg, kL, kD, kH);
  BuildResult r = run_build(b, fs, vs, fs, vs, expert, expert);
  CHECK(r.total == 0.0);
  CHECK(r.time_value == 0.0);
}

TEST_CASE("flow-matching baseline regresses the velocity target") {
  Rng rng(5);
  const int n = 3;
  Mat fs = random_mat(n, kL * kD, rng), vs = random_mat(n, kL * kD, rng);
  Mat tv = random_mat(n, kL * kD, rng);
  ObjectiveBuilder b(config_for(ObjectiveVariant::kFmBaseline), kL, kD, kH);
  BuildResult r = run_build(b, fs, vs, Mat(0, 0), Mat(0, 0), Mat(n, kL * kD), tv);
  CHECK(r.total == doctest::Approx(sum_squares(vs - tv) / n).epsilon(1e-12));
}

TEST_CASE("adjacent-time baseline combines map and velocity consistency") {
  Rng rng(6);
  const int n = 2;
  Mat fs = random_mat(n, kL * kD, rng), vs = random_mat(n, kL * kD, rng);
  Mat ft = random_mat(n, kL * kD, rng), vt = random_mat(n, kL * kD, rng);
  ObjectiveConfig cfg = config_for(ObjectiveVariant::kWoFcoLas);
  ObjectiveBuilder b(cfg, kL, kD, kH);
  BuildResult r = run_build(b, fs, vs, ft, vt, Mat(n, kL * kD), Mat(n, kL * kD));
  double cons = sum_squares(fs - ft) / n;
  double vel = sum_squares(vs - vt) / n;
  CHECK(r.time_value == doctest::Approx(cons).epsilon(1e-12));
  CHECK(r.freq_value == doctest::Approx(vel).epsilon(1e-12));
  CHECK(r.total == doctest::Approx(cons + cfg.alpha * vel).epsilon(1e-12));
}

TEST_CASE("frequency-only variant keeps just the scaled structural term") {
  Rng rng(7);
  Mat fs = random_mat(1, kL * kD, rng), vs = random_mat(1, kL * kD, rng);
  Mat ft = random_mat(1, kL * kD, rng), vt = random_mat(1, kL * kD, rng);
  Mat expert = random_mat(1, kL * kD, rng);
  ObjectiveConfig cfg = config_for(ObjectiveVariant::kFreqOnlyFco);
  ObjectiveBuilder b(cfg, kL, kD, kH);
  BuildResult r = run_build(b, fs, vs, ft, vt, expert, expert);
  CHECK(r.time_value == 0.0);
  CHECK(r.total == doctest::Approx(cfg.lambda * r.freq_value).epsilon(1e-12));
}

TEST_CASE("time-only variant replaces the spectral term with a time-domain one") {
  Rng rng(8);
  Mat fs = random_mat(1, kL * kD, rng), vs = random_mat(1, kL * kD, rng);
  Mat ft = random_mat(1, kL * kD, rng), vt = random_mat(1, kL * kD, rng);
  Mat expert = random_mat(1, kL * kD, rng);
  ObjectiveConfig cfg = config_for(ObjectiveVariant::kTimeOnlyFco);
  ObjectiveBuilder b(cfg, kL, kD, kH);
  BuildResult r = run_build(b, fs, vs, ft, vt, expert, expert);
  CHECK(r.freq_value == doctest::Approx(sum_squares(fs - expert)).epsilon(1e-12));
}

TEST_CASE("full-macro variant extends the consistency prefix to every row") {
  Rng rng(9);
  Mat fs = random_mat(1, kL * kD, rng), vs = random_mat(1, kL * kD, rng);
  Mat ft = random_mat(1, kL * kD, rng), vt = random_mat(1, kL * kD, rng);
  Mat expert = random_mat(1, kL * kD, rng);
  ObjectiveBuilder b(config_for(ObjectiveVariant::kFcoFullMacro), kL, kD, kH);
  BuildResult r = run_build(b, fs, vs, ft, vt, expert, expert);
  CHECK(r.time_value == doctest::Approx(sum_squares(fs - ft)).epsilon(1e-12));
}

TEST_CASE("proximal-frequency variant restricts the spectral term to the prefix") {
  Rng rng(10);
  Mat fs = random_mat(1, kL * kD, rng), vs = random_mat(1, kL * kD, rng);
  Mat ft = random_mat(1, kL * kD, rng), vt = random_mat(1, kL * kD, rng);
  Mat expert = random_mat(1, kL * kD, rng);
  ObjectiveBuilder b(config_for(ObjectiveVariant::kFcoProxFreq), kL, kD, kH);
  BuildResult r = run_build(b, fs, vs, ft, vt, expert, expert);
  DctPlan plan(kH);
  Mat fs_head(kH, kD), ex_head(kH, kD);
  for (int i = 0; i < kH; ++i)
    for (int j = 0; j < kD; ++j) {
      fs_head(i, j) = fs(0, i * kD + j);
      ex_head(i, j) = expert(0, i * kD + j);
    }
  CHECK(r.freq_value == doctest::Approx(loss_freq(plan, fs_head, ex_head)).epsilon(1e-11));
}

TEST_CASE("weighted spectral variant applies the half plus weights convention") {
  Rng rng(11);
  Mat fs = random_mat(1, kL * kD, rng), vs = random_mat(1, kL * kD, rng);
  Mat ft = random_mat(1, kL * kD, rng), vt = random_mat(1, kL * kD, rng);
  Mat expert = random_mat(1, kL * kD, rng);
  ObjectiveBuilder b(config_for(ObjectiveVariant::kWeightedSpectral), kL, kD, kH);
  BuildResult r = run_build(b, fs, vs, ft, vt, expert, expert);

  DctPlan plan(kL);
  Mat cs = plan.forward_columns(reshape_row(fs, 0, kL, kD));
  Mat ce = plan.forward_columns(reshape_row(expert, 0, kL, kD));
  double want = 0.0;
  for (int u = 0; u < kL; ++u) {
    double w = std::exp(-2.0 * u / kL);
    for (int j = 0; j < kD; ++j) {
      double dd = w * (cs(u, j) - ce(u, j));
      want += dd * dd;
    }
  }
  CHECK(r.freq_value == doctest::Approx(0.5 * want).epsilon(1e-11));
}

TEST_CASE("band masks zero the excluded coefficients") {
  Rng rng(12);
  Mat fs = random_mat(1, kL * kD, rng), vs = random_mat(1, kL * kD, rng);
  Mat ft = random_mat(1, kL * kD, rng), vt = random_mat(1, kL * kD, rng);
  Mat expert = random_mat(1, kL * kD, rng);

  DctPlan plan(kL);
  Mat cs = plan.forward_columns(reshape_row(fs, 0, kL, kD));
  Mat ce = plan.forward_columns(reshape_row(expert, 0, kL, kD));

  ObjectiveConfig low = config_for(ObjectiveVariant::kFocal);
  low.band_mask = BandMask::kLowOnly;
  ObjectiveBuilder bl(low, kL, kD, kH);
  const int split = bl.band_split();
  double want_low = 0.0, want_high = 0.0;
  for (int u = 0; u < kL; ++u)
    for (int j = 0; j < kD; ++j) {
      double dd = cs(u, j) - ce(u, j);
      (u < split ? want_low : want_high) += dd * dd;
    }
  BuildResult rl = run_build(bl, fs, vs, ft, vt, expert, expert);
  CHECK(rl.freq_value == doctest::Approx(want_low).epsilon(1e-11));

  ObjectiveConfig high = config_for(ObjectiveVariant::kFocal);
  high.band_mask = BandMask::kHighOnly;
  BuildResult rh = run_build(ObjectiveBuilder(high, kL, kD, kH), fs, vs, ft, vt, expert, expert);
  CHECK(rh.freq_value == doctest::Approx(want_high).epsilon(1e-11));
}

TEST_CASE("teacher inputs are stop-gradient by construction") {
  Rng rng(13);
  Mat fs_val = random_mat(1, kL * kD, rng);
  Mat ft = random_mat(1, kL * kD, rng), vt = random_mat(1, kL * kD, rng);
  Mat expert = random_mat(1, kL * kD, rng);

  Tape tape;
  Var fs = tape.leaf(fs_val);
  Var vs = tape.leaf(fs_val);
  ObjectiveBuilder b(config_for(ObjectiveVariant::kFocal), kL, kD, kH);
  BatchTerms terms = b.build(tape, fs, vs, ft, vt, expert, expert);
  tape.backward(terms.total);
  CHECK(max_abs(tape.grad(fs)) > 0.0);
  // The student velocity only enters through f_student here, so its direct
  // gradient stays zero while the map gradient is live.
  CHECK(max_abs(tape.grad(vs)) == 0.0);
}

TEST_CASE("alignment probe reports finite aggregates on a random net") {
  MlpConfig mc;
  mc.state_dim = kL * kD;
  mc.obs_dim = 4;
  mc.hidden = {8};
  mc.time_embed_dim = 4;
  VelocityField net(mc);
  Rng rng(14);
  net.init(rng);
  const int n = 3;
  Mat m_tau = random_mat(n, kL * kD, rng);
  Mat obs = random_mat(n, 4, rng);
  Mat expert = random_mat(n, kL * kD, rng);
  std::vector<double> taus{0.2, 0.5, 0.8};
  GradAlignment ga = grad_alignment_probe(net, net.params(), m_tau, taus, obs, expert, kH, kD);
  CHECK(std::isfinite(ga.inner));
  CHECK(ga.norm_time > 0.0);
  CHECK(ga.norm_freq > 0.0);
  CHECK(ga.cosine >= -1.0 - 1e-12);
  CHECK(ga.cosine <= 1.0 + 1e-12);
  CHECK(ga.cosine == doctest::Approx(ga.inner / (ga.norm_time * ga.norm_freq)).epsilon(1e-12));
  CHECK_THROWS(grad_alignment_probe(net, net.params(), m_tau, taus, obs, expert, 0, kD));
}
