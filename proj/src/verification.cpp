#include "focalflow/verification.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "focalflow/autodiff.hpp"
#include "focalflow/errors.hpp"
#include "focalflow/network.hpp"
#include "focalflow/objectives.hpp"
#include "focalflow/rng.hpp"
#include "focalflow/sampler.hpp"
#include "json.hpp"

namespace focalflow {

namespace {

// Collects the first failure; later asserts are skipped so the report stays
// focused on the root cause.
struct Checker {
  std::ostringstream log;
  bool ok = true;
  std::string first_failure;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      first_failure = what;
    }
  }
};

CheckResult finish(const std::string& name, uint64_t seed, Checker& c) {
  CheckResult r;
  r.name = name;
  r.seed = seed;
  r.pass = c.ok;
  r.detail = c.ok ? c.log.str() : c.first_failure;
  return r;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(12);
  s << x;
  return s.str();
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct MeanSe {
  double mean = 0.0, se = 0.0;
};

MeanSe mean_se(std::span<const double> xs) {
  MeanSe out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) {
    double d = x - out.mean;
    ss += d * d;
  }
  if (xs.size() > 1)
    out.se = std::sqrt(ss / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
  return out;
}

}  // namespace

TransformFactory orthonormal_dct_factory() {
  return [](int length) {
    auto plan = std::make_shared<DctPlan>(length);
    return [plan](std::span<const double> x) { return plan->forward(x); };
  };
}

CheckResult check_parseval(uint64_t seed, int trials, const std::vector<int>& lengths,
                           const TransformFactory& factory) {
  Rng rng(seed);
  Checker c;
  double max_rel = 0.0;
  for (int L : lengths) {
    auto fwd = factory(L);

    std::vector<double> zero(L, 0.0);
    std::vector<double> cz = fwd(zero);
    c.expect(dot(cz, cz) == 0.0, "L=" + std::to_string(L) + ": zero vector maps to nonzero energy");

    if (L == 2) {
      std::vector<double> ones{1.0, 1.0};
      std::vector<double> co = fwd(ones);
      c.expect(std::abs(co[0] - std::sqrt(2.0)) <= 1e-12 && std::abs(co[1]) <= 1e-12,
               "L=2: (1,1) should map to (sqrt(2), 0), got (" + fmt(co[0]) + ", " + fmt(co[1]) + ")");
    }

    for (int t = 0; t < trials; ++t) {
      std::vector<double> x(L);
      for (double& v : x) v = rng.normal();
      std::vector<double> cx = fwd(x);
      double et = dot(x, x), ef = dot(cx, cx);
      double rel = std::abs(et - ef) / std::max(et, 1e-300);
      max_rel = std::max(max_rel, rel);
      c.expect(rel <= 1e-10, "L=" + std::to_string(L) + " trial " + std::to_string(t) +
                                 ": energy mismatch rel=" + fmt(rel));
      if (!c.ok) break;
    }
    if (!c.ok) break;
  }
  c.log << "lengths=" << lengths.size() << " trials=" << trials << " max_rel=" << fmt(max_rel);
  return finish("parseval", seed, c);
}

namespace {

// Gradients of the prefix and full squared losses with respect to the
// prediction leaf, pulled off two tapes sharing the same values.
std::pair<std::vector<double>, std::vector<double>> prediction_grads(const Mat& pred, const Mat& target,
                                                                     int prefix) {
  Tape t1;
  Var f1 = t1.leaf(pred);
  Var d1 = t1.sub(f1, t1.constant(target));
  t1.backward(t1.sumsq(t1.slice_cols(d1, 0, prefix)));
  Tape t2;
  Var f2 = t2.leaf(pred);
  Var d2 = t2.sub(f2, t2.constant(target));
  t2.backward(t2.sumsq(d2));
  return {t1.grad(f1).v, t2.grad(f2).v};
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double na = std::sqrt(dot(a, a)), nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

}  // namespace

CheckResult check_prediction_cosine(uint64_t seed, int trials) {
  Rng rng(seed);
  Checker c;

  {
    // e = (3, 0, 4), prefix 1: ||Pe|| / ||e|| = 3 / 5.
    Mat target(1, 3), pred(1, 3);
    pred(0, 0) = 3.0;
    pred(0, 2) = 4.0;
    auto [gp, gf] = prediction_grads(pred, target, 1);
    double cos = cosine(gp, gf);
    c.expect(std::abs(cos - 0.6) <= 1e-12, "hand case (3,0,4), prefix 1: cosine " + fmt(cos) + " != 0.6");
  }

  double min_cos = 1.0;
  for (int t = 0; t < trials && c.ok; ++t) {
    int L = 1 + static_cast<int>(rng.below(32));
    int H = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(L)));
    Mat target(1, L), pred(1, L);
    for (int j = 0; j < L; ++j) pred(0, j) = rng.normal();
    auto [gp, gf] = prediction_grads(pred, target, H);
    double pe2 = 0.0, e2 = 0.0;
    for (int j = 0; j < L; ++j) {
      e2 += pred(0, j) * pred(0, j);
      if (j < H) pe2 += pred(0, j) * pred(0, j);
    }
    double analytic = std::sqrt(pe2) / std::sqrt(e2);
    double cos = cosine(gp, gf);
    c.expect(std::abs(cos - analytic) <= 1e-12, "trial " + std::to_string(t) + ": cosine " + fmt(cos) +
                                                    " vs analytic " + fmt(analytic));
    if (pe2 > 0.0) c.expect(cos > 0.0, "trial " + std::to_string(t) + ": nonpositive cosine with Pe != 0");
    if (H == L)
      c.expect(std::abs(cos - 1.0) <= 1e-12, "trial " + std::to_string(t) + ": full prefix cosine != 1");
    min_cos = std::min(min_cos, cos);
  }

  {
    // Zero prefix: the proposition's premise Pe != 0 fails; cosine degenerates
    // to 0. Reported, not asserted positive.
    Mat target(1, 4), pred(1, 4);
    pred(0, 3) = 1.0;
    auto [gp, gf] = prediction_grads(pred, target, 2);
    c.log << "zero-prefix boundary cosine=" << fmt(cosine(gp, gf)) << " ";
  }

  c.log << "trials=" << trials << " min_cosine=" << fmt(min_cos);
  return finish("prediction_cosine", seed, c);
}

CheckResult check_spectral_gain(uint64_t seed, const std::vector<int>& lengths) {
  Rng rng(seed);
  Checker c;
  for (int L : lengths) {
    DctPlan plan(L);
    double mag = rng.uniform(0.5, 2.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    Mat target(1, L), pred(1, L);
    for (int j = 0; j < L; ++j) pred(0, j) = mag;

    Tape tt;
    Var ft = tt.leaf(pred);
    tt.backward(tt.sumsq(tt.sub(ft, tt.constant(target))));
    double gt = max_abs(tt.grad(ft));

    std::vector<double> chat = plan.forward(std::span<const double>(pred.v));
    Mat coeff_pred(1, L), coeff_target(1, L);
    coeff_pred.v = chat;
    Tape tc;
    Var fc = tc.leaf(coeff_pred);
    tc.backward(tc.sumsq(tc.sub(fc, tc.constant(coeff_target))));
    double gc = max_abs(tc.grad(fc));

    double gain = gc / gt;
    c.expect(std::abs(gain - std::sqrt(static_cast<double>(L))) <= 1e-9,
             "L=" + std::to_string(L) + ": gain " + fmt(gain) + " != sqrt(L) " +
                 fmt(std::sqrt(static_cast<double>(L))));
    c.log << "L=" << L << " gain=" << fmt(gain) << " ";
  }
  return finish("spectral_gain", seed, c);
}

CheckResult check_weighted_gradient(uint64_t seed, int trials) {
  Rng rng(seed);
  Checker c;

  {
    // Hand case: L=2, e=(1,2), w=(1, 1/2). D^T W^2 D e = (1.375, 1.625).
    DctPlan plan(2);
    std::vector<double> e{1.0, 2.0};
    std::vector<double> w2{1.0, 0.25};
    std::vector<double> de = plan.forward(e);
    for (int k = 0; k < 2; ++k) de[k] *= w2[k];
    std::vector<double> g = plan.inverse(de);
    c.expect(std::abs(g[0] - 1.375) <= 1e-12 && std::abs(g[1] - 1.625) <= 1e-12,
             "hand case: got (" + fmt(g[0]) + ", " + fmt(g[1]) + "), expected (1.375, 1.625)");
  }

  double max_err = 0.0;
  int lowpass_checked = 0;
  for (int t = 0; t < trials && c.ok; ++t) {
    int L = 2 + static_cast<int>(rng.below(31));
    DctPlan plan(L);
    Mat target(1, L), pred(1, L);
    for (int j = 0; j < L; ++j) pred(0, j) = rng.normal();
    std::vector<double> w(L);
    for (double& x : w) x = rng.uniform(0.1, 2.0);

    Tape tape;
    Var f = tape.leaf(pred);
    Var diff = tape.sub(f, tape.constant(target));
    Var coeffs = tape.dct_cols(diff, plan, 1);
    Var weighted = tape.col_scale(coeffs, w);
    tape.backward(tape.scale(tape.sumsq(weighted), 0.5));
    const Mat& g_tape = tape.grad(f);

    std::vector<double> de = plan.forward(std::span<const double>(pred.v));
    std::vector<double> w2de(L);
    for (int k = 0; k < L; ++k) w2de[k] = w[k] * w[k] * de[k];
    std::vector<double> g_ref = plan.inverse(w2de);

    for (int j = 0; j < L; ++j) {
      double err = std::abs(g_tape(0, j) - g_ref[j]);
      max_err = std::max(max_err, err);
      c.expect(err <= 1e-9, "trial " + std::to_string(t) + ": tape gradient deviates from D^T W^2 D e by " +
                                fmt(err));
      if (!c.ok) break;
    }

    // Low-pass attenuation: spectral energy fraction in the top half of the
    // gradient spectrum must drop strictly against identity weights.
    int half = L / 2;
    double hi_id = 0.0, tot_id = 0.0, hi_lp = 0.0, tot_lp = 0.0;
    for (int k = 0; k < L; ++k) {
      double wl = std::exp(-2.0 * k / L);
      double a_id = de[k];
      double a_lp = wl * wl * de[k];
      tot_id += a_id * a_id;
      tot_lp += a_lp * a_lp;
      if (k >= half) {
        hi_id += a_id * a_id;
        hi_lp += a_lp * a_lp;
      }
    }
    if (hi_id > 0.0 && tot_lp > 0.0) {
      ++lowpass_checked;
      c.expect(hi_lp / tot_lp < hi_id / tot_id,
               "trial " + std::to_string(t) + ": low-pass weights failed to attenuate the top half");
    }
  }

  {
    // W = I: the gradient of 0.5 ||D e||^2 collapses to e itself.
    int L = 7;
    DctPlan plan(L);
    Rng r2(seed ^ 0x5eedULL);
    std::vector<double> e(L);
    for (double& x : e) x = r2.normal();
    std::vector<double> g = plan.inverse(plan.forward(e));
    for (int j = 0; j < L; ++j)
      c.expect(std::abs(g[j] - e[j]) <= 1e-12, "identity weights: round trip deviates at " + std::to_string(j));
  }

  c.log << "trials=" << trials << " max_abs_err=" << fmt(max_err) << " lowpass_trials=" << lowpass_checked;
  return finish("weighted_gradient", seed, c);
}

CheckResult check_fsd_ordering(uint64_t seed, int samples) {
  Checker c;
  AnchorConfig las;  // logit-normal(4.0, 1.6)
  AnchorConfig unif;
  unif.kind = AnchorKind::kUniform;

  Rng las_rng = Rng(seed).derive("las");
  Rng unif_rng = Rng(seed).derive("unif");
  std::vector<double> rl(samples), ru(samples);
  for (int i = 0; i < samples; ++i) rl[i] = sample_anchor(las, las_rng);
  for (int i = 0; i < samples; ++i) ru[i] = sample_anchor(unif, unif_rng);

  std::vector<double> sorted = rl;
  std::sort(sorted.begin(), sorted.end());
  double median = 0.5 * (sorted[samples / 2 - 1] + sorted[samples / 2]);
  c.expect(median >= 0.975 && median <= 0.989, "anchor median " + fmt(median) + " outside [0.975, 0.989]");

  double mass_hi = 0.0;
  for (double r : rl) mass_hi += r >= 0.5 ? 1.0 : 0.0;
  mass_hi /= samples;
  c.expect(mass_hi >= 0.93, "anchor mass above 0.5 is " + fmt(mass_hi) + ", expected >= 0.93");

  // Empirical CDF comparison on the 100-point grid t = j / 100.
  std::vector<double> su = ru;
  std::sort(su.begin(), su.end());
  for (int j = 1; j <= 100 && c.ok; ++j) {
    double t = j / 100.0;
    auto fl = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    auto fu = std::upper_bound(su.begin(), su.end(), t) - su.begin();
    c.expect(fl <= fu, "dominance fails at t=" + fmt(t) + ": F_anchor=" + fmt(double(fl) / samples) +
                           " > F_uniform=" + fmt(double(fu) / samples));
  }

  // Synthetic strictly decreasing teacher error eps(s) = (1-s)^2. Closed form
  // under uniform sampling: 1/3.
  std::vector<double> el(samples), eu(samples);
  for (int i = 0; i < samples; ++i) el[i] = (1.0 - rl[i]) * (1.0 - rl[i]);
  for (int i = 0; i < samples; ++i) eu[i] = (1.0 - ru[i]) * (1.0 - ru[i]);
  MeanSe ml = mean_se(el), mu = mean_se(eu);
  c.expect(std::abs(mu.mean - 1.0 / 3.0) <= 3.0 * mu.se,
           "uniform E[(1-s)^2] = " + fmt(mu.mean) + " not within 3 SE of 1/3");
  double gap = mu.mean - ml.mean;
  double joint_se = std::sqrt(mu.se * mu.se + ml.se * ml.se);
  c.expect(gap >= 5.0 * joint_se, "E_uniform - E_anchored = " + fmt(gap) + " below 5 joint SE " +
                                      fmt(5.0 * joint_se));

  // Constant eps: both Monte Carlo sums add the same constant the same number
  // of times, so the means match exactly.
  double const_l = 0.0, const_u = 0.0;
  for (int i = 0; i < samples; ++i) const_l += 0.7;
  for (int i = 0; i < samples; ++i) const_u += 0.7;
  c.expect(std::abs(const_l - const_u) <= 1e-15, "constant eps expectations diverged");

  c.log << "median=" << fmt(median) << " mass_hi=" << fmt(mass_hi) << " E_anchored=" << fmt(ml.mean)
        << " E_uniform=" << fmt(mu.mean) << " gap_in_se=" << fmt(joint_se > 0 ? gap / joint_se : 0.0);
  return finish("fsd_ordering", seed, c);
}

namespace {

struct FdScenario {
  MlpConfig mc;
  MlpParams live;
  MlpParams teacher_params;
  Mat m0, m1, m_tau, obs;
  std::vector<double> taus, anchors;
  int chunk_size = 2, num_chunks = 3, action_dim = 2;
};

FdScenario make_fd_scenario(Rng& rng) {
  FdScenario sc;
  sc.mc.state_dim = sc.chunk_size * sc.num_chunks * sc.action_dim;  // L = 6, d = 2
  sc.mc.obs_dim = 4;
  sc.mc.hidden = {8, 8};
  sc.mc.time_embed_dim = 8;
  Rng init = rng.derive("init");
  sc.live = init_params(sc.mc, init);
  Rng tinit = rng.derive("teacher");
  sc.teacher_params = init_params(sc.mc, tinit);

  const int n = 3, ld = sc.mc.state_dim;
  sc.m0 = Mat(n, ld);
  sc.m1 = Mat(n, ld);
  sc.m_tau = Mat(n, ld);
  sc.obs = Mat(n, sc.mc.obs_dim);
  sc.taus.resize(n);
  sc.anchors.resize(n);
  for (double& x : sc.m0.v) x = rng.normal();
  for (double& x : sc.m1.v) x = rng.normal();
  for (double& x : sc.obs.v) x = rng.normal();
  for (int i = 0; i < n; ++i) {
    sc.taus[i] = rng.uniform(0.05, 0.9);
    sc.anchors[i] = rng.uniform(0.05, 0.95);
    for (int k = 0; k < ld; ++k) sc.m_tau(i, k) = (1.0 - sc.taus[i]) * sc.m0(i, k) + sc.taus[i] * sc.m1(i, k);
  }
  return sc;
}

// Total loss for one variant as a pure function of the flat live parameters.
double variant_loss(const FdScenario& sc, const ObjectiveConfig& ocfg, const std::vector<double>& flat) {
  VelocityField net(sc.mc);
  net.params() = sc.live;
  net.params().unflatten(flat);
  ObjectiveBuilder builder(ocfg, sc.chunk_size * sc.num_chunks, sc.action_dim, sc.chunk_size);

  const int n = sc.m0.rows, ld = sc.m0.cols;
  Mat v_teacher(0, 0), f_teacher(0, 0);
  if (builder.needs_teacher()) {
    std::vector<double> r = sc.anchors;
    if (builder.adjacent_teacher())
      for (int i = 0; i < n; ++i) r[i] = std::min(sc.taus[i] + ocfg.delta_tau, 1.0);
    Mat m_r(n, ld);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < ld; ++k) m_r(i, k) = (1.0 - r[i]) * sc.m0(i, k) + r[i] * sc.m1(i, k);
    v_teacher = net.forward(sc.teacher_params, m_r, r, sc.obs);
    f_teacher = m_r;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < ld; ++k) f_teacher(i, k) += (1.0 - r[i]) * v_teacher(i, k);
  }

  Tape tape;
  BoundMlp bound = bind_params(tape, net.params());
  Var input = tape.constant(assemble_input(sc.mc, sc.m_tau, sc.taus, sc.obs));
  Var v_student = mlp_forward_on_tape(tape, sc.mc, bound, input);
  std::vector<double> resid(n);
  for (int i = 0; i < n; ++i) resid[i] = 1.0 - sc.taus[i];
  Var f_student = tape.add(tape.constant(sc.m_tau), tape.row_scale(v_student, resid));
  BatchTerms terms = builder.build(tape, f_student, v_student, f_teacher, v_teacher, sc.m1, sc.m1 - sc.m0);
  return tape.scalar(terms.total);
}

std::vector<double> variant_grad(const FdScenario& sc, const ObjectiveConfig& ocfg,
                                 const std::vector<double>& flat) {
  VelocityField net(sc.mc);
  net.params() = sc.live;
  net.params().unflatten(flat);
  ObjectiveBuilder builder(ocfg, sc.chunk_size * sc.num_chunks, sc.action_dim, sc.chunk_size);

  const int n = sc.m0.rows, ld = sc.m0.cols;
  Mat v_teacher(0, 0), f_teacher(0, 0);
  if (builder.needs_teacher()) {
    std::vector<double> r = sc.anchors;
    if (builder.adjacent_teacher())
      for (int i = 0; i < n; ++i) r[i] = std::min(sc.taus[i] + ocfg.delta_tau, 1.0);
    Mat m_r(n, ld);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < ld; ++k) m_r(i, k) = (1.0 - r[i]) * sc.m0(i, k) + r[i] * sc.m1(i, k);
    v_teacher = net.forward(sc.teacher_params, m_r, r, sc.obs);
    f_teacher = m_r;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < ld; ++k) f_teacher(i, k) += (1.0 - r[i]) * v_teacher(i, k);
  }

  Tape tape;
  BoundMlp bound = bind_params(tape, net.params());
  Var input = tape.constant(assemble_input(sc.mc, sc.m_tau, sc.taus, sc.obs));
  Var v_student = mlp_forward_on_tape(tape, sc.mc, bound, input);
  std::vector<double> resid(n);
  for (int i = 0; i < n; ++i) resid[i] = 1.0 - sc.taus[i];
  Var f_student = tape.add(tape.constant(sc.m_tau), tape.row_scale(v_student, resid));
  BatchTerms terms = builder.build(tape, f_student, v_student, f_teacher, v_teacher, sc.m1, sc.m1 - sc.m0);
  tape.backward(terms.total);
  return collect_gradient(tape, bound);
}

}  // namespace

CheckResult check_gradients_fd(uint64_t seed, int min_params) {
  Rng rng(seed);
  Checker c;
  FdScenario sc = make_fd_scenario(rng);
  std::vector<double> flat = sc.live.flatten();

  struct Case {
    std::string label;
    ObjectiveConfig cfg;
  };
  std::vector<Case> cases;
  for (const char* name :
       {"focal", "wo_las", "wo_fco_las", "time_only_fco", "freq_only_fco", "fixed_r_las", "fco_full_macro",
        "fco_prox_freq", "fm_baseline", "flowpolicy_baseline", "weighted_spectral"}) {
    ObjectiveConfig ocfg;
    ocfg.variant = variant_from_string(name);
    // A large structural weight keeps the spectral branch well above the
    // finite-difference noise floor.
    ocfg.lambda = 0.35;
    cases.push_back({name, ocfg});
  }
  for (const char* mask : {"low_only", "high_only"}) {
    ObjectiveConfig ocfg;
    ocfg.lambda = 0.35;
    ocfg.band_mask = band_mask_from_string(mask);
    cases.push_back({std::string("focal/") + mask, ocfg});
  }

  double worst_rel = 0.0;
  for (const Case& cs : cases) {
    if (!c.ok) break;
    std::vector<double> g = variant_grad(sc, cs.cfg, flat);
    double gmax = 0.0;
    for (double x : g) gmax = std::max(gmax, std::abs(x));
    c.expect(gmax > 0.0, cs.label + ": gradient identically zero");
    if (!c.ok) break;

    // Central differences resolve |g| down to roughly 1e-9 absolute here, so
    // restrict the 1e-5 relative comparison to coordinates safely above that.
    double floor = std::max(1e-3 * gmax, 1e-6);
    std::vector<int> eligible;
    for (size_t i = 0; i < g.size(); ++i)
      if (std::abs(g[i]) >= floor) eligible.push_back(static_cast<int>(i));
    c.expect(static_cast<int>(eligible.size()) >= min_params,
             cs.label + ": only " + std::to_string(eligible.size()) + " parameters above the FD floor");
    if (!c.ok) break;

    Rng pick = rng.derive(cs.label);
    for (int k = 0; k < min_params; ++k) {
      int idx = eligible[pick.below(eligible.size())];
      double delta = 1e-5 * std::max(1.0, std::abs(flat[idx]));
      std::vector<double> up = flat, dn = flat;
      up[idx] += delta;
      dn[idx] -= delta;
      double fd = (variant_loss(sc, cs.cfg, up) - variant_loss(sc, cs.cfg, dn)) / (2.0 * delta);
      double rel = std::abs(g[idx] - fd) / std::max({std::abs(g[idx]), std::abs(fd), 1e-8});
      worst_rel = std::max(worst_rel, rel);
      c.expect(rel < 1e-5, cs.label + " param " + std::to_string(idx) + ": analytic " + fmt(g[idx]) +
                               " vs fd " + fmt(fd) + " rel " + fmt(rel));
      if (!c.ok) break;
    }
  }

  c.log << "cases=" << cases.size() << " params_per_case=" << min_params << " worst_rel=" << fmt(worst_rel);
  return finish("gradients_fd", seed, c);
}

CheckResult check_param_alignment(uint64_t seed, int batches) {
  Rng rng(seed);
  Checker c;
  FdScenario sc = make_fd_scenario(rng);
  VelocityField net(sc.mc);
  net.params() = sc.live;

  int positive = 0;
  int counted = 0;
  for (int b = 0; b < batches; ++b) {
    FdScenario batch = make_fd_scenario(rng);
    GradAlignment ga = grad_alignment_probe(net, net.params(), batch.m_tau, batch.taus, batch.obs, batch.m1,
                                            sc.chunk_size, sc.action_dim);
    if (std::isfinite(ga.cosine)) {
      ++counted;
      if (ga.inner > 0.0) ++positive;
    }
  }
  // Measured, not asserted: the sign rests on an assumption about how the
  // time and frequency errors couple, which random data need not satisfy.
  c.log << "positive_fraction=" << (counted > 0 ? fmt(double(positive) / counted) : "n/a")
        << " batches=" << counted;
  return finish("param_alignment", seed, c);
}

std::vector<std::string> check_names() {
  return {"parseval",     "prediction_cosine", "spectral_gain",  "weighted_gradient",
          "fsd_ordering", "gradients_fd",      "param_alignment"};
}

std::vector<CheckResult> run_all_checks(uint64_t seed, const std::vector<std::string>& only) {
  std::vector<std::string> names = check_names();
  for (const std::string& o : only)
    if (std::find(names.begin(), names.end(), o) == names.end()) {
      std::string valid;
      for (const std::string& n : names) valid += (valid.empty() ? "" : ", ") + n;
      throw ConfigError("unknown check '" + o + "'; valid names: " + valid);
    }
  auto wanted = [&](const std::string& n) {
    return only.empty() || std::find(only.begin(), only.end(), n) != only.end();
  };

  Rng root(seed);
  std::vector<CheckResult> out;
  if (wanted("parseval"))
    out.push_back(check_parseval(root.derive("parseval").state(), 100, {2, 12, 36, 256}));
  if (wanted("prediction_cosine"))
    out.push_back(check_prediction_cosine(root.derive("prediction_cosine").state(), 1000));
  if (wanted("spectral_gain"))
    out.push_back(check_spectral_gain(root.derive("spectral_gain").state(), {1, 16, 144}));
  if (wanted("weighted_gradient"))
    out.push_back(check_weighted_gradient(root.derive("weighted_gradient").state(), 100));
  if (wanted("fsd_ordering")) out.push_back(check_fsd_ordering(root.derive("fsd_ordering").state(), 50000));
  if (wanted("gradients_fd")) out.push_back(check_gradients_fd(root.derive("gradients_fd").state(), 50));
  if (wanted("param_alignment"))
    out.push_back(check_param_alignment(root.derive("param_alignment").state(), 20));
  return out;
}

void write_check_report(const std::filesystem::path& path, const std::vector<CheckResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  bool all = true;
  for (const CheckResult& r : results) {
    arr.push_back({{"name", r.name}, {"pass", r.pass}, {"seed", r.seed}, {"detail", r.detail}});
    all = all && r.pass;
  }
  nlohmann::json j{{"checks", arr}, {"all_pass", all}};
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write report: " + path.string());
  f << j.dump(1) << '\n';
}

}  // namespace focalflow
