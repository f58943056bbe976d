#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "focalflow/flow.hpp"
#include "focalflow/mat.hpp"
#include "focalflow/network.hpp"
#include "focalflow/sampler.hpp"
#include "focalflow/trajectory.hpp"

namespace focalflow {

// Mean absolute first difference per step and dimension:
// (1 / ((T-1) d)) sum_t sum_j |a_{t+1,j} - a_{t,j}|. Requires T >= 2.
double atv(const Mat& actions);

// Mean l2 norm of the second-order finite difference (jerk proxy). Used only
// comparatively; the score is |TS(expert) - TS(policy)|. Requires T >= 3.
double ts_statistic(const Mat& actions);
double ts_score(const Mat& policy_actions, const Mat& expert_actions);

// Positions via cumulative sums from a shared origin, then per-step euclidean
// distance. Returns one entry per executed step.
std::vector<double> compounding_error(const Mat& policy_actions, const Mat& expert_actions);

// reach / pick-sketch: final position within tolerance of the goal.
// lissajous: mean tracking error against the expert below tolerance.
bool task_success(TaskId task, const RolloutTrace& trace, std::span<const double> goal, double tolerance);

constexpr double kDefaultSuccessTolerance = 0.05;

// Per-episode metrics. ts_score needs at least 3 executed steps and is 0 for
// shorter traces.
struct MetricReport {
  double atv = 0.0;         // policy actions
  double atv_expert = 0.0;  // aligned expert actions
  double ts_score = 0.0;
  double endpoint_error = 0.0;
  std::vector<double> error_curve;  // one entry per executed step
  bool success = false;
  int inference_calls = 0;
  double nfe_per_decision = 0.0;
};

MetricReport evaluate_trace(TaskId task, const RolloutTrace& trace, std::span<const double> goal,
                            double tolerance = kDefaultSuccessTolerance);

struct EvalAggregate {
  int episodes = 0;
  double success_rate = 0.0;
  double endpoint_error_mean = 0.0;
  double atv_mean = 0.0;
  double atv_expert_mean = 0.0;
  double atv_gap = 0.0;  // |atv_mean - atv_expert_mean|
  double ts_score_mean = 0.0;
  double nfe_per_decision = 0.0;
};

EvalAggregate aggregate_reports(const std::vector<MetricReport>& reports);

// CSV emission for the eval command. Columns are documented in the README.
void write_episode_csv(const std::filesystem::path& path, const std::vector<MetricReport>& reports);
void write_summary_csv(const std::filesystem::path& path, const EvalAggregate& agg);
void write_curves_csv(const std::filesystem::path& path, const std::vector<MetricReport>& reports);

struct CurvePoint {
  double s = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

// One Monte Carlo draw in normalized coordinates: a dataset window plus a
// noise trajectory of the same shape.
struct FlowSample {
  Mat m0;                    // L x d gaussian noise
  Mat m1;                    // L x d normalized expert macro
  std::vector<double> obs;   // normalized observation
};

std::vector<FlowSample> draw_flow_samples(const Dataset& ds, int chunk_size, int num_chunks,
                                          int count, Rng& rng);

// Velocity evaluator seam. Rows of `states` follow the order of the sample
// span handed to the estimator, one batched call per grid point, so tests can
// substitute exact-oracle evaluators.
using VelocityEval =
    std::function<Mat(const Mat& states, const std::vector<double>& times, const Mat& obs)>;

// Teacher regression error eps(s) = E || v_teacher(M_s, s, o) - (M1 - M0) ||^2
// estimated per grid point, with the standard error of the estimate. The
// sample set is shared across grid points, which correlates the points and
// sharpens monotonicity comparisons.
std::vector<CurvePoint> teacher_error_eval(const VelocityEval& teacher,
                                           std::span<const FlowSample> samples,
                                           std::span<const double> s_grid);
std::vector<CurvePoint> teacher_error(const VelocityField& net, const MlpParams& teacher,
                                      const Dataset& ds, int chunk_size, int num_chunks,
                                      std::span<const double> s_grid, int samples, Rng& rng);

struct PropagationPoint {
  double tau = 0.0;
  double raw = 0.0;  // -mean ||g_cons - g_sup||^2 with both gradients formed explicitly
  double raw_se = 0.0;
  double simplified = 0.0;  // -4 mean ||u* - v_teacher(M_r, r, o)||^2
  double simplified_se = 0.0;
};

// One grid point. The raw form evaluates the student at tau and subtracts the
// two prediction-space gradients 2(v_s - v_t) and 2(v_s - u*); the student
// term cancels algebraically, so with independent sample streams the raw and
// simplified columns agree up to Monte Carlo error and are flat across tau.
PropagationPoint propagation_point_eval(const VelocityEval& student, const VelocityEval& teacher,
                                        double tau, std::span<const FlowSample> raw_samples,
                                        std::span<const double> raw_anchors,
                                        std::span<const FlowSample> simp_samples,
                                        std::span<const double> simp_anchors);

// Propagation efficiency per student time tau, fresh draws per point.
std::vector<PropagationPoint> propagation_efficiency(const VelocityField& net, const MlpParams& live,
                                                     const MlpParams& teacher, const Dataset& ds,
                                                     const AnchorConfig& anchor, int chunk_size,
                                                     int num_chunks, std::span<const double> tau_grid,
                                                     int samples, Rng& rng);

void write_propagation_csv(const std::filesystem::path& path, const std::vector<PropagationPoint>& points);
void write_teacher_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& curve);

}  // namespace focalflow
