#ifndef SMARTDM_SIMULATION_HPP
#define SMARTDM_SIMULATION_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "smartdm/glm.hpp"
#include "smartdm/types.hpp"

namespace smartdm {

struct SimulationPlan {
  std::vector<CandidateModel> models;
  ProposedDesign design;
  Index n_reps = 1000;
  std::uint64_t seed = 0;
  double sigma = 1.0;
};

// Replicate-level outputs, one entry per model, each of length n_reps.
// Replicate r of model i always sees the same noise regardless of thread
// count or execution order.
struct RawEstimates {
  std::vector<Vector> contrast_estimate;  // c_Z^T gamma_hat
  std::vector<Vector> sigma_sq;           // residual variance estimates
  std::vector<Vector> t_value;
};

RawEstimates simulate_fits(const SimulationPlan& plan);

struct ModelPerformance {
  Index index = 0;
  double c_b = 0.0;
  double v_b = 0.0;
  double cv_delta = 0.0;
  double expected_t = 0.0;
  double mc_mean = 0.0;
  double mc_sd = 0.0;
  double mc_se = 0.0;
  bool has_mc = false;
};

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

struct PerformanceReport {
  std::vector<ModelPerformance> per_model;
  std::vector<RocPoint> roc;
};

struct McOptions {
  Index n_reps = 1000;
  std::uint64_t seed = 0;
};

// Analytic measures per model, with Monte-Carlo columns when requested.
PerformanceReport performance_curves(const ProposedDesign& design,
                                     const std::vector<CandidateModel>& models,
                                     const std::optional<McOptions>& mc = {});

// T-threshold decision rule: tpr(t) is the fraction of signal replicates at
// or above t, fpr(t) the same under the null model.
std::vector<RocPoint> roc_curve(const ProposedDesign& design,
                                const CandidateModel& signal_model,
                                const CandidateModel& null_model,
                                const std::vector<double>& thresholds,
                                Index n_reps, std::uint64_t seed);

struct DerivativeComparisonRow {
  Index index = 0;
  double truth = 0.0;
  double optimal_mean = 0.0;
  double optimal_se = 0.0;
  double derivative_mean = 0.0;
  double derivative_se = 0.0;
};

// Head-to-head bias comparison of an optimized design against the
// temporal-derivative design across the same models.
std::vector<DerivativeComparisonRow> derivative_baseline(
    const std::vector<CandidateModel>& models, const ProposedDesign& optimal,
    const ProposedDesign& derivative, Index n_reps, std::uint64_t seed);

struct SummaryStats {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
};

// Compensated mean/sd so results match across thread counts.
SummaryStats summarize(const Vector& values);

// Worker cap: SMARTDM_THREADS when set, hardware concurrency otherwise.
int simulation_thread_count();

}  // namespace smartdm

#endif
