#include "smartdm/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "smartdm/rng.hpp"

namespace smartdm {

int simulation_thread_count() {
  if (const char* env = std::getenv("SMARTDM_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

SummaryStats summarize(const Vector& values) {
  SummaryStats out;
  const Index n = values.size();
  if (n == 0) return out;
  double sum = 0.0, comp = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double y = values(i) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  out.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double sq = 0.0, sq_comp = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double dev = values(i) - out.mean;
      const double y = dev * dev - sq_comp;
      const double t = sq + y;
      sq_comp = (t - sq) - y;
      sq = t;
    }
    out.sd = std::sqrt(sq / static_cast<double>(n - 1));
    out.se = out.sd / std::sqrt(static_cast<double>(n));
  }
  return out;
}

RawEstimates simulate_fits(const SimulationPlan& plan) {
  if (plan.n_reps < 1) throw InvalidArgument("need at least one replicate");
  const Index m = static_cast<Index>(plan.models.size());
  for (const auto& model : plan.models) {
    if (model.X.rows() != plan.design.Z.rows()) {
      throw DimensionMismatch("model rows do not match the design");
    }
  }

  const GlmSolver solver(plan.design.Z);
  const Vector& contrast = plan.design.contrast();
  const double contrast_var = contrast.dot(solver.gram_inverse() * contrast);

  RawEstimates out;
  out.contrast_estimate.assign(static_cast<size_t>(m), Vector(plan.n_reps));
  out.sigma_sq.assign(static_cast<size_t>(m), Vector(plan.n_reps));
  out.t_value.assign(static_cast<size_t>(m), Vector(plan.n_reps));

  const Index n = plan.design.Z.rows();
  auto run_cell = [&](Index model_idx, Index rep) {
    const auto& model = plan.models[static_cast<size_t>(model_idx)];
    KeyedRng rng(plan.seed, static_cast<std::uint64_t>(model_idx),
                 static_cast<std::uint64_t>(rep));
    Vector y = model.X * model.snr;
    for (Index t = 0; t < n; ++t) y(t) += plan.sigma * rng.next_normal();
    const GlmFit fit = solver.fit(y);
    const double estimate = contrast.dot(fit.gamma_hat);
    out.contrast_estimate[static_cast<size_t>(model_idx)](rep) = estimate;
    out.sigma_sq[static_cast<size_t>(model_idx)](rep) = fit.sigma1_sq_hat;
    out.t_value[static_cast<size_t>(model_idx)](rep) =
        estimate / std::sqrt(fit.sigma1_sq_hat * contrast_var);
  };

  const Index total = m * plan.n_reps;
  const int workers = std::min<int>(simulation_thread_count(),
                                    static_cast<int>(total));
  if (workers <= 1) {
    for (Index i = 0; i < m; ++i) {
      for (Index r = 0; r < plan.n_reps; ++r) run_cell(i, r);
    }
  } else {
    std::atomic<Index> cursor{0};
    auto worker = [&]() {
      constexpr Index chunk = 64;
      for (;;) {
        const Index begin = cursor.fetch_add(chunk);
        if (begin >= total) break;
        const Index end = std::min(begin + chunk, total);
        for (Index cell = begin; cell < end; ++cell) {
          run_cell(cell / plan.n_reps, cell % plan.n_reps);
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

PerformanceReport performance_curves(const ProposedDesign& design,
                                     const std::vector<CandidateModel>& models,
                                     const std::optional<McOptions>& mc) {
  PerformanceReport report;
  report.per_model.reserve(models.size());
  const Vector& contrast = design.contrast();
  for (size_t i = 0; i < models.size(); ++i) {
    const auto& model = models[i];
    ModelPerformance row;
    row.index = static_cast<Index>(i + 1);
    row.c_b = contrast_bias(design.Z, contrast, model);
    row.v_b = model_variance_bias(design.Z, model);
    row.cv_delta = contrast_variance_change(design.Z, contrast, model);
    row.expected_t = expected_t(design.Z, contrast, model);
    report.per_model.push_back(row);
  }
  if (mc) {
    SimulationPlan plan;
    plan.models = models;
    plan.design = design;
    plan.n_reps = mc->n_reps;
    plan.seed = mc->seed;
    const RawEstimates raw = simulate_fits(plan);
    for (size_t i = 0; i < models.size(); ++i) {
      const SummaryStats stats = summarize(raw.contrast_estimate[i]);
      report.per_model[i].mc_mean = stats.mean;
      report.per_model[i].mc_sd = stats.sd;
      report.per_model[i].mc_se = stats.se;
      report.per_model[i].has_mc = true;
    }
  }
  return report;
}

std::vector<RocPoint> roc_curve(const ProposedDesign& design,
                                const CandidateModel& signal_model,
                                const CandidateModel& null_model,
                                const std::vector<double>& thresholds,
                                Index n_reps, std::uint64_t seed) {
  SimulationPlan plan;
  plan.models = {signal_model, null_model};
  plan.design = design;
  plan.n_reps = n_reps;
  plan.seed = seed;
  const RawEstimates raw = simulate_fits(plan);

  const Vector& t_signal = raw.t_value[0];
  const Vector& t_null = raw.t_value[1];
  auto fraction_at_or_above = [n_reps](const Vector& values, double cut) {
    Index count = 0;
    for (Index r = 0; r < values.size(); ++r) {
      if (values(r) >= cut) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(n_reps);
  };

  std::vector<RocPoint> out;
  out.reserve(thresholds.size());
  for (double cut : thresholds) {
    out.push_back({cut, fraction_at_or_above(t_null, cut),
                   fraction_at_or_above(t_signal, cut)});
  }
  return out;
}

std::vector<DerivativeComparisonRow> derivative_baseline(
    const std::vector<CandidateModel>& models, const ProposedDesign& optimal,
    const ProposedDesign& derivative, Index n_reps, std::uint64_t seed) {
  SimulationPlan plan;
  plan.models = models;
  plan.n_reps = n_reps;
  plan.seed = seed;

  plan.design = optimal;
  const RawEstimates opt_raw = simulate_fits(plan);
  plan.design = derivative;
  const RawEstimates der_raw = simulate_fits(plan);

  std::vector<DerivativeComparisonRow> out;
  out.reserve(models.size());
  for (size_t i = 0; i < models.size(); ++i) {
    DerivativeComparisonRow row;
    row.index = static_cast<Index>(i + 1);
    row.truth = models[i].c_X.dot(models[i].snr);
    const SummaryStats opt_stats = summarize(opt_raw.contrast_estimate[i]);
    const SummaryStats der_stats = summarize(der_raw.contrast_estimate[i]);
    row.optimal_mean = opt_stats.mean;
    row.optimal_se = opt_stats.se;
    row.derivative_mean = der_stats.mean;
    row.derivative_se = der_stats.se;
    out.push_back(row);
  }
  return out;
}

}  // namespace smartdm
