// Command-line front end: optimize design matrices, sweep model sizes,
// run Monte-Carlo checks and regenerate the built-in example problems.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "smartdm/builtin.hpp"
#include "smartdm/dm_solve.hpp"
#include "smartdm/io.hpp"
#include "smartdm/objective.hpp"
#include "smartdm/pgd.hpp"
#include "smartdm/selection.hpp"
#include "smartdm/simulation.hpp"

namespace {

using namespace smartdm;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitSolverFailure = 3;

struct CommonArgs {
  std::string spec_path;
  std::string out_dir = "smartdm-out";
  std::uint64_t seed = 0;
};

ProposedDesign load_design(const std::string& design_dir,
                           const std::string& design_csv,
                           const std::string& contrast_csv) {
  if (!design_dir.empty()) {
    const Matrix Z = io::read_csv(fs::path(design_dir) / "Z_hat.csv");
    const Matrix c = io::read_csv(fs::path(design_dir) / "c_hat.csv");
    std::vector<Vector> contrasts;
    for (Index s = 0; s < c.cols(); ++s) contrasts.push_back(c.col(s));
    return ProposedDesign(Z, contrasts);
  }
  if (design_csv.empty() || contrast_csv.empty()) {
    throw InvalidArgument("need --design-dir or both --design and --contrast");
  }
  const Matrix Z = io::read_csv(design_csv);
  const Matrix c = io::read_csv(contrast_csv);
  std::vector<Vector> contrasts;
  for (Index s = 0; s < c.cols(); ++s) contrasts.push_back(c.col(s));
  return ProposedDesign(Z, contrasts);
}

double cosine_similarity(const Vector& a, const Vector& b) {
  const double denom = a.norm() * b.norm();
  return denom > 0.0 ? a.dot(b) / denom : 0.0;
}

int run_optimize(const CommonArgs& common, const std::string& solver,
                 const PgdOptions& pgd_opts) {
  const ProblemSpec spec = io::load_spec(common.spec_path);
  const AssembledObjective assembled = assemble(spec);
  const InitialPoint init = init_design(spec, common.seed);
  const std::string spec_json = io::spec_to_json(spec);

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&start]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  };

  std::optional<OptimizationResult> pgd_result;
  std::optional<OptimizationResult> exact_result;
  if (solver == "pgd" || solver == "both") {
    pgd_result = optimize(assembled, spec, init.Z0, init.contrasts, pgd_opts);
  }
  if (solver == "exact" || solver == "both") {
    exact_result =
        solve_dm_problem(spec, assembled, init.Z0, init.contrasts);
  }

  const fs::path out(common.out_dir);
  io::BundleInputs inputs;
  inputs.command = "optimize";
  inputs.spec_json = spec_json;
  inputs.seed = common.seed;
  inputs.wall_seconds = elapsed();

  auto write_one = [&](const OptimizationResult& result,
                       const std::string& name, const fs::path& dir) {
    io::BundleInputs local = inputs;
    local.solver = name;
    io::write_result_bundle(dir, result, local);
    const ProposedDesign design(result.Z_hat, result.contrasts);
    io::write_curves_csv(dir / "curves.csv",
                         performance_curves(design, spec.models));
    std::cout << name << " objective " << io::format_double(result.F_hat)
              << " after " << result.iterations << " iterations\n";
  };

  if (solver == "both") {
    write_one(*pgd_result, "pgd", out / "pgd");
    write_one(*exact_result, "exact", out / "exact");
    const double gap = std::abs(pgd_result->F_hat - exact_result->F_hat) /
                       std::max(1e-300, std::abs(exact_result->F_hat));
    const double cosine = cosine_similarity(pgd_result->contrast(),
                                            exact_result->contrast());
    fs::create_directories(out);
    std::ofstream cmp(out / "comparison.csv");
    cmp << "objective_pgd,objective_exact,relative_gap,contrast_cosine\n"
        << io::format_double(pgd_result->F_hat) << ','
        << io::format_double(exact_result->F_hat) << ','
        << io::format_double(gap) << ',' << io::format_double(cosine) << '\n';
    std::cout << "relative objective gap " << io::format_double(gap)
              << ", contrast cosine " << io::format_double(cosine) << "\n";
  } else if (pgd_result) {
    write_one(*pgd_result, "pgd", out);
  } else {
    write_one(*exact_result, "exact", out);
  }
  return kExitOk;
}

int run_select_size(const CommonArgs& common, Index p0, Index p_max,
                    double cutoff, int trials, const PgdOptions& pgd_opts) {
  const ProblemSpec spec = io::load_spec(common.spec_path);
  if (p_max < p0) throw InvalidArgument("--pmax must be at least --p0");
  const SizeSelectionReport report =
      select_size(spec, p0, p_max, cutoff, pgd_opts, common.seed);
  fs::create_directories(common.out_dir);
  io::write_size_curve_csv(fs::path(common.out_dir) / "size_curve.csv",
                           report.p_values, report.objectives,
                           report.reduction);
  Index p_opt = report.p_opt;
  if (trials > 1) {
    p_opt = select_size_robust(spec, p0, p_max, cutoff, pgd_opts, trials,
                               common.seed);
  }
  std::cout << "p_opt " << p_opt << (report.degenerate ? " (degenerate range)" : "")
            << "\n";
  return kExitOk;
}

int run_simulate(const CommonArgs& common, const ProposedDesign& design,
                 Index reps) {
  const ProblemSpec spec = io::load_spec(common.spec_path);
  McOptions mc;
  mc.n_reps = reps;
  mc.seed = common.seed;
  const PerformanceReport report =
      performance_curves(design, spec.models, mc);
  fs::create_directories(common.out_dir);
  io::write_curves_csv(fs::path(common.out_dir) / "curves.csv", report);
  std::cout << "wrote curves for " << report.per_model.size() << " models\n";
  return kExitOk;
}

int run_roc(const CommonArgs& common, const ProposedDesign& design,
            Index reps, int signal_index, int null_index,
            const std::vector<double>& signal_snr, double t_min, double t_max,
            double t_step) {
  const ProblemSpec spec = io::load_spec(common.spec_path);
  const int model_count = static_cast<int>(spec.models.size());
  if (signal_index < 1 || signal_index > model_count || null_index < 1 ||
      null_index > model_count) {
    throw InvalidArgument("model indices are 1-based into the spec");
  }
  CandidateModel signal = spec.models[static_cast<size_t>(signal_index - 1)];
  if (!signal_snr.empty()) {
    if (static_cast<Index>(signal_snr.size()) != signal.snr.size()) {
      throw InvalidArgument("--signal-snr length must match the model");
    }
    for (Index i = 0; i < signal.snr.size(); ++i) {
      signal.snr(i) = signal_snr[static_cast<size_t>(i)];
    }
  }
  const CandidateModel& null_model =
      spec.models[static_cast<size_t>(null_index - 1)];

  std::vector<double> thresholds;
  for (double t = t_min; t <= t_max + 1e-12; t += t_step) {
    thresholds.push_back(t);
  }
  const auto roc =
      roc_curve(design, signal, null_model, thresholds, reps, common.seed);
  fs::create_directories(common.out_dir);
  io::write_roc_csv(fs::path(common.out_dir) / "roc.csv", roc);

  double best = 0.0, best_t = thresholds.front();
  for (const auto& point : roc) {
    const double youden = point.tpr + (1.0 - point.fpr);
    if (youden > best) {
      best = youden;
      best_t = point.threshold;
    }
  }
  std::cout << "best threshold " << io::format_double(best_t)
            << " sensitivity+specificity " << io::format_double(best) << "\n";
  return kExitOk;
}

int run_example(const std::string& name, const std::string& out_path) {
  const ProblemSpec spec = builtin_spec(name);
  io::save_spec(out_path, spec);
  std::cout << "wrote " << out_path << " with " << spec.models.size()
            << " models\n";
  return kExitOk;
}

int run_gradcheck(const CommonArgs& common, double eps) {
  if (eps <= 0.0) throw InvalidArgument("--eps must be positive");
  const ProblemSpec spec = io::load_spec(common.spec_path);
  const AssembledObjective assembled = assemble(spec);
  const InitialPoint init = init_design(spec, common.seed);
  Matrix Z = init.Z0;
  Vector c = init.contrasts.front();

  const Matrix analytic_Z = grad_design(Z, c, assembled);
  const Vector analytic_c = grad_contrast(Z, c, assembled);

  Matrix fd_Z(Z.rows(), Z.cols());
  for (Index i = 0; i < Z.rows(); ++i) {
    for (Index j = 0; j < Z.cols(); ++j) {
      Matrix plus = Z, minus = Z;
      plus(i, j) += eps;
      minus(i, j) -= eps;
      fd_Z(i, j) = (objective_value(plus, c, assembled) -
                    objective_value(minus, c, assembled)) /
                   (2.0 * eps);
    }
  }
  Vector fd_c(c.size());
  for (Index i = 0; i < c.size(); ++i) {
    Vector plus = c, minus = c;
    plus(i) += eps;
    minus(i) -= eps;
    fd_c(i) = (objective_value(Z, plus, assembled) -
               objective_value(Z, minus, assembled)) /
              (2.0 * eps);
  }

  const double z_scale = std::max(1e-12, fd_Z.cwiseAbs().maxCoeff());
  const double c_scale = std::max(1e-12, fd_c.cwiseAbs().maxCoeff());
  const Matrix z_err = (analytic_Z - fd_Z).cwiseAbs();
  const Vector c_err = (analytic_c - fd_c).cwiseAbs();
  Index zi = 0, zj = 0, ci = 0;
  const double z_rel = z_err.maxCoeff(&zi, &zj) / z_scale;
  const double c_rel = c_err.maxCoeff(&ci) / c_scale;
  std::cout << "design gradient max relative error "
            << io::format_double(z_rel) << " at (" << zi << "," << zj << ")\n"
            << "contrast gradient max relative error "
            << io::format_double(c_rel) << " at (" << ci << ")\n";
  if (z_rel <= 1e-4 && c_rel <= 1e-4) return kExitOk;
  std::cerr << "gradient check failed\n";
  return kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smartdm: bias-variance optimal design matrices for the GLM"};
  app.require_subcommand(1);

  CommonArgs common;
  PgdOptions pgd_opts;

  auto add_common = [&](CLI::App* cmd, bool with_spec = true) {
    if (with_spec) {
      cmd->add_option("spec", common.spec_path, "problem spec JSON")
          ->required();
    }
    cmd->add_option("--out", common.out_dir, "output directory");
    cmd->add_option("--seed", common.seed, "random seed");
  };
  auto add_pgd = [&](CLI::App* cmd) {
    cmd->add_option("--alpha0", pgd_opts.alpha0, "initial step size");
    cmd->add_option("--theta", pgd_opts.theta, "step growth factor");
    cmd->add_option("--eta1", pgd_opts.eta1, "objective tolerance");
    cmd->add_option("--eta2", pgd_opts.eta2, "step tolerance");
    cmd->add_option("--max-outer", pgd_opts.max_outer, "outer iteration cap");
  };

  std::string solver = "pgd";
  auto* cmd_optimize = app.add_subcommand("optimize", "compute an optimal design");
  add_common(cmd_optimize);
  add_pgd(cmd_optimize);
  cmd_optimize->add_option("--solver", solver, "pgd, exact or both")
      ->check(CLI::IsMember({"pgd", "exact", "both"}));

  Index p0 = 3, p_max = 6;
  double cutoff = 0.95;
  int trials = 1;
  auto* cmd_select = app.add_subcommand("select-size", "choose the column count");
  add_common(cmd_select);
  add_pgd(cmd_select);
  cmd_select->add_option("--p0", p0, "smallest size to try");
  cmd_select->add_option("--pmax", p_max, "largest size to try");
  cmd_select->add_option("--cutoff", cutoff, "reduction cutoff R_c");
  cmd_select->add_option("--trials", trials, "initialization trials");

  std::string design_dir, design_csv, contrast_csv;
  Index reps = 1000;
  auto* cmd_simulate = app.add_subcommand("simulate", "Monte-Carlo performance");
  add_common(cmd_simulate);
  cmd_simulate->add_option("--design-dir", design_dir, "bundle with Z_hat/c_hat");
  cmd_simulate->add_option("--design", design_csv, "design CSV");
  cmd_simulate->add_option("--contrast", contrast_csv, "contrast CSV");
  cmd_simulate->add_option("--reps", reps, "replicates per model");

  int signal_index = 1, null_index = 1;
  std::vector<double> signal_snr;
  double t_min = -5.0, t_max = 15.0, t_step = 0.25;
  auto* cmd_roc = app.add_subcommand("roc", "ROC curve for a T decision rule");
  add_common(cmd_roc);
  cmd_roc->add_option("--design-dir", design_dir, "bundle with Z_hat/c_hat");
  cmd_roc->add_option("--design", design_csv, "design CSV");
  cmd_roc->add_option("--contrast", contrast_csv, "contrast CSV");
  cmd_roc->add_option("--reps", reps, "replicates per class");
  cmd_roc->add_option("--signal-index", signal_index, "1-based signal model");
  cmd_roc->add_option("--null-index", null_index, "1-based null model");
  cmd_roc->add_option("--signal-snr", signal_snr, "override signal snr");
  cmd_roc->add_option("--tmin", t_min, "lowest threshold");
  cmd_roc->add_option("--tmax", t_max, "highest threshold");
  cmd_roc->add_option("--tstep", t_step, "threshold spacing");

  std::string example_name, example_out = "spec.json";
  auto* cmd_example = app.add_subcommand("example", "write a built-in spec");
  cmd_example->add_option("name", example_name, "example name")->required();
  cmd_example->add_option("--out", example_out, "output spec path");

  double eps = 1e-6;
  auto* cmd_gradcheck = app.add_subcommand("gradcheck", "finite-difference audit");
  add_common(cmd_gradcheck);
  cmd_gradcheck->add_option("--eps", eps, "finite-difference step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (cmd_optimize->parsed()) return run_optimize(common, solver, pgd_opts);
    if (cmd_select->parsed()) {
      return run_select_size(common, p0, p_max, cutoff, trials, pgd_opts);
    }
    if (cmd_simulate->parsed()) {
      return run_simulate(common,
                          load_design(design_dir, design_csv, contrast_csv),
                          reps);
    }
    if (cmd_roc->parsed()) {
      return run_roc(common, load_design(design_dir, design_csv, contrast_csv),
                     reps, signal_index, null_index, signal_snr, t_min, t_max,
                     t_step);
    }
    if (cmd_example->parsed()) return run_example(example_name, example_out);
    if (cmd_gradcheck->parsed()) return run_gradcheck(common, eps);
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  } catch (const SingularDesign& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitBadInput;
}
