#include "smartdm/pgd.hpp"

#include <cmath>

namespace smartdm {

void PgdOptions::validate() const {
  if (!(alpha0 > 0.0 && alpha0 < 1e-3)) {
    throw InvalidArgument("alpha0 must lie in (0, 1e-3)");
  }
  if (!(theta > 1.0 && theta <= 5.0)) {
    throw InvalidArgument("theta must lie in (1, 5]");
  }
  if (!(eta1 > 0.0 && eta1 < 1e-6) || !(eta2 > 0.0 && eta2 < 1e-6)) {
    throw InvalidArgument("eta1 and eta2 must lie in (0, 1e-6)");
  }
  if (max_outer <= 0 || max_inner <= 0) {
    throw InvalidArgument("iteration caps must be positive");
  }
}

ConstraintProjectors constraint_projectors(const Matrix& A, const Matrix& C,
                                           Index p) {
  ConstraintProjectors out;
  out.P_A = Matrix::Identity(p, p);
  out.P_CT = Matrix::Identity(p, p);
  if (A.size() > 0) {
    if (A.rows() != p) throw DimensionMismatch("A must have p rows");
    if (!has_full_column_rank(A)) {
      throw SingularConstraint("A^T A is singular");
    }
    Eigen::LLT<Matrix> llt(Matrix(A.transpose() * A));
    out.P_A -= A * llt.solve(Matrix(A.transpose()));
  }
  if (C.size() > 0) {
    if (C.cols() != p) throw DimensionMismatch("C must have p columns");
    if (!has_full_column_rank(C.transpose())) {
      throw SingularConstraint("C C^T is singular");
    }
    Eigen::LLT<Matrix> llt(Matrix(C * C.transpose()));
    out.P_CT -= C.transpose() * llt.solve(Matrix(C));
  }
  return out;
}

FeasibilityReport feasibility_check(const Matrix& Z,
                                    const std::vector<Vector>& contrasts,
                                    const ProblemSpec& spec) {
  FeasibilityReport out;
  if (spec.A.size() > 0) {
    out.design_residual = (Z * spec.A - spec.B).cwiseAbs().maxCoeff();
  }
  if (spec.C.size() > 0) {
    for (const Vector& c : contrasts) {
      const double r = (spec.C * c - spec.d).cwiseAbs().maxCoeff();
      out.contrast_residual = std::max(out.contrast_residual, r);
    }
  }
  return out;
}

OptimizationResult optimize(const AssembledObjective& assembled,
                            const ProblemSpec& spec, const Matrix& init_Z,
                            const std::vector<Vector>& init_contrasts,
                            const PgdOptions& opts) {
  opts.validate();
  if (init_contrasts.empty()) {
    throw InvalidArgument("need at least one initial contrast");
  }
  const FeasibilityReport feas = feasibility_check(init_Z, init_contrasts, spec);
  if (feas.design_residual > 1e-10 || feas.contrast_residual > 1e-10) {
    throw InfeasibleStart("initial point violates the linear constraints");
  }

  const ConstraintProjectors proj =
      constraint_projectors(spec.A, spec.C, spec.p);

  OptimizationResult result;
  result.Z_hat = init_Z;
  result.contrasts = init_contrasts;

  double alpha = opts.alpha0;
  double current_value;
  {
    ObjectiveEvaluator eval(result.Z_hat, assembled);
    current_value = eval.value(result.contrasts);
  }
  result.trace.push_back({0, current_value, alpha, true});
  result.F_hat = current_value;
  result.termination = Termination::IterationCap;

  const size_t q = result.contrasts.size();
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    result.iterations = outer + 1;

    Matrix step_Z;
    std::vector<Vector> step_contrasts(q);
    {
      ObjectiveEvaluator eval(result.Z_hat, assembled);
      step_Z = eval.design_gradient(result.contrasts) * proj.P_A;
      for (size_t s = 0; s < q; ++s) {
        step_contrasts[s] = proj.P_CT * eval.contrast_gradient(result.contrasts[s]);
      }
    }

    bool success = false;
    Matrix candidate_Z;
    std::vector<Vector> candidate_contrasts(q);
    double candidate_value = current_value;
    for (int inner = 0; inner < opts.max_inner && !success; ++inner) {
      candidate_Z = result.Z_hat - alpha * step_Z;
      for (size_t s = 0; s < q; ++s) {
        candidate_contrasts[s] = result.contrasts[s] - alpha * step_contrasts[s];
      }
      bool decreased = false;
      if (gram_condition(candidate_Z) <= opts.max_gram_condition) {
        ObjectiveEvaluator eval(candidate_Z, assembled);
        candidate_value = eval.value(candidate_contrasts);
        decreased = candidate_value < current_value;
      }
      if (decreased) {
        alpha *= opts.theta;
        success = true;
      } else {
        alpha /= opts.theta;
        result.trace.push_back({outer + 1, current_value, alpha, false});
        if (alpha <= opts.eta2) break;
      }
    }

    if (!success) {
      result.termination = Termination::StepTolerance;
      break;
    }

    const double previous_value = current_value;
    result.Z_hat = candidate_Z;
    result.contrasts = candidate_contrasts;
    current_value = candidate_value;
    result.trace.push_back({outer + 1, current_value, alpha, true});

    if (std::abs(current_value - previous_value) <= opts.eta1) {
      result.termination = Termination::ObjectiveTolerance;
      break;
    }
    if (alpha <= opts.eta2) {
      result.termination = Termination::StepTolerance;
      break;
    }
  }

  result.F_hat = current_value;
  return result;
}

}  // namespace smartdm
