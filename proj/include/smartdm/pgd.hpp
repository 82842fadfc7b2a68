#ifndef SMARTDM_PGD_HPP
#define SMARTDM_PGD_HPP

#include <vector>

#include "smartdm/objective.hpp"
#include "smartdm/types.hpp"

namespace smartdm {

struct PgdOptions {
  double alpha0 = 1e-4;   // initial step size, inside (0, 1e-3)
  double theta = 2.0;     // multiplicative step growth/shrink, inside (1, 5]
  double eta1 = 1e-8;     // objective-change tolerance
  double eta2 = 1e-8;     // step-size tolerance
  int max_outer = 50000;
  int max_inner = 200;
  double max_gram_condition = 1e12;  // candidate rejected beyond this

  void validate() const;
};

enum class Termination { ObjectiveTolerance, StepTolerance, IterationCap };

struct TraceRow {
  int iteration;
  double objective;
  double alpha;
  bool accepted;
};

struct OptimizationResult {
  Matrix Z_hat;
  std::vector<Vector> contrasts;
  double F_hat = 0.0;
  std::vector<TraceRow> trace;
  Termination termination = Termination::IterationCap;
  int iterations = 0;

  const Vector& contrast() const { return contrasts.front(); }
};

// P_A = I - A (A^T A)^{-1} A^T and P_CT = I - C^T (C C^T)^{-1} C, both p x p.
// Empty A or C yields the identity (nothing constrained).
struct ConstraintProjectors {
  Matrix P_A;
  Matrix P_CT;
};

ConstraintProjectors constraint_projectors(const Matrix& A, const Matrix& C,
                                           Index p);

struct FeasibilityReport {
  double design_residual = 0.0;    // max-norm of Z A - B
  double contrast_residual = 0.0;  // max-norm of C c - d, worst contrast
};

FeasibilityReport feasibility_check(const Matrix& Z,
                                    const std::vector<Vector>& contrasts,
                                    const ProblemSpec& spec);

// Projected gradient descent with a multiplicative adaptive step size.
// Steps move Z along -grad * P_A and each contrast along -P_CT * grad, so
// feasibility of the start point is preserved exactly.
OptimizationResult optimize(const AssembledObjective& assembled,
                            const ProblemSpec& spec, const Matrix& init_Z,
                            const std::vector<Vector>& init_contrasts,
                            const PgdOptions& opts = {});

}  // namespace smartdm

#endif
