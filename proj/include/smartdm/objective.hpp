#ifndef SMARTDM_OBJECTIVE_HPP
#define SMARTDM_OBJECTIVE_HPP

#include <vector>

#include "smartdm/glm.hpp"
#include "smartdm/types.hpp"

namespace smartdm {

// A full optimization instance: the anticipated model set plus the linear
// constraints Z A = B on design columns and C c_Z = d on each contrast.
// Empty A/B (resp. C/d) mean the design (resp. contrast) is unconstrained.
struct ProblemSpec {
  std::vector<CandidateModel> models;
  Index n = 0;          // timepoints
  Index p = 0;          // columns of the optimal design
  Matrix A;             // p x qA
  Matrix B;             // n x qA
  Matrix C;             // r x p
  Vector d;             // r
  Index n_contrasts = 1;

  Index model_count() const { return static_cast<Index>(models.size()); }
  void validate() const;
};

// Precomputed quantities shared by every objective/gradient evaluation.
// H column i is sqrt(w_i) X_i snr_i; ell_i = sqrt(w_i) c_Xi^T snr_i;
// sigma_i = 1/(n - p_i); phi_v = 2 phi_i, phi_b = 2 - 2 phi_i.
struct AssembledObjective {
  Matrix H;
  Vector sigma;
  Vector ell;
  Vector phi_v;
  Vector phi_b;
  double phiw_sum = 0.0;    // sum of 2 phi_i w_i
  double const_term = 0.0;  // sum of w_i (2 - 2 phi_i) (c_Xi^T snr_i)^2
  Index n = 0;
  Index p = 0;

  Index model_count() const { return H.cols(); }
};

AssembledObjective assemble(const ProblemSpec& spec);

// Per-model bias-variance measure f(Z, c_Z; X_i; snr_i; c_Xi; phi_i),
// evaluated from its raw definition.
double per_model_value(const Matrix& Z, const Vector& c_Z,
                       const CandidateModel& model, Index n);

// Same quantity written through C_b and the Gauss-Markov variance ratio;
// kept separate so the two routes can be checked against each other.
double per_model_value_rewritten(const Matrix& Z, const Vector& c_Z,
                                 const CandidateModel& model, Index n);

double objective_value(const Matrix& Z, const Vector& c_Z,
                       const AssembledObjective& assembled);
double objective_value(const Matrix& Z, const std::vector<Vector>& contrasts,
                       const AssembledObjective& assembled);

Matrix grad_design(const Matrix& Z, const Vector& c_Z,
                   const AssembledObjective& assembled);
Matrix grad_design(const Matrix& Z, const std::vector<Vector>& contrasts,
                   const AssembledObjective& assembled);

Vector grad_contrast(const Matrix& Z, const Vector& c_Z,
                     const AssembledObjective& assembled);

// Shared per-evaluation workspace: one Gram factorization reused by the
// value and both gradients.
class ObjectiveEvaluator {
 public:
  ObjectiveEvaluator(const Matrix& Z, const AssembledObjective& assembled);

  double value(const Vector& c_Z) const;
  Matrix design_gradient(const Vector& c_Z) const;
  Vector contrast_gradient(const Vector& c_Z) const;

  double value(const std::vector<Vector>& contrasts) const;
  Matrix design_gradient(const std::vector<Vector>& contrasts) const;

 private:
  const Matrix& Z_;
  const AssembledObjective& assembled_;
  Matrix gram_inv_;      // (Z^T Z)^{-1}
  Matrix ZtH_;           // Z^T H
  Matrix gram_inv_ZtH_;  // (Z^T Z)^{-1} Z^T H
  Vector col_sq_norms_;  // squared column norms of H
  double trace_term_;    // tr(P_Z H PhiV Sigma H^T)
  Vector hb_ell_;        // H (phi_b ∘ ell)
  Vector r_;             // Z^T H (phi_b ∘ ell)
};

}  // namespace smartdm

#endif
