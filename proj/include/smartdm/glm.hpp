#ifndef SMARTDM_GLM_HPP
#define SMARTDM_GLM_HPP

#include <vector>

#include "smartdm/types.hpp"

namespace smartdm {

// One anticipated true model: data is generated as y = X * beta + noise and
// every performance measure depends on beta only through snr = beta / sigma.
struct CandidateModel {
  Matrix X;      // n x p_i regressors
  Vector snr;    // beta / sigma, length p_i
  Vector c_X;    // contrast of interest, length p_i
  double w;      // frequency weight, >= 0
  double phi;    // bias-variance weight, strictly inside (0, 1)

  CandidateModel(Matrix X_, Vector snr_, Vector c_X_, double w_ = 1.0,
                 double phi_ = 0.5);
};

// The design/contrast pair being evaluated or optimized.
struct ProposedDesign {
  Matrix Z;                        // n x p
  std::vector<Vector> contrasts;   // q >= 1 contrasts, each length p

  ProposedDesign() = default;
  ProposedDesign(Matrix Z_, Vector c_Z);
  ProposedDesign(Matrix Z_, std::vector<Vector> contrasts_);

  const Vector& contrast() const { return contrasts.front(); }
};

struct GlmFit {
  Vector gamma_hat;
  double sigma1_sq_hat;  // residual sum of squares / dof
  Index dof;             // n - p
  Vector residuals;
};

struct PerformanceMeasures {
  double c_b;             // fractional contrast bias
  double v_b;             // model variance bias
  double cv_delta;        // contrast variance change vs Gauss-Markov
  double expected_t;
  double expected_f;
  double noncentrality;
};

// Reusable least-squares machinery for a fixed design: factors Z once so a
// stream of data vectors can be fitted cheaply.
class GlmSolver {
 public:
  explicit GlmSolver(Matrix Z);

  GlmFit fit(const Vector& y) const;

  const Matrix& design() const { return Z_; }
  const Matrix& gram_inverse() const { return gram_inv_; }
  Index rows() const { return Z_.rows(); }
  Index cols() const { return Z_.cols(); }

 private:
  Matrix Z_;
  Eigen::ColPivHouseholderQR<Matrix> qr_;
  Matrix gram_inv_;  // (Z^T Z)^{-1}, needed by the variance formulas
};

GlmFit glm_fit(const Matrix& Z, const Vector& y);

// P_Z = I - Z (Z^T Z)^{-1} Z^T; symmetric, idempotent, annihilates Z.
Matrix residual_projector(const Matrix& Z);

// E(gamma_hat) = (Z^T Z)^{-1} Z^T X snr, working in SNR units (sigma = 1).
Vector expected_gamma(const Matrix& Z, const CandidateModel& model);

// snr^T X^T P_Z X snr, the noncentrality of the residual chi-square.
double noncentrality(const Matrix& Z, const CandidateModel& model);

// Fractional contrast bias. Falls back to the raw numerator when the true
// contrast value c_X^T snr is zero.
double contrast_bias(const Matrix& Z, const Vector& c_Z,
                     const CandidateModel& model);

// noncentrality / (n - p) with p = cols(Z).
double model_variance_bias(const Matrix& Z, const CandidateModel& model);

// (v_b + 1) c_Z^T (Z^T Z)^{-1} c_Z / (c_X^T (X^T X)^{-1} c_X) - 1.
double contrast_variance_change(const Matrix& Z, const Vector& c_Z,
                                const CandidateModel& model);

double t_statistic(const GlmFit& fit, const Matrix& Z, const Vector& c_Z);

// Ratio-of-expectations form of E(T). This treats E(a/b) as E(a)/E(b), which
// is how the source framework states it; the approximation is tight only at
// large residual degrees of freedom.
double expected_t(const Matrix& Z, const Vector& c_Z,
                  const CandidateModel& model);

// (v_b + 1) c_Z^T (Z^T Z)^{-1} c_Z + (c_X^T snr)^2 c_b^2.
double expected_f(const Matrix& Z, const Vector& c_Z,
                  const CandidateModel& model);

PerformanceMeasures performance_measures(const Matrix& Z, const Vector& c_Z,
                                         const CandidateModel& model);

namespace detail {
// (M^T M)^{-1} via LLT; throws SingularDesign unless M has full column rank.
Matrix gram_inverse(const Matrix& M, const char* what = "design matrix");
}  // namespace detail

}  // namespace smartdm

#endif
