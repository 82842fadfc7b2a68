#include "smartdm/glm.hpp"

#include <cmath>
#include <utility>

namespace smartdm {

namespace detail {

Matrix gram_inverse(const Matrix& M, const char* what) {
  if (!has_full_column_rank(M)) {
    throw SingularDesign(std::string(what) + " is rank deficient");
  }
  const Index p = M.cols();
  Eigen::LLT<Matrix> llt(Matrix(M.transpose() * M));
  if (llt.info() != Eigen::Success) {
    throw SingularDesign(std::string(what) + " has a singular Gram matrix");
  }
  return llt.solve(Matrix::Identity(p, p));
}

}  // namespace detail

CandidateModel::CandidateModel(Matrix X_, Vector snr_, Vector c_X_, double w_,
                               double phi_)
    : X(std::move(X_)), snr(std::move(snr_)), c_X(std::move(c_X_)), w(w_),
      phi(phi_) {
  if (snr.size() != X.cols() || c_X.size() != X.cols()) {
    throw DimensionMismatch("snr and c_X must match the column count of X");
  }
  if (!(phi > 0.0 && phi < 1.0)) {
    throw InvalidArgument("phi must lie strictly inside (0, 1)");
  }
  if (w < 0.0) {
    throw InvalidArgument("model weight must be nonnegative");
  }
  if (!has_full_column_rank(X)) {
    throw SingularDesign("candidate model X is rank deficient");
  }
}

ProposedDesign::ProposedDesign(Matrix Z_, Vector c_Z) : Z(std::move(Z_)) {
  contrasts.push_back(std::move(c_Z));
}

ProposedDesign::ProposedDesign(Matrix Z_, std::vector<Vector> contrasts_)
    : Z(std::move(Z_)), contrasts(std::move(contrasts_)) {
  if (contrasts.empty()) {
    throw InvalidArgument("a proposed design needs at least one contrast");
  }
}

GlmSolver::GlmSolver(Matrix Z) : Z_(std::move(Z)) {
  if (Z_.rows() <= Z_.cols()) {
    throw DimensionMismatch("GLM needs more timepoints than regressors");
  }
  gram_inv_ = detail::gram_inverse(Z_);
  qr_.compute(Z_);
}

GlmFit GlmSolver::fit(const Vector& y) const {
  if (y.size() != Z_.rows()) {
    throw DimensionMismatch("data length does not match design rows");
  }
  GlmFit out;
  out.gamma_hat = qr_.solve(y);
  out.residuals = y - Z_ * out.gamma_hat;
  out.dof = Z_.rows() - Z_.cols();
  out.sigma1_sq_hat = out.residuals.squaredNorm() / static_cast<double>(out.dof);
  return out;
}

GlmFit glm_fit(const Matrix& Z, const Vector& y) {
  return GlmSolver(Z).fit(y);
}

Matrix residual_projector(const Matrix& Z) {
  const Matrix gram_inv = detail::gram_inverse(Z);
  const Index n = Z.rows();
  return Matrix::Identity(n, n) - Z * gram_inv * Z.transpose();
}

namespace {

void check_rows(const Matrix& Z, const CandidateModel& model) {
  if (model.X.rows() != Z.rows()) {
    throw DimensionMismatch("model and design row counts differ");
  }
}

}  // namespace

Vector expected_gamma(const Matrix& Z, const CandidateModel& model) {
  check_rows(Z, model);
  const Matrix gram_inv = detail::gram_inverse(Z);
  return gram_inv * (Z.transpose() * (model.X * model.snr));
}

double noncentrality(const Matrix& Z, const CandidateModel& model) {
  check_rows(Z, model);
  const Matrix gram_inv = detail::gram_inverse(Z);
  const Vector signal = model.X * model.snr;
  const Vector zt_signal = Z.transpose() * signal;
  const double value =
      signal.squaredNorm() - zt_signal.dot(gram_inv * zt_signal);
  return value > 0.0 ? value : 0.0;
}

double contrast_bias(const Matrix& Z, const Vector& c_Z,
                     const CandidateModel& model) {
  check_rows(Z, model);
  if (c_Z.size() != Z.cols()) {
    throw DimensionMismatch("contrast length does not match design columns");
  }
  const double numerator = c_Z.dot(expected_gamma(Z, model));
  const double truth = model.c_X.dot(model.snr);
  if (truth == 0.0) return numerator;
  return numerator / truth - 1.0;
}

double model_variance_bias(const Matrix& Z, const CandidateModel& model) {
  const double dof = static_cast<double>(Z.rows() - Z.cols());
  if (dof <= 0.0) {
    throw DimensionMismatch("nonpositive residual degrees of freedom");
  }
  return noncentrality(Z, model) / dof;
}

double contrast_variance_change(const Matrix& Z, const Vector& c_Z,
                                const CandidateModel& model) {
  const Matrix gram_inv = detail::gram_inverse(Z);
  const Matrix model_gram_inv =
      detail::gram_inverse(model.X, "candidate model X");
  const double gauss_markov = model.c_X.dot(model_gram_inv * model.c_X);
  if (gauss_markov == 0.0) {
    throw ZeroGaussMarkovVariance("c_X^T (X^T X)^{-1} c_X vanishes");
  }
  const double v_b = model_variance_bias(Z, model);
  return (v_b + 1.0) * c_Z.dot(gram_inv * c_Z) / gauss_markov - 1.0;
}

double t_statistic(const GlmFit& fit, const Matrix& Z, const Vector& c_Z) {
  if (fit.sigma1_sq_hat == 0.0) {
    throw ZeroResidualVariance("residual variance estimate is zero");
  }
  const Matrix gram_inv = detail::gram_inverse(Z);
  const double contrast_var = c_Z.dot(gram_inv * c_Z);
  return c_Z.dot(fit.gamma_hat) /
         (std::sqrt(fit.sigma1_sq_hat) * std::sqrt(contrast_var));
}

double expected_t(const Matrix& Z, const Vector& c_Z,
                  const CandidateModel& model) {
  const Matrix gram_inv = detail::gram_inverse(Z);
  const double numerator =
      c_Z.dot(gram_inv * (Z.transpose() * (model.X * model.snr)));
  const double contrast_var = c_Z.dot(gram_inv * c_Z);
  const double v_b = model_variance_bias(Z, model);
  return numerator / (std::sqrt(contrast_var) * std::sqrt(1.0 + v_b));
}

double expected_f(const Matrix& Z, const Vector& c_Z,
                  const CandidateModel& model) {
  const Matrix gram_inv = detail::gram_inverse(Z);
  const double v_b = model_variance_bias(Z, model);
  const double c_b = contrast_bias(Z, c_Z, model);
  const double truth = model.c_X.dot(model.snr);
  return (v_b + 1.0) * c_Z.dot(gram_inv * c_Z) + truth * truth * c_b * c_b;
}

PerformanceMeasures performance_measures(const Matrix& Z, const Vector& c_Z,
                                         const CandidateModel& model) {
  PerformanceMeasures out;
  out.c_b = contrast_bias(Z, c_Z, model);
  out.v_b = model_variance_bias(Z, model);
  out.cv_delta = contrast_variance_change(Z, c_Z, model);
  out.expected_t = expected_t(Z, c_Z, model);
  out.expected_f = expected_f(Z, c_Z, model);
  out.noncentrality = noncentrality(Z, model);
  return out;
}

}  // namespace smartdm
