#include "smartdm/objective.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace smartdm {

void ProblemSpec::validate() const {
  if (models.empty()) throw InvalidArgument("spec needs at least one model");
  if (n <= 0 || p <= 0 || p >= n) {
    throw InvalidArgument("need 0 < p < n timepoints/columns");
  }
  for (const auto& model : models) {
    if (model.X.rows() != n) {
      throw DimensionMismatch("all models must share the spec's row count");
    }
    if (model.X.cols() >= n) {
      throw InvalidArgument("model has nonpositive residual dof");
    }
  }
  if (A.size() > 0 || B.size() > 0) {
    if (A.rows() != p || B.rows() != n || A.cols() != B.cols()) {
      throw DimensionMismatch("column constraint shapes must be p x qA, n x qA");
    }
    if (A.cols() > p) throw InvalidArgument("more column constraints than columns");
    if (!has_full_column_rank(A)) {
      throw SingularConstraint("constraint matrix A is rank deficient");
    }
  }
  if (C.size() > 0 || d.size() > 0) {
    if (C.cols() != p || d.size() != C.rows()) {
      throw DimensionMismatch("contrast constraint shapes must be r x p, r");
    }
    if (C.rows() > p) throw InvalidArgument("more contrast constraints than entries");
    if (!has_full_column_rank(C.transpose())) {
      throw SingularConstraint("constraint matrix C is row-rank deficient");
    }
  }
  if (n_contrasts < 1) throw InvalidArgument("need at least one contrast");
}

AssembledObjective assemble(const ProblemSpec& spec) {
  spec.validate();
  const Index m = spec.model_count();
  AssembledObjective out;
  out.n = spec.n;
  out.p = spec.p;
  out.H.resize(spec.n, m);
  out.sigma.resize(m);
  out.ell.resize(m);
  out.phi_v.resize(m);
  out.phi_b.resize(m);
  for (Index i = 0; i < m; ++i) {
    const CandidateModel& model = spec.models[static_cast<size_t>(i)];
    const double sqrt_w = std::sqrt(model.w);
    const double signal = model.c_X.dot(model.snr);
    out.H.col(i) = sqrt_w * (model.X * model.snr);
    out.sigma(i) = 1.0 / static_cast<double>(spec.n - model.X.cols());
    out.ell(i) = sqrt_w * signal;
    out.phi_v(i) = 2.0 * model.phi;
    out.phi_b(i) = 2.0 - 2.0 * model.phi;
    out.phiw_sum += 2.0 * model.phi * model.w;
    out.const_term += model.w * (2.0 - 2.0 * model.phi) * signal * signal;
  }
  return out;
}

double per_model_value(const Matrix& Z, const Vector& c_Z,
                       const CandidateModel& model, Index n) {
  if (Z.rows() != n || model.X.rows() != n) {
    throw DimensionMismatch("row counts disagree");
  }
  const Matrix gram_inv = detail::gram_inverse(Z);
  const double quad_c = c_Z.dot(gram_inv * c_Z);
  const Vector signal = model.X * model.snr;
  const Vector zt_signal = Z.transpose() * signal;
  const double delta = signal.squaredNorm() - zt_signal.dot(gram_inv * zt_signal);
  const double model_dof = static_cast<double>(n - model.X.cols());
  const double u = c_Z.dot(gram_inv * zt_signal);
  const double s = model.c_X.dot(model.snr);
  return 2.0 * model.phi * quad_c * (1.0 + delta / model_dof) +
         (2.0 - 2.0 * model.phi) * (u * u - 2.0 * u * s + s * s);
}

double per_model_value_rewritten(const Matrix& Z, const Vector& c_Z,
                                 const CandidateModel& model, Index n) {
  if (Z.rows() != n || model.X.rows() != n) {
    throw DimensionMismatch("row counts disagree");
  }
  const Matrix gram_inv = detail::gram_inverse(Z);
  const Matrix model_gram_inv =
      detail::gram_inverse(model.X, "candidate model X");
  const double gauss_markov = model.c_X.dot(model_gram_inv * model.c_X);
  const double model_dof = static_cast<double>(n - model.X.cols());
  const double variance_ratio =
      (1.0 + noncentrality(Z, model) / model_dof) * c_Z.dot(gram_inv * c_Z) /
      gauss_markov;
  const double c_b = contrast_bias(Z, c_Z, model);
  const double s = model.c_X.dot(model.snr);
  return 2.0 * model.phi * gauss_markov * variance_ratio +
         (2.0 - 2.0 * model.phi) * s * s * c_b * c_b;
}

ObjectiveEvaluator::ObjectiveEvaluator(const Matrix& Z,
                                       const AssembledObjective& assembled)
    : Z_(Z), assembled_(assembled) {
  if (Z.rows() != assembled.n || Z.cols() != assembled.p) {
    throw DimensionMismatch("design shape does not match assembled objective");
  }
  if (!has_full_column_rank(Z)) {
    throw SingularDesign("proposed design Z is rank deficient");
  }
  const Index p = Z.cols();
  Eigen::LLT<Matrix> llt(Matrix(Z.transpose() * Z));
  if (llt.info() != Eigen::Success) {
    throw SingularDesign("Z^T Z is not positive definite");
  }
  gram_inv_ = llt.solve(Matrix::Identity(p, p));
  ZtH_.noalias() = Z.transpose() * assembled.H;
  gram_inv_ZtH_.noalias() = gram_inv_ * ZtH_;
  col_sq_norms_ = assembled.H.colwise().squaredNorm();

  trace_term_ = 0.0;
  for (Index i = 0; i < assembled.model_count(); ++i) {
    const double projected = ZtH_.col(i).dot(gram_inv_ZtH_.col(i));
    trace_term_ +=
        assembled.phi_v(i) * assembled.sigma(i) * (col_sq_norms_(i) - projected);
  }

  const Vector weighted_ell = assembled.phi_b.cwiseProduct(assembled.ell);
  hb_ell_.noalias() = assembled.H * weighted_ell;
  r_.noalias() = ZtH_ * weighted_ell;
}

double ObjectiveEvaluator::value(const Vector& c_Z) const {
  if (c_Z.size() != assembled_.p) {
    throw DimensionMismatch("contrast length does not match p");
  }
  const Vector a = gram_inv_ * c_Z;
  const double quad_c = c_Z.dot(a);
  const Vector u = ZtH_.transpose() * a;
  double bias_terms = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    bias_terms += assembled_.phi_b(i) * u(i) * (u(i) - 2.0 * assembled_.ell(i));
  }
  return quad_c * (assembled_.phiw_sum + trace_term_) + bias_terms +
         assembled_.const_term;
}

double ObjectiveEvaluator::value(const std::vector<Vector>& contrasts) const {
  double total = 0.0;
  for (const Vector& c : contrasts) total += value(c);
  return total;
}

Matrix ObjectiveEvaluator::design_gradient(const Vector& c_Z) const {
  const Vector a = gram_inv_ * c_Z;
  const double quad_c = c_Z.dot(a);
  const Vector Za = Z_ * a;
  const Vector u = ZtH_.transpose() * a;
  const double bracket = assembled_.phiw_sum + trace_term_;

  // H PhiV Sigma H^T Z, projected by P_Z and trailed by (Z^T Z)^{-1}.
  const Vector vscale = assembled_.phi_v.cwiseProduct(assembled_.sigma);
  Matrix N1(Z_.rows(), Z_.cols());
  N1.noalias() = assembled_.H * vscale.asDiagonal() * ZtH_.transpose();
  Matrix PN1 = N1;
  PN1.noalias() -= Z_ * (gram_inv_ * (Z_.transpose() * N1));

  // Q = Z^T H PhiB H^T Z
  Matrix Q(assembled_.p, assembled_.p);
  Q.noalias() = ZtH_ * assembled_.phi_b.asDiagonal() * ZtH_.transpose();
  const Vector Qa = Q * a;
  const Vector WQa = gram_inv_ * Qa;
  const Vector Wr = gram_inv_ * r_;
  const Vector hub = assembled_.H * assembled_.phi_b.cwiseProduct(u);

  Matrix grad = (-2.0 * bracket) * (Za * a.transpose());
  grad.noalias() += (-2.0 * quad_c) * (PN1 * gram_inv_);
  grad.noalias() += -2.0 * (Za * WQa.transpose());
  grad.noalias() += -2.0 * ((Z_ * WQa) * a.transpose());
  grad.noalias() += 2.0 * (hub * a.transpose());
  grad.noalias() += 2.0 * ((Z_ * Wr) * a.transpose());
  grad.noalias() += 2.0 * (Za * Wr.transpose());
  grad.noalias() += -2.0 * (hb_ell_ * a.transpose());
  return grad;
}

Matrix ObjectiveEvaluator::design_gradient(
    const std::vector<Vector>& contrasts) const {
  Matrix grad = Matrix::Zero(Z_.rows(), Z_.cols());
  for (const Vector& c : contrasts) grad += design_gradient(c);
  return grad;
}

Vector ObjectiveEvaluator::contrast_gradient(const Vector& c_Z) const {
  const Vector a = gram_inv_ * c_Z;
  const Vector u = ZtH_.transpose() * a;
  const double bracket = assembled_.phiw_sum + trace_term_;
  Vector grad = 2.0 * bracket * a;
  grad.noalias() += 2.0 * (gram_inv_ * (ZtH_ * assembled_.phi_b.cwiseProduct(u)));
  grad.noalias() -= 2.0 * (gram_inv_ * r_);
  return grad;
}

double objective_value(const Matrix& Z, const Vector& c_Z,
                       const AssembledObjective& assembled) {
  return ObjectiveEvaluator(Z, assembled).value(c_Z);
}

double objective_value(const Matrix& Z, const std::vector<Vector>& contrasts,
                       const AssembledObjective& assembled) {
  return ObjectiveEvaluator(Z, assembled).value(contrasts);
}

Matrix grad_design(const Matrix& Z, const Vector& c_Z,
                   const AssembledObjective& assembled) {
  return ObjectiveEvaluator(Z, assembled).design_gradient(c_Z);
}

Matrix grad_design(const Matrix& Z, const std::vector<Vector>& contrasts,
                   const AssembledObjective& assembled) {
  return ObjectiveEvaluator(Z, assembled).design_gradient(contrasts);
}

Vector grad_contrast(const Matrix& Z, const Vector& c_Z,
                     const AssembledObjective& assembled) {
  return ObjectiveEvaluator(Z, assembled).contrast_gradient(c_Z);
}

}  // namespace smartdm
