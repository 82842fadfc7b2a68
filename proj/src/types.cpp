#include "smartdm/types.hpp"

#include <Eigen/SVD>

namespace smartdm {

bool has_full_column_rank(const Matrix& m) {
  if (m.size() == 0 || m.rows() < m.cols()) return false;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1) > kRankTolerance * sv(0);
}

double gram_condition(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  const double c = sv(0) / smin;
  return c * c;  // cond(M^T M) = cond(M)^2
}

}  // namespace smartdm
