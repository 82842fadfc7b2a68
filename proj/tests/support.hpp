#ifndef SMARTDM_TESTS_SUPPORT_HPP
#define SMARTDM_TESTS_SUPPORT_HPP

#include <cstdint>
#include <vector>

#include "smartdm/glm.hpp"
#include "smartdm/objective.hpp"
#include "smartdm/rng.hpp"

namespace smartdm::testsupport {

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  KeyedRng rng(seed);
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = rng.next_normal();
  }
  return out;
}

inline Vector random_vector(Index size, std::uint64_t seed) {
  KeyedRng rng(seed);
  Vector out(size);
  for (Index i = 0; i < size; ++i) out(i) = rng.next_normal();
  return out;
}

// Gaussian matrices of this shape are full rank with probability one; the
// constructor double-checks anyway.
inline CandidateModel random_model(Index n, Index p, std::uint64_t seed,
                                   double w = 1.0, double phi = 0.5) {
  return CandidateModel(random_matrix(n, p, seed),
                        random_vector(p, seed ^ 0xa5a5), random_vector(p, seed ^ 0x5a5a),
                        w, phi);
}

inline ProblemSpec random_spec(Index n, Index p, Index m, std::uint64_t seed) {
  ProblemSpec spec;
  spec.n = n;
  spec.p = p;
  KeyedRng rng(seed ^ 0xdeadbeef);
  for (Index i = 0; i < m; ++i) {
    const Index cols = 1 + static_cast<Index>(rng.next_u64() % 3);
    const double w = rng.next_uniform(0.1, 2.0);
    const double phi = rng.next_uniform(0.05, 0.95);
    spec.models.push_back(
        random_model(n, cols, seed + static_cast<std::uint64_t>(i) * 31 + 1, w, phi));
  }
  return spec;
}

// Central finite differences of the objective in every design entry.
inline Matrix fd_design_gradient(const Matrix& Z, const Vector& c,
                                 const AssembledObjective& assembled,
                                 double eps) {
  Matrix out(Z.rows(), Z.cols());
  for (Index i = 0; i < Z.rows(); ++i) {
    for (Index j = 0; j < Z.cols(); ++j) {
      Matrix plus = Z, minus = Z;
      plus(i, j) += eps;
      minus(i, j) -= eps;
      out(i, j) = (objective_value(plus, c, assembled) -
                   objective_value(minus, c, assembled)) /
                  (2.0 * eps);
    }
  }
  return out;
}

inline Vector fd_contrast_gradient(const Matrix& Z, const Vector& c,
                                   const AssembledObjective& assembled,
                                   double eps) {
  Vector out(c.size());
  for (Index i = 0; i < c.size(); ++i) {
    Vector plus = c, minus = c;
    plus(i) += eps;
    minus(i) -= eps;
    out(i) = (objective_value(Z, plus, assembled) -
              objective_value(Z, minus, assembled)) /
             (2.0 * eps);
  }
  return out;
}

}  // namespace smartdm::testsupport

#endif
