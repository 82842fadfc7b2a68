#ifndef SMARTDM_TYPES_HPP
#define SMARTDM_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace smartdm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Relative threshold below which a singular value counts as zero.
inline constexpr double kRankTolerance = 1e-10;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// Design matrix (Z or X) is rank deficient or its Gram matrix is too
// ill-conditioned to invert.
struct SingularDesign : Error {
  using Error::Error;
};

// Constraint system matrix (A^T A or C C^T) is singular.
struct SingularConstraint : Error {
  using Error::Error;
};

struct ZeroResidualVariance : Error {
  using Error::Error;
};

struct ZeroGaussMarkovVariance : Error {
  using Error::Error;
};

// c_X^T snr vanishes where a nonzero signal is required.
struct ZeroSignal : Error {
  using Error::Error;
};

struct InfeasibleStart : Error {
  using Error::Error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

struct SolverFailure : Error {
  using Error::Error;
};

// True when the smallest singular value exceeds kRankTolerance times the
// largest, i.e. the matrix has full column rank for our purposes.
bool has_full_column_rank(const Matrix& m);

// Condition number estimate of M^T M via singular values of M.
double gram_condition(const Matrix& m);

}  // namespace smartdm

#endif
