#ifndef SMARTDM_NLP_HPP
#define SMARTDM_NLP_HPP

#include <deque>
#include <functional>
#include <memory>
#include <string>

#include "smartdm/types.hpp"

namespace smartdm::nlp {

// General smooth problem
//   min f(x)  s.t.  c(x) = 0,  g(x) >= 0,  l <= x <= u.
// Constraints are vectorized; only first derivatives are required. Jacobians
// enter through transpose-product callbacks so structured constraints never
// have to materialize a dense matrix.
struct Problem {
  Index dim = 0;
  std::function<double(const Vector&)> objective;
  std::function<Vector(const Vector&)> gradient;

  Index eq_count = 0;
  std::function<Vector(const Vector&)> eq;  // values of c(x)
  std::function<Vector(const Vector&, const Vector&)> eq_jac_t;  // J(x)^T w

  Index ineq_count = 0;
  std::function<Vector(const Vector&)> ineq;  // values of g(x)
  std::function<Vector(const Vector&, const Vector&)> ineq_jac_t;

  Vector lower;  // empty means unbounded below
  Vector upper;

  Vector lower_or_default() const;
  Vector upper_or_default() const;
};

// Rewrites g(x) >= 0 as g(x) - s = 0 with slack bounds s >= 0. The returned
// problem has dim + ineq_count variables and no inequality constraints.
Problem slack_transform(const Problem& problem);

// Elementwise clamp of z to [l, u].
Vector box_projection(const Vector& z, const Vector& l, const Vector& u);

// || x - P(x - grad, l, u) ||_inf, the projected stationarity residual.
double kkt_residual(const Vector& x, const Vector& grad, const Vector& l,
                    const Vector& u);

struct AugmentedLagrangian {
  double value;
  Vector gradient;
};

// f(x) - lambda^T c(x) + (mu/2) ||c(x)||^2 and its gradient.
AugmentedLagrangian augmented_lagrangian(const Vector& x, const Vector& lambda,
                                         double mu, const Problem& problem);

// Trust-region radius update from the agreement ratio rho and the step just
// taken (infinity norms throughout).
double trust_region_update(double rho, const Vector& step, double radius);

enum class HessianKind { SR1, BFGS, LimitedSR1, LimitedBFGS };

// Quasi-Newton approximation B to the Hessian of the augmented Lagrangian.
class HessianModel {
 public:
  virtual ~HessianModel() = default;
  virtual void reset(Index n) = 0;
  virtual Vector apply(const Vector& v) const = 0;
  virtual void update(const Vector& s, const Vector& y) = 0;
};

class DenseSr1 : public HessianModel {
 public:
  void reset(Index n) override;
  Vector apply(const Vector& v) const override;
  void update(const Vector& s, const Vector& y) override;
  const Matrix& matrix() const { return B_; }

 private:
  Matrix B_;
};

class DenseBfgs : public HessianModel {
 public:
  void reset(Index n) override;
  Vector apply(const Vector& v) const override;
  void update(const Vector& s, const Vector& y) override;
  const Matrix& matrix() const { return B_; }

 private:
  Matrix B_;
};

// Limited-memory variants: the last `memory` update pairs in compact form
// around a scaled-identity seed.
class LimitedSr1 : public HessianModel {
 public:
  explicit LimitedSr1(int memory = 10) : memory_(memory) {}
  void reset(Index n) override;
  Vector apply(const Vector& v) const override;
  void update(const Vector& s, const Vector& y) override;

 private:
  void rebuild();
  int memory_;
  Index n_ = 0;
  double gamma_ = 1.0;
  std::deque<std::pair<Vector, Vector>> pairs_;
  Matrix psi_;       // Y - gamma S
  Matrix middle_;    // D + L + L^T - gamma S^T S
  Eigen::FullPivLU<Matrix> middle_lu_;
  bool usable_ = false;
};

class LimitedBfgs : public HessianModel {
 public:
  explicit LimitedBfgs(int memory = 10) : memory_(memory) {}
  void reset(Index n) override;
  Vector apply(const Vector& v) const override;
  void update(const Vector& s, const Vector& y) override;

 private:
  void rebuild();
  int memory_;
  Index n_ = 0;
  double gamma_ = 1.0;
  std::deque<std::pair<Vector, Vector>> pairs_;
  Matrix block_;  // [gamma S, Y], n x 2k
  Eigen::FullPivLU<Matrix> middle_lu_;
  bool usable_ = false;
};

std::unique_ptr<HessianModel> make_hessian(HessianKind kind, int memory = 10);

struct SolverOptions {
  double mu0 = 10.0;
  double theta_h = 10.0;       // penalty growth on constraint stall
  double theta_l = 0.5;        // penalty decrease on inner-solve failure
  double eta_accept = 0.1;     // trust-region acceptance threshold
  double initial_radius = 1.0;
  double tol_con = 1e-6;       // final constraint tolerance
  double tol_grad = 1e-6;      // final KKT tolerance (mu = 0 Lagrangian)
  int max_outer = 200;
  int max_inner = 500;
  int max_inner_failures = 8;
  HessianKind hessian = HessianKind::SR1;
  int memory = 10;
  bool precondition = false;
  bool verbose = false;
};

struct SolveReport {
  Vector x;
  Vector lambda;
  double objective = 0.0;
  double kkt = 0.0;
  double constraint_violation = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged = false;
  std::string message;
};

// Augmented-Lagrangian outer loop over trust-region inner solves. Inequality
// constraints are removed up front by slack_transform; the report's x is
// truncated back to the original variables.
SolveReport solve(const Problem& problem, const Vector& x0,
                  const SolverOptions& options = {});

namespace detail {

// Generalized Cauchy point of q(p) = g.p + p.B p / 2 over the box [lo, hi],
// found by walking the projected steepest-descent path breakpoints.
Vector cauchy_point(const Vector& g, const HessianModel& B, const Vector& lo,
                    const Vector& hi);

// Steihaug truncated CG for the reduced subproblem on the free variables of
// the Cauchy point; the returned step is the full-space p (Cauchy plus
// subspace refinement) staying inside [lo, hi]. A negative tolerance selects
// the forcing rule min(0.5, sqrt(|g~|)) |g~|.
Vector steihaug_refine(const Vector& g, const HessianModel& B,
                       const Vector& cauchy, const Vector& lo,
                       const Vector& hi, double cg_tol = -1.0);

}  // namespace detail

}  // namespace smartdm::nlp

#endif
