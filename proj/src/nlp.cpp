#include "smartdm/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <vector>

namespace smartdm::nlp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector default_bound(Index n, double fill) {
  return Vector::Constant(n, fill);
}

}  // namespace

Vector Problem::lower_or_default() const {
  return lower.size() > 0 ? lower : default_bound(dim, -kInf);
}

Vector Problem::upper_or_default() const {
  return upper.size() > 0 ? upper : default_bound(dim, kInf);
}

Problem slack_transform(const Problem& problem) {
  if (problem.ineq_count == 0) return problem;
  const Index n = problem.dim;
  const Index L = problem.ineq_count;
  const Index m = problem.eq_count;

  Problem out;
  out.dim = n + L;
  out.objective = [n, inner = problem.objective](const Vector& x) {
    return inner(x.head(n));
  };
  out.gradient = [n, L, inner = problem.gradient](const Vector& x) {
    Vector g = Vector::Zero(n + L);
    g.head(n) = inner(x.head(n));
    return g;
  };
  out.eq_count = m + L;
  out.eq = [n, m, L, eq = problem.eq, ineq = problem.ineq](const Vector& x) {
    Vector c(m + L);
    if (m > 0) c.head(m) = eq(x.head(n));
    c.tail(L) = ineq(x.head(n)) - x.tail(L);
    return c;
  };
  out.eq_jac_t = [n, m, L, eq_jt = problem.eq_jac_t,
                  ineq_jt = problem.ineq_jac_t](const Vector& x,
                                                const Vector& w) {
    Vector jt = Vector::Zero(n + L);
    if (m > 0) jt.head(n) = eq_jt(x.head(n), w.head(m));
    jt.head(n) += ineq_jt(x.head(n), w.tail(L));
    jt.tail(L) = -w.tail(L);
    return jt;
  };
  out.lower = Vector(n + L);
  out.lower.head(n) = problem.lower_or_default();
  out.lower.tail(L).setZero();
  out.upper = Vector(n + L);
  out.upper.head(n) = problem.upper_or_default();
  out.upper.tail(L).setConstant(kInf);
  return out;
}

Vector box_projection(const Vector& z, const Vector& l, const Vector& u) {
  return z.cwiseMax(l).cwiseMin(u);
}

double kkt_residual(const Vector& x, const Vector& grad, const Vector& l,
                    const Vector& u) {
  return (x - box_projection(x - grad, l, u)).cwiseAbs().maxCoeff();
}

AugmentedLagrangian augmented_lagrangian(const Vector& x, const Vector& lambda,
                                         double mu, const Problem& problem) {
  AugmentedLagrangian out;
  out.value = problem.objective(x);
  out.gradient = problem.gradient(x);
  if (problem.eq_count > 0) {
    const Vector c = problem.eq(x);
    out.value += -lambda.dot(c) + 0.5 * mu * c.squaredNorm();
    out.gradient += problem.eq_jac_t(x, Vector(mu * c - lambda));
  }
  return out;
}

double trust_region_update(double rho, const Vector& step, double radius) {
  if (rho > 0.75) {
    return step.cwiseAbs().maxCoeff() > 0.8 * radius ? 2.0 * radius : radius;
  }
  if (rho >= 0.1) return radius;
  return 0.5 * radius;
}

// ---------------------------------------------------------------------------
// Quasi-Newton models
// ---------------------------------------------------------------------------

void DenseSr1::reset(Index n) { B_ = Matrix::Identity(n, n); }

Vector DenseSr1::apply(const Vector& v) const { return B_ * v; }

void DenseSr1::update(const Vector& s, const Vector& y) {
  if (!s.allFinite() || !y.allFinite()) return;
  const Vector r = y - B_ * s;
  const double denom = r.dot(s);
  // The comparison must also skip the exact r = 0 case (0 > 0 is false).
  if (!(std::abs(denom) > 1e-8 * r.norm() * s.norm())) return;
  B_.noalias() += (r * r.transpose()) / denom;
}

void DenseBfgs::reset(Index n) { B_ = Matrix::Identity(n, n); }

Vector DenseBfgs::apply(const Vector& v) const { return B_ * v; }

void DenseBfgs::update(const Vector& s, const Vector& y) {
  if (!s.allFinite() || !y.allFinite()) return;
  const double sy = s.dot(y);
  if (!(sy > 1e-10)) return;
  const Vector Bs = B_ * s;
  const double sBs = s.dot(Bs);
  if (sBs <= 0.0) return;
  B_.noalias() += (y * y.transpose()) / sy - (Bs * Bs.transpose()) / sBs;
}

void LimitedSr1::reset(Index n) {
  n_ = n;
  gamma_ = 1.0;
  pairs_.clear();
  usable_ = false;
}

Vector LimitedSr1::apply(const Vector& v) const {
  Vector out = gamma_ * v;
  if (usable_) {
    out.noalias() += psi_ * middle_lu_.solve(Vector(psi_.transpose() * v));
  }
  return out;
}

void LimitedSr1::update(const Vector& s, const Vector& y) {
  if (!s.allFinite() || !y.allFinite()) return;
  const Vector r = y - apply(s);
  if (!(std::abs(r.dot(s)) > 1e-8 * r.norm() * s.norm())) return;
  const double sy = s.dot(y);
  if (sy > 1e-12 * s.norm() * y.norm()) gamma_ = y.squaredNorm() / sy;
  pairs_.emplace_back(s, y);
  while (static_cast<int>(pairs_.size()) > memory_) pairs_.pop_front();
  rebuild();
}

void LimitedSr1::rebuild() {
  while (!pairs_.empty()) {
    const Index k = static_cast<Index>(pairs_.size());
    Matrix S(n_, k), Y(n_, k);
    for (Index j = 0; j < k; ++j) {
      S.col(j) = pairs_[static_cast<size_t>(j)].first;
      Y.col(j) = pairs_[static_cast<size_t>(j)].second;
    }
    const Matrix StY = S.transpose() * Y;
    Matrix middle = StY.diagonal().asDiagonal();
    middle += StY.template triangularView<Eigen::StrictlyLower>();
    middle += Matrix(StY.template triangularView<Eigen::StrictlyLower>())
                  .transpose();
    middle -= gamma_ * (S.transpose() * S);
    middle_lu_.compute(middle);
    if (middle_lu_.isInvertible()) {
      psi_ = Y - gamma_ * S;
      middle_ = middle;
      usable_ = true;
      return;
    }
    pairs_.pop_front();  // stale curvature made the middle system singular
  }
  usable_ = false;
}

void LimitedBfgs::reset(Index n) {
  n_ = n;
  gamma_ = 1.0;
  pairs_.clear();
  usable_ = false;
}

Vector LimitedBfgs::apply(const Vector& v) const {
  Vector out = gamma_ * v;
  if (usable_) {
    out.noalias() -= block_ * middle_lu_.solve(Vector(block_.transpose() * v));
  }
  return out;
}

void LimitedBfgs::update(const Vector& s, const Vector& y) {
  if (!s.allFinite() || !y.allFinite()) return;
  if (!(s.dot(y) > 1e-10)) return;
  gamma_ = y.squaredNorm() / s.dot(y);
  pairs_.emplace_back(s, y);
  while (static_cast<int>(pairs_.size()) > memory_) pairs_.pop_front();
  rebuild();
}

void LimitedBfgs::rebuild() {
  while (!pairs_.empty()) {
    const Index k = static_cast<Index>(pairs_.size());
    Matrix S(n_, k), Y(n_, k);
    for (Index j = 0; j < k; ++j) {
      S.col(j) = pairs_[static_cast<size_t>(j)].first;
      Y.col(j) = pairs_[static_cast<size_t>(j)].second;
    }
    const Matrix StY = S.transpose() * Y;
    Matrix middle(2 * k, 2 * k);
    middle.topLeftCorner(k, k) = gamma_ * (S.transpose() * S);
    middle.topRightCorner(k, k) = StY.template triangularView<Eigen::StrictlyLower>();
    middle.bottomLeftCorner(k, k) = middle.topRightCorner(k, k).transpose();
    middle.bottomRightCorner(k, k) =
        Matrix(Vector(-StY.diagonal()).asDiagonal());
    middle_lu_.compute(middle);
    if (middle_lu_.isInvertible()) {
      block_.resize(n_, 2 * k);
      block_.leftCols(k) = gamma_ * S;
      block_.rightCols(k) = Y;
      usable_ = true;
      return;
    }
    pairs_.pop_front();
  }
  usable_ = false;
}

std::unique_ptr<HessianModel> make_hessian(HessianKind kind, int memory) {
  switch (kind) {
    case HessianKind::SR1: return std::make_unique<DenseSr1>();
    case HessianKind::BFGS: return std::make_unique<DenseBfgs>();
    case HessianKind::LimitedSR1: return std::make_unique<LimitedSr1>(memory);
    case HessianKind::LimitedBFGS: return std::make_unique<LimitedBfgs>(memory);
  }
  throw InvalidArgument("unknown hessian kind");
}

// ---------------------------------------------------------------------------
// Trust-region subproblem over a box
// ---------------------------------------------------------------------------

namespace detail {

Vector cauchy_point(const Vector& g, const HessianModel& B, const Vector& lo,
                    const Vector& hi) {
  const Index n = g.size();
  Vector d = -g;
  Vector breakpoints(n);
  for (Index i = 0; i < n; ++i) {
    double t;
    if (d(i) > 0.0) {
      t = hi(i) / d(i);
    } else if (d(i) < 0.0) {
      t = lo(i) / d(i);
    } else {
      t = kInf;
    }
    if (t <= 0.0) {  // pinned against its bound from the start
      d(i) = 0.0;
      t = kInf;
    }
    breakpoints(i) = t;
  }
  if (d.isZero(0.0)) return Vector::Zero(n);

  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return breakpoints(a) < breakpoints(b);
  });

  Vector p = Vector::Zero(n);
  Vector bd = B.apply(d);
  Vector bp = Vector::Zero(n);
  double t_cur = 0.0;
  size_t next = 0;
  int segments = 0;
  const int max_segments = 64;

  while (next < order.size() && segments < max_segments) {
    const double t_next = breakpoints(order[next]);
    if (!std::isfinite(t_next)) break;  // remaining coordinates never bind
    const double seg_len = t_next - t_cur;
    const double f1 = g.dot(d) + bp.dot(d);
    const double f2 = d.dot(bd);
    if (f1 >= 0.0) return p;
    if (f2 > 0.0) {
      const double t_star = -f1 / f2;
      if (t_star < seg_len) return p + t_star * d;
    }
    if (seg_len > 0.0) {
      p += seg_len * d;
      bp += seg_len * bd;
    }
    t_cur = t_next;
    while (next < order.size() && breakpoints(order[next]) <= t_cur) {
      const Index i = order[next];
      if (d(i) != 0.0) {
        p(i) = d(i) > 0.0 ? hi(i) : lo(i);  // land exactly on the bound
        bd -= d(i) * B.apply(Vector(Vector::Unit(n, i)));
        d(i) = 0.0;
      }
      ++next;
    }
    ++segments;
    if (d.isZero(0.0)) return p;
  }

  // Ran out of breakpoints or hit the segment cap: finish the current ray.
  const double f1 = g.dot(d) + bp.dot(d);
  const double f2 = d.dot(bd);
  if (f1 < 0.0 && f2 > 0.0) {
    double t_star = -f1 / f2;
    if (next < order.size() && std::isfinite(breakpoints(order[next]))) {
      t_star = std::min(t_star, breakpoints(order[next]) - t_cur);
    }
    p += t_star * d;
  }
  return p;
}

Vector steihaug_refine(const Vector& g, const HessianModel& B,
                       const Vector& cauchy, const Vector& lo,
                       const Vector& hi, double cg_tol) {
  const Index n = g.size();
  std::vector<Index> free_set;
  free_set.reserve(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double span = hi(i) - lo(i);
    const double eps = 1e-10 * std::max(1.0, span);
    if (cauchy(i) - lo(i) > eps && hi(i) - cauchy(i) > eps) {
      free_set.push_back(i);
    }
  }
  const Index nf = static_cast<Index>(free_set.size());
  if (nf == 0) return cauchy;

  auto lift = [&](const Vector& v) {
    Vector full = Vector::Zero(n);
    for (Index j = 0; j < nf; ++j) full(free_set[static_cast<size_t>(j)]) = v(j);
    return full;
  };
  auto restrict_to_free = [&](const Vector& full) {
    Vector v(nf);
    for (Index j = 0; j < nf; ++j) v(j) = full(free_set[static_cast<size_t>(j)]);
    return v;
  };

  const Vector g_reduced = restrict_to_free(g + B.apply(cauchy));
  const double g_norm = g_reduced.norm();
  if (g_norm == 0.0) return cauchy;
  if (cg_tol < 0.0) cg_tol = std::min(0.5, std::sqrt(g_norm)) * g_norm;

  Vector v = Vector::Zero(nf);
  Vector p_full = cauchy;  // cauchy + lift(v), kept in sync
  Vector r = -g_reduced;
  Vector dir = r;
  double r_sq = r.squaredNorm();

  // Largest step along dir keeping cauchy + lift(v + tau dir) inside the box.
  auto max_feasible = [&](const Vector& direction) {
    double tau = kInf;
    for (Index j = 0; j < nf; ++j) {
      const Index i = free_set[static_cast<size_t>(j)];
      const double dj = direction(j);
      if (dj > 0.0) {
        tau = std::min(tau, (hi(i) - p_full(i)) / dj);
      } else if (dj < 0.0) {
        tau = std::min(tau, (lo(i) - p_full(i)) / dj);
      }
    }
    return std::max(tau, 0.0);
  };

  const Index max_iter = 2 * nf;
  for (Index iter = 0; iter < max_iter; ++iter) {
    const Vector Bd = restrict_to_free(B.apply(lift(dir)));
    const double dBd = dir.dot(Bd);
    if (dBd <= 0.0) {
      const double tau = max_feasible(dir);
      if (std::isfinite(tau)) v += tau * dir;
      break;
    }
    const double alpha = r_sq / dBd;
    const double tau = max_feasible(dir);
    if (alpha >= tau) {
      v += tau * dir;
      break;
    }
    v += alpha * dir;
    p_full = cauchy + lift(v);
    r -= alpha * Bd;
    const double r_sq_new = r.squaredNorm();
    if (std::sqrt(r_sq_new) <= cg_tol) break;
    dir = r + (r_sq_new / r_sq) * dir;
    r_sq = r_sq_new;
  }
  return cauchy + lift(v);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// F2: bound-constrained trust-region minimization of the augmented Lagrangian
// ---------------------------------------------------------------------------

namespace {

struct InnerResult {
  Vector x;
  bool success = false;
  int iterations = 0;
};

InnerResult inner_solve(Vector x, const Vector& lambda, double mu,
                        const Problem& problem, const Vector& lo_bound,
                        const Vector& hi_bound, HessianModel& hessian,
                        double& radius, double eta_grad,
                        const SolverOptions& options) {
  InnerResult result;
  AugmentedLagrangian current = augmented_lagrangian(x, lambda, mu, problem);

  for (int j = 1; j <= options.max_inner; ++j) {
    result.iterations = j;
    if (kkt_residual(x, current.gradient, lo_bound, hi_bound) <= eta_grad) {
      result.x = x;
      result.success = true;
      return result;
    }

    const Vector lo = (lo_bound - x).cwiseMax(-radius);
    const Vector hi = (hi_bound - x).cwiseMin(radius);
    const Vector cauchy =
        detail::cauchy_point(current.gradient, hessian, lo, hi);
    const Vector step =
        detail::steihaug_refine(current.gradient, hessian, cauchy, lo, hi);

    const double radius_floor = 1e-14 * std::max(1.0, x.cwiseAbs().maxCoeff());
    if (step.cwiseAbs().maxCoeff() < radius_floor) {
      radius *= 0.5;
      if (radius < radius_floor) break;
      continue;
    }

    const Vector trial_x = x + step;
    const AugmentedLagrangian trial =
        augmented_lagrangian(trial_x, lambda, mu, problem);
    const double predicted =
        -(current.gradient.dot(step) + 0.5 * step.dot(hessian.apply(step)));
    double rho = -1.0;
    if (std::isfinite(trial.value) && predicted > 0.0) {
      rho = (current.value - trial.value) / predicted;
    }

    // Curvature is gathered from rejected steps too.
    if (std::isfinite(trial.value) && trial.gradient.allFinite()) {
      hessian.update(step, trial.gradient - current.gradient);
    }
    radius = trust_region_update(rho, step, radius);
    if (rho > options.eta_accept) {
      x = trial_x;
      current = trial;
    }
    if (radius < radius_floor) break;
  }
  result.x = x;
  result.success =
      kkt_residual(x, current.gradient, lo_bound, hi_bound) <= eta_grad;
  return result;
}

}  // namespace

// ---------------------------------------------------------------------------
// F1: augmented-Lagrangian outer iteration
// ---------------------------------------------------------------------------

SolveReport solve(const Problem& original, const Vector& x0,
                  const SolverOptions& options) {
  Problem problem =
      original.ineq_count > 0 ? slack_transform(original) : original;

  Vector x(problem.dim);
  if (original.ineq_count > 0) {
    x.head(original.dim) = x0;
    x.tail(original.ineq_count) = original.ineq(x0).cwiseMax(0.0);
  } else {
    x = x0;
  }
  const Vector lo = problem.lower_or_default();
  const Vector hi = problem.upper_or_default();
  x = box_projection(x, lo, hi);

  Vector lambda = Vector::Zero(problem.eq_count);
  double mu = options.mu0;
  double eta_con = 1.0 / std::pow(mu, 0.1);
  double eta_grad = 1.0 / mu;
  const double eta_con_floor = 0.01 * options.tol_con;
  const double eta_grad_floor = 0.01 * options.tol_grad;

  auto hessian = make_hessian(options.hessian, options.memory);
  hessian->reset(problem.dim);
  double radius = options.initial_radius;

  SolveReport report;
  int consecutive_failures = 0;

  for (int k = 0; k < options.max_outer; ++k) {
    report.outer_iterations = k + 1;
    InnerResult inner =
        inner_solve(x, lambda, mu, problem, lo, hi, *hessian, radius,
                    std::max(eta_grad, eta_grad_floor), options);
    report.inner_iterations += inner.iterations;

    if (!inner.success) {
      if (++consecutive_failures > options.max_inner_failures) {
        throw SolverFailure("inner trust-region solve failed repeatedly");
      }
      mu *= options.theta_l;
      eta_con = 1.0 / std::pow(mu, 0.1);
      eta_grad = 1.0 / mu;
      radius = options.initial_radius;
      hessian->reset(problem.dim);  // curvature carries a mu J^T J term
      continue;
    }
    consecutive_failures = 0;
    x = inner.x;

    const Vector c =
        problem.eq_count > 0 ? problem.eq(x) : Vector(Vector::Zero(0));
    const double violation =
        c.size() > 0 ? c.cwiseAbs().maxCoeff() : 0.0;

    if (options.verbose) {
      std::fprintf(stderr,
                   "outer %3d  mu %9.2e  |c| %9.2e  eta_con %9.2e\n", k, mu,
                   violation, eta_con);
    }

    if (violation <= std::max(eta_con, eta_con_floor)) {
      const AugmentedLagrangian stationary =
          augmented_lagrangian(x, lambda, 0.0, problem);
      const double kkt = kkt_residual(x, stationary.gradient, lo, hi);
      if (violation <= options.tol_con && kkt <= options.tol_grad) {
        report.x = x.head(original.dim);
        report.lambda = lambda;
        report.objective = original.objective(report.x);
        report.kkt = kkt;
        report.constraint_violation = violation;
        report.converged = true;
        report.message = "converged";
        return report;
      }
      if (c.size() > 0) lambda -= mu * c;
      eta_con /= std::pow(mu, 0.9);
      eta_grad /= mu;
    } else {
      mu *= options.theta_h;
      eta_con = 1.0 / std::pow(mu, 0.1);
      eta_grad = 1.0 / mu;
      radius = options.initial_radius;
      hessian->reset(problem.dim);
    }
  }
  throw SolverFailure("reached the outer iteration cap without converging");
}

}  // namespace smartdm::nlp
