#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "smartdm/nlp.hpp"
#include "smartdm/rng.hpp"
#include "support.hpp"

using namespace smartdm;
using namespace smartdm::nlp;
using namespace smartdm::testsupport;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fixed-matrix stand-in so the subproblem machinery can be driven directly.
struct ExplicitHessian : HessianModel {
  Matrix B;
  explicit ExplicitHessian(Matrix b) : B(std::move(b)) {}
  void reset(Index n) override { B = Matrix::Identity(n, n); }
  Vector apply(const Vector& v) const override { return B * v; }
  void update(const Vector&, const Vector&) override {}
};

Problem quadratic_problem(const Matrix& Q, const Vector& b) {
  Problem out;
  out.dim = Q.rows();
  out.objective = [Q, b](const Vector& x) {
    return 0.5 * x.dot(Q * x) + b.dot(x);
  };
  out.gradient = [Q, b](const Vector& x) { return Vector(Q * x + b); };
  return out;
}

}  // namespace

TEST_CASE("box projection") {
  Vector z(3), l(3), u(3);
  z << -5.0, 0.5, 9.0;
  l.setZero();
  u.setOnes();
  const Vector projected = box_projection(z, l, u);
  CHECK(projected(0) == 0.0);
  CHECK(projected(1) == 0.5);
  CHECK(projected(2) == 1.0);

  SUBCASE("inside stays put") {
    Vector inside(3);
    inside << 0.1, 0.2, 0.9;
    CHECK((box_projection(inside, l, u) - inside).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("idempotent on random points") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Vector x = 3.0 * random_vector(3, 900 + seed);
      const Vector once = box_projection(x, l, u);
      CHECK((box_projection(once, l, u) - once).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("kkt residual") {
  Vector l = Vector::Zero(2);
  Vector u = Vector::Ones(2);
  SUBCASE("zero gradient at an interior point") {
    Vector x = Vector::Constant(2, 0.5);
    CHECK(kkt_residual(x, Vector::Zero(2), l, u) == 0.0);
  }
  SUBCASE("active lower bound absorbs a positive gradient") {
    Vector x(2), g(2);
    x << 0.0, 0.5;
    g << 3.0, 0.0;  // pushes below the lower bound; projection clips it
    CHECK(kkt_residual(x, g, l, u) == 0.0);
  }
  SUBCASE("matches the componentwise definition on random points") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Vector x = box_projection(random_vector(4, 700 + seed),
                                      Vector::Zero(4), Vector::Ones(4));
      const Vector g = random_vector(4, 800 + seed);
      double expected = 0.0;
      for (Index i = 0; i < 4; ++i) {
        const double moved = std::clamp(x(i) - g(i), 0.0, 1.0);
        expected = std::max(expected, std::abs(x(i) - moved));
      }
      CHECK(kkt_residual(x, g, Vector::Zero(4), Vector::Ones(4)) ==
            doctest::Approx(expected).epsilon(1e-15));
    }
  }
}

TEST_CASE("augmented lagrangian value and gradient") {
  Problem problem = quadratic_problem(2.0 * Matrix::Identity(2, 2),
                                      Vector::Zero(2));
  problem.eq_count = 1;
  problem.eq = [](const Vector& x) {
    return Vector(Vector::Constant(1, x(0) + x(1) - 1.0));
  };
  problem.eq_jac_t = [](const Vector&, const Vector& w) {
    Vector jt(2);
    jt << w(0), w(0);
    return jt;
  };

  SUBCASE("feasible point reduces to the objective") {
    Vector x(2);
    x << 0.3, 0.7;
    const auto al = augmented_lagrangian(x, Vector::Ones(1), 5.0, problem);
    CHECK(al.value == doctest::Approx(problem.objective(x)).epsilon(1e-14));
  }
  SUBCASE("zero multiplier adds the pure penalty") {
    Vector x(2);
    x << 1.0, 1.0;  // c = 1
    const auto al = augmented_lagrangian(x, Vector::Zero(1), 2.0, problem);
    CHECK(al.value ==
          doctest::Approx(problem.objective(x) + 1.0).epsilon(1e-14));
  }
  SUBCASE("gradient matches finite differences") {
    const Vector x = random_vector(2, 61);
    const Vector lambda = random_vector(1, 62);
    const double mu = 3.5;
    const auto al = augmented_lagrangian(x, lambda, mu, problem);
    const double eps = 1e-6;
    for (Index i = 0; i < 2; ++i) {
      Vector plus = x, minus = x;
      plus(i) += eps;
      minus(i) -= eps;
      const double fd =
          (augmented_lagrangian(plus, lambda, mu, problem).value -
           augmented_lagrangian(minus, lambda, mu, problem).value) /
          (2.0 * eps);
      CHECK(al.gradient(i) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("trust region update branches") {
  Vector long_step = Vector::Constant(2, 0.9);
  Vector short_step = Vector::Constant(2, 0.1);
  CHECK(trust_region_update(0.9, long_step, 1.0) == 2.0);
  CHECK(trust_region_update(0.9, short_step, 1.0) == 1.0);
  CHECK(trust_region_update(0.5, long_step, 1.0) == 1.0);
  CHECK(trust_region_update(0.01, short_step, 1.0) == 0.5);
}

TEST_CASE("slack transform") {
  Problem problem = quadratic_problem(2.0 * Matrix::Identity(1, 1),
                                      Vector::Constant(1, -2.0));
  SUBCASE("no inequalities is the identity") {
    const Problem same = slack_transform(problem);
    CHECK(same.dim == problem.dim);
    CHECK(same.eq_count == 0);
  }

  problem.ineq_count = 1;
  problem.ineq = [](const Vector& x) {
    return Vector(Vector::Constant(1, x(0) - 2.0));
  };
  problem.ineq_jac_t = [](const Vector&, const Vector& w) {
    return Vector(Vector::Constant(1, w(0)));
  };

  SUBCASE("one inequality becomes an equality plus slack bound") {
    const Problem transformed = slack_transform(problem);
    CHECK(transformed.dim == 2);
    CHECK(transformed.eq_count == 1);
    Vector x(2);
    x << 3.0, 1.0;
    CHECK(transformed.eq(x)(0) == doctest::Approx(0.0));  // 3 - 2 - 1
    CHECK(transformed.lower(1) == 0.0);
    CHECK(transformed.upper(1) == kInf);
  }
  SUBCASE("solving through the transform finds the active inequality") {
    // min (x-1)^2 s.t. x >= 2 -> x* = 2 with the slack at its bound.
    const SolveReport report =
        solve(problem, Vector::Constant(1, 5.0), SolverOptions{});
    CHECK(report.converged);
    CHECK(report.x(0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(report.kkt <= 1e-6);
  }
}

TEST_CASE("dense SR1 recovers a quadratic's Hessian") {
  const Index n = 6;
  Matrix Q = random_matrix(n, n, 71);
  Q = Matrix((Q + Q.transpose()) / 2.0);
  DenseSr1 sr1;
  sr1.reset(n);
  for (Index i = 0; i < n; ++i) {
    const Vector s = Vector::Unit(n, i);
    sr1.update(s, Q * s);
  }
  CHECK((sr1.matrix() - Q).cwiseAbs().maxCoeff() < 1e-8);

  SUBCASE("degenerate update is skipped") {
    const Matrix before = sr1.matrix();
    const Vector s = random_vector(n, 72);
    sr1.update(s, sr1.apply(s));  // r = 0, no information
    CHECK((sr1.matrix() - before).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("dense BFGS stays positive definite under curvature") {
  const Index n = 5;
  Matrix Q = random_matrix(n, n, 81);
  Q = Matrix(Q * Q.transpose() +
             static_cast<double>(n) * Matrix::Identity(n, n));
  DenseBfgs bfgs;
  bfgs.reset(n);
  for (std::uint64_t k = 0; k < 30; ++k) {
    const Vector s = random_vector(n, 820 + k);
    bfgs.update(s, Q * s);
    Eigen::SelfAdjointEigenSolver<Matrix> eigs(bfgs.matrix());
    CHECK(eigs.eigenvalues().minCoeff() > 0.0);
  }
  SUBCASE("nonpositive curvature is skipped") {
    const Matrix before = bfgs.matrix();
    const Vector s = random_vector(n, 83);
    bfgs.update(s, Vector(-s));
    CHECK((bfgs.matrix() - before).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("limited-memory models satisfy the stored secant pairs") {
  const Index n = 8;
  Matrix Q = random_matrix(n, n, 91);
  Q = Matrix(Q * Q.transpose() +
             static_cast<double>(n) * Matrix::Identity(n, n));

  LimitedSr1 lsr1(16);
  lsr1.reset(n);
  std::vector<Vector> steps;
  for (Index i = 0; i < n; ++i) {
    const Vector s = Vector::Unit(n, i);
    lsr1.update(s, Q * s);
    steps.push_back(s);
  }
  for (const auto& s : steps) {
    CHECK((lsr1.apply(s) - Q * s).cwiseAbs().maxCoeff() < 1e-6);
  }

  LimitedBfgs lbfgs(16);
  lbfgs.reset(n);
  Vector last_s, last_y;
  for (std::uint64_t k = 0; k < 6; ++k) {
    last_s = random_vector(n, 920 + k);
    last_y = Q * last_s;
    lbfgs.update(last_s, last_y);
  }
  // BFGS always reproduces the most recent secant pair.
  CHECK((lbfgs.apply(last_s) - last_y).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("steihaug subproblem behavior") {
  const Index n = 4;
  SUBCASE("positive definite and unconstrained reaches the Newton point") {
    Matrix Q = random_matrix(n, n, 101);
    Q = Matrix(Q * Q.transpose() +
               static_cast<double>(n) * Matrix::Identity(n, n));
    const ExplicitHessian hess{Q};
    const Vector g = random_vector(n, 102);
    const Vector lo = Vector::Constant(n, -1e6);
    const Vector hi = Vector::Constant(n, 1e6);
    const Vector cauchy = nlp::detail::cauchy_point(g, hess, lo, hi);
    const Vector step =
        nlp::detail::steihaug_refine(g, hess, cauchy, lo, hi, 1e-8);
    CHECK((Q * step + g).norm() < 1e-6 * g.norm());
    CHECK((Q * step + g).norm() <= 1e-8);
  }
  SUBCASE("negative curvature stops on the trust-region boundary") {
    const double radius = 0.7;
    const ExplicitHessian hess{Matrix(-Matrix::Identity(n, n))};
    const Vector g = random_vector(n, 103);
    const Vector lo = Vector::Constant(n, -radius);
    const Vector hi = Vector::Constant(n, radius);
    const Vector cauchy = nlp::detail::cauchy_point(g, hess, lo, hi);
    const Vector step = nlp::detail::steihaug_refine(g, hess, cauchy, lo, hi);
    CHECK(step.cwiseAbs().maxCoeff() ==
          doctest::Approx(radius).epsilon(1e-10));
    CHECK(step.cwiseAbs().maxCoeff() <= radius + 1e-12);
  }
}

TEST_CASE("separable bound-constrained quadratic finds the analytic active set") {
  const Index n = 5;
  Vector diag(n), b(n);
  diag << 1.0, 2.0, 4.0, 0.5, 3.0;
  b << -3.0, 1.0, -0.2, 2.0, -10.0;
  Problem problem = quadratic_problem(Matrix(diag.asDiagonal()), b);
  problem.lower = Vector::Constant(n, -1.0);
  problem.upper = Vector::Constant(n, 1.0);

  const SolveReport report = solve(problem, Vector::Zero(n), SolverOptions{});
  CHECK(report.converged);
  for (Index i = 0; i < n; ++i) {
    const double analytic = std::clamp(-b(i) / diag(i), -1.0, 1.0);
    CHECK(report.x(i) == doctest::Approx(analytic).epsilon(1e-6));
  }
}

TEST_CASE("equality constrained quadratic matches the KKT system") {
  const Index n = 6, m = 2;
  Matrix Q = random_matrix(n, n, 111);
  Q = Matrix(Q * Q.transpose() +
             static_cast<double>(n) * Matrix::Identity(n, n));
  const Vector b = random_vector(n, 112);
  const Matrix A = random_matrix(m, n, 113);
  const Vector rhs = random_vector(m, 114);

  Problem problem = quadratic_problem(Q, b);
  problem.eq_count = m;
  problem.eq = [A, rhs](const Vector& x) { return Vector(A * x - rhs); };
  problem.eq_jac_t = [A](const Vector&, const Vector& w) {
    return Vector(A.transpose() * w);
  };

  Matrix kkt(n + m, n + m);
  kkt.setZero();
  kkt.topLeftCorner(n, n) = Q;
  kkt.topRightCorner(n, m) = A.transpose();
  kkt.bottomLeftCorner(m, n) = A;
  Vector kkt_rhs(n + m);
  kkt_rhs.head(n) = -b;
  kkt_rhs.tail(m) = rhs;
  const Vector solution = kkt.fullPivLu().solve(kkt_rhs);

  SolverOptions options;
  options.tol_con = 1e-9;
  options.tol_grad = 1e-9;
  options.hessian = HessianKind::BFGS;
  const SolveReport report = solve(problem, Vector::Zero(n), options);
  CHECK(report.converged);
  CHECK((report.x - solution.head(n)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("scalar equality problem recovers the Lagrange multiplier") {
  // min x^2 s.t. x = 1: multiplier satisfies 2x - lambda = 0 at x = 1.
  Problem problem = quadratic_problem(2.0 * Matrix::Identity(1, 1),
                                      Vector::Zero(1));
  problem.eq_count = 1;
  problem.eq = [](const Vector& x) {
    return Vector(Vector::Constant(1, x(0) - 1.0));
  };
  problem.eq_jac_t = [](const Vector&, const Vector& w) { return w; };

  const SolveReport report = solve(problem, Vector::Zero(1), SolverOptions{});
  CHECK(report.converged);
  CHECK(report.x(0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(report.lambda(0) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(report.kkt <= 1e-6);
}

TEST_CASE("bound constrained Rosenbrock") {
  Problem problem;
  problem.dim = 2;
  problem.objective = [](const Vector& x) {
    const double a = 1.0 - x(0);
    const double b = x(1) - x(0) * x(0);
    return a * a + 100.0 * b * b;
  };
  problem.gradient = [](const Vector& x) {
    Vector g(2);
    const double b = x(1) - x(0) * x(0);
    g(0) = -2.0 * (1.0 - x(0)) - 400.0 * x(0) * b;
    g(1) = 200.0 * b;
    return g;
  };
  problem.lower = Vector::Zero(2);
  problem.upper = Vector::Constant(2, 0.5);

  const SolveReport report =
      solve(problem, Vector::Constant(2, 0.25), SolverOptions{});
  CHECK(report.converged);

  // Grid-refined oracle over the box.
  Vector best(2);
  double best_value = kInf;
  const int grid = 200;
  for (int i = 0; i <= grid; ++i) {
    for (int j = 0; j <= grid; ++j) {
      Vector x(2);
      x << 0.5 * i / grid, 0.5 * j / grid;
      const double value = problem.objective(x);
      if (value < best_value) {
        best_value = value;
        best = x;
      }
    }
  }
  for (int refine = 1; refine <= 3; ++refine) {
    const double span = 0.5 / grid / std::pow(10.0, refine - 1);
    const Vector center = best;
    for (int i = -10; i <= 10; ++i) {
      for (int j = -10; j <= 10; ++j) {
        Vector x = center;
        x(0) = std::clamp(x(0) + span * i / 10.0, 0.0, 0.5);
        x(1) = std::clamp(x(1) + span * j / 10.0, 0.0, 0.5);
        const double value = problem.objective(x);
        if (value < best_value) {
          best_value = value;
          best = x;
        }
      }
    }
  }
  CHECK((report.x - best).cwiseAbs().maxCoeff() < 1e-4);
}
