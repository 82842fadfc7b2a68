#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "smartdm/pgd.hpp"
#include "support.hpp"

using namespace smartdm;
using namespace smartdm::testsupport;

TEST_CASE("constraint projectors") {
  SUBCASE("no constraints give identities") {
    const auto proj = constraint_projectors(Matrix(), Matrix(), 4);
    CHECK((proj.P_A - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((proj.P_CT - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("fully fixed contrast zeroes its projector") {
    const auto proj = constraint_projectors(Matrix(), Matrix::Identity(4, 4), 4);
    CHECK(proj.P_CT.cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("random A satisfies the projector identities") {
    const Matrix A = random_matrix(5, 2, 7);
    const auto proj = constraint_projectors(A, Matrix(), 5);
    CHECK((proj.P_A * proj.P_A - proj.P_A).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((proj.P_A - proj.P_A.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((proj.P_A * A).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("rank-deficient constraints are rejected") {
    Matrix A(3, 2);
    A.col(0) = Vector::Ones(3);
    A.col(1) = 2.0 * Vector::Ones(3);
    CHECK_THROWS_AS(constraint_projectors(A, Matrix(), 3), SingularConstraint);
  }
}

TEST_CASE("feasibility report") {
  ProblemSpec spec;
  spec.n = 10;
  spec.p = 3;
  spec.models.push_back(random_model(10, 2, 11));
  spec.A = Matrix::Zero(3, 1);
  spec.A(0, 0) = 1.0;
  spec.B = random_matrix(10, 1, 12);
  spec.C = Matrix::Identity(3, 3);
  spec.d = Vector::Zero(3);
  spec.d(0) = 1.0;

  Matrix Z = random_matrix(10, 3, 13);
  Z.col(0) = spec.B.col(0);
  Vector c = spec.d;
  const auto feasible = feasibility_check(Z, {c}, spec);
  CHECK(feasible.design_residual < 1e-14);
  CHECK(feasible.contrast_residual < 1e-14);

  Matrix perturbed = Z;
  perturbed.col(0).array() += 0.25;
  const auto report = feasibility_check(perturbed, {c}, spec);
  CHECK(report.design_residual == doctest::Approx(0.25).epsilon(1e-12));
}

namespace {

// Single-model instance with the design free and the contrast pinned.
ProblemSpec single_model_spec(Index n, Index p, std::uint64_t seed) {
  ProblemSpec spec;
  spec.n = n;
  spec.p = p;
  spec.models.push_back(random_model(n, p, seed));
  spec.C = Matrix::Identity(p, p);
  spec.d = spec.models.front().c_X;
  return spec;
}

}  // namespace

TEST_CASE("descent on a single-model problem") {
  const ProblemSpec spec = single_model_spec(30, 2, 21);
  const AssembledObjective assembled = assemble(spec);
  const CandidateModel& model = spec.models.front();

  PgdOptions opts;
  opts.max_outer = 20000;
  const OptimizationResult result =
      optimize(assembled, spec, model.X, {model.c_X}, opts);

  // The composite objective trades bias against variance, so its optimum sits
  // at or below the Gauss-Markov value attained at Z = X.
  const double gauss_markov =
      model.c_X.dot((model.X.transpose() * model.X).inverse() * model.c_X);
  CHECK(result.F_hat <= gauss_markov + 1e-9);
  CHECK(result.F_hat >= 0.0);
  CHECK(result.termination == Termination::ObjectiveTolerance);

  SUBCASE("accepted objective values decrease strictly") {
    double last = std::numeric_limits<double>::infinity();
    for (const auto& row : result.trace) {
      if (!row.accepted) continue;
      CHECK(row.objective < last);
      last = row.objective;
    }
  }
  SUBCASE("step sizes follow the multiplicative rule exactly") {
    for (size_t i = 1; i < result.trace.size(); ++i) {
      const auto& prev = result.trace[i - 1];
      const auto& row = result.trace[i];
      if (row.accepted) {
        CHECK(row.alpha ==
              doctest::Approx(prev.alpha * opts.theta).epsilon(1e-12));
      } else {
        CHECK(row.alpha ==
              doctest::Approx(prev.alpha / opts.theta).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("constraints are preserved over the whole run") {
  ProblemSpec spec;
  spec.n = 40;
  spec.p = 3;
  const Matrix X = random_matrix(40, 2, 31);
  const Vector snr = (Vector(2) << 1.0, 0.5).finished();
  const Vector c_X = (Vector(2) << 1.0, 0.0).finished();
  for (int i = 0; i < 4; ++i) {
    Matrix Xi = X;
    Xi.col(0) = random_vector(40, 32 + static_cast<std::uint64_t>(i));
    spec.models.emplace_back(Xi, snr, c_X, 1.0, 0.5);
  }
  spec.A = Matrix::Zero(3, 1);
  spec.A(0, 0) = 1.0;
  spec.B = X.col(0);
  spec.C = Matrix::Identity(3, 3);
  spec.d = (Vector(3) << 1.0, 0.0, 0.0).finished();

  Matrix Z0(40, 3);
  Z0.col(0) = X.col(0);
  Z0.col(1) = random_vector(40, 36);
  Z0.col(2) = random_vector(40, 37);
  PgdOptions opts;
  opts.max_outer = 3000;
  const AssembledObjective assembled = assemble(spec);
  const OptimizationResult result =
      optimize(assembled, spec, Z0, {spec.d}, opts);
  const auto feasible = feasibility_check(result.Z_hat, result.contrasts, spec);
  CHECK(feasible.design_residual < 1e-10);
  CHECK(feasible.contrast_residual < 1e-10);
}

TEST_CASE("identical inputs give identical traces") {
  const ProblemSpec spec = single_model_spec(25, 2, 41);
  const AssembledObjective assembled = assemble(spec);
  const CandidateModel& model = spec.models.front();
  PgdOptions opts;
  opts.max_outer = 500;

  const auto first = optimize(assembled, spec, model.X, {model.c_X}, opts);
  const auto second = optimize(assembled, spec, model.X, {model.c_X}, opts);
  REQUIRE(first.trace.size() == second.trace.size());
  for (size_t i = 0; i < first.trace.size(); ++i) {
    CHECK(first.trace[i].objective == second.trace[i].objective);
    CHECK(first.trace[i].alpha == second.trace[i].alpha);
  }
  CHECK(first.F_hat == second.F_hat);
}

TEST_CASE("infeasible starts are rejected") {
  const ProblemSpec spec = single_model_spec(20, 2, 51);
  const AssembledObjective assembled = assemble(spec);
  const Matrix Z0 = random_matrix(20, 2, 52);
  Vector bad_contrast = spec.d;
  bad_contrast(0) += 0.5;
  CHECK_THROWS_AS(optimize(assembled, spec, Z0, {bad_contrast}, PgdOptions{}),
                  InfeasibleStart);
}

TEST_CASE("option validation") {
  PgdOptions opts;
  opts.alpha0 = 0.5;  // outside (0, 1e-3)
  CHECK_THROWS_AS(opts.validate(), InvalidArgument);
  opts = PgdOptions{};
  opts.theta = 1.0;
  CHECK_THROWS_AS(opts.validate(), InvalidArgument);
  opts = PgdOptions{};
  opts.eta1 = 1e-3;
  CHECK_THROWS_AS(opts.validate(), InvalidArgument);
}
