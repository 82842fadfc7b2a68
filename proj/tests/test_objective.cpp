#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "smartdm/builtin.hpp"
#include "smartdm/objective.hpp"
#include "support.hpp"

using namespace smartdm;
using namespace smartdm::testsupport;

TEST_CASE("assemble computes the precomputed quantities") {
  SUBCASE("zero snr gives zero H column and ell") {
    ProblemSpec spec;
    spec.n = 10;
    spec.p = 2;
    Matrix X = random_matrix(10, 2, 1);
    spec.models.emplace_back(X, Vector::Zero(2), Vector::Ones(2), 1.0, 0.5);
    const AssembledObjective a = assemble(spec);
    CHECK(a.H.col(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.ell(0) == 0.0);
    CHECK(a.const_term == 0.0);
    CHECK(a.sigma(0) == doctest::Approx(1.0 / 8.0));
  }
  SUBCASE("weights scale H columns as sqrt(w)") {
    ProblemSpec spec;
    spec.n = 12;
    spec.p = 2;
    Matrix X = random_matrix(12, 2, 2);
    Vector snr = random_vector(2, 3);
    Vector c = random_vector(2, 4);
    spec.models.emplace_back(X, snr, c, 4.0, 0.5);
    spec.models.emplace_back(X, snr, c, 1.0, 0.5);
    const AssembledObjective a = assemble(spec);
    CHECK(a.H.col(0).norm() ==
          doctest::Approx(2.0 * a.H.col(1).norm()).epsilon(1e-12));
  }
  SUBCASE("validation test A has a constant unit ell") {
    const ProblemSpec spec = builtin_spec("validation-a");
    const AssembledObjective a = assemble(spec);
    CHECK(a.model_count() == 50);
    for (Index i = 0; i < a.model_count(); ++i) {
      CHECK(a.ell(i) == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK((a.phi_v + a.phi_b - 2.0 * Vector::Ones(50)).cwiseAbs().maxCoeff() <
          1e-14);
  }
}

TEST_CASE("per-model value identities") {
  const Index n = 30;
  SUBCASE("phi = 0.5 recovers expected F") {
    // Same column count for model and design so both dof conventions agree.
    const CandidateModel model = random_model(n, 3, 11);
    const Matrix Z = random_matrix(n, 3, 12);
    const Vector c_Z = random_vector(3, 13);
    CHECK(per_model_value(Z, c_Z, model, n) ==
          doctest::Approx(expected_f(Z, c_Z, model)).epsilon(1e-9));
  }
  SUBCASE("raw and rewritten forms agree") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const CandidateModel model = random_model(n, 2, 20 + seed, 1.0, 0.3);
      const Matrix Z = random_matrix(n, 4, 40 + seed);
      const Vector c_Z = random_vector(4, 60 + seed);
      const double raw = per_model_value(Z, c_Z, model, n);
      const double rewritten = per_model_value_rewritten(Z, c_Z, model, n);
      CHECK(raw == doctest::Approx(rewritten).epsilon(1e-9));
    }
  }
  SUBCASE("zero snr at phi = 0.5 reduces to the contrast variance") {
    const Matrix X = random_matrix(n, 2, 31);
    CandidateModel model(X, Vector::Zero(2), Vector::Ones(2), 1.0, 0.5);
    const Matrix Z = random_matrix(n, 3, 32);
    const Vector c_Z = random_vector(3, 33);
    const Matrix gram_inv = (Z.transpose() * Z).inverse();
    CHECK(per_model_value(Z, c_Z, model, n) ==
          doctest::Approx(c_Z.dot(gram_inv * c_Z)).epsilon(1e-10));
  }
}

TEST_CASE("matrix form equals the per-model sum") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ProblemSpec spec = random_spec(40, 4, 6, seed * 101);
    const AssembledObjective assembled = assemble(spec);
    const Matrix Z = random_matrix(40, 4, seed * 103);
    const Vector c_Z = random_vector(4, seed * 107);
    double sum = 0.0;
    for (const auto& model : spec.models) {
      sum += model.w * per_model_value(Z, c_Z, model, spec.n);
    }
    const double matrix_form = objective_value(Z, c_Z, assembled);
    CHECK(matrix_form == doctest::Approx(sum).epsilon(1e-9));
  }
}

TEST_CASE("objective depends on models only through the assembled data") {
  // Two different specs agreeing on (w, phi, X snr, c_X^T snr, p_i) per model
  // must produce identical objective values.
  const Index n = 25;
  ProblemSpec first;
  first.n = n;
  first.p = 3;
  const Matrix X = random_matrix(n, 2, 41);
  const Vector snr = random_vector(2, 42);
  Vector c_X(2);
  c_X << 1.0, 2.0;
  first.models.emplace_back(X, snr, c_X, 1.3, 0.4);

  // Rotate the regressors and snr together; X snr and c_X^T snr survive.
  Matrix rotation(2, 2);
  const double angle = 0.7;
  rotation << std::cos(angle), -std::sin(angle), std::sin(angle),
      std::cos(angle);
  ProblemSpec second = first;
  second.models.clear();
  const Matrix X2 = X * rotation;
  const Vector snr2 = rotation.transpose() * snr;
  const Vector c_X2 = rotation.transpose() * c_X;
  second.models.emplace_back(X2, snr2, c_X2, 1.3, 0.4);

  const Matrix Z = random_matrix(n, 3, 43);
  const Vector c_Z = random_vector(3, 44);
  CHECK(objective_value(Z, c_Z, assemble(first)) ==
        doctest::Approx(objective_value(Z, c_Z, assemble(second)))
            .epsilon(1e-12));
}

TEST_CASE("gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const ProblemSpec spec = random_spec(40, 3, 5, seed * 211);
    const AssembledObjective assembled = assemble(spec);
    const Matrix Z = random_matrix(40, 3, seed * 223);
    const Vector c_Z = random_vector(3, seed * 227);

    const Matrix analytic_Z = grad_design(Z, c_Z, assembled);
    const Matrix fd_Z = fd_design_gradient(Z, c_Z, assembled, 1e-6);
    const double z_scale = std::max(1.0, fd_Z.cwiseAbs().maxCoeff());
    CHECK((analytic_Z - fd_Z).cwiseAbs().maxCoeff() / z_scale < 1e-5);

    const Vector analytic_c = grad_contrast(Z, c_Z, assembled);
    const Vector fd_c = fd_contrast_gradient(Z, c_Z, assembled, 1e-6);
    const double c_scale = std::max(1.0, fd_c.cwiseAbs().maxCoeff());
    CHECK((analytic_c - fd_c).cwiseAbs().maxCoeff() / c_scale < 1e-6);
  }
}

TEST_CASE("vanishing H reduces the design gradient to its first term") {
  const Index n = 20, p = 3;
  ProblemSpec spec;
  spec.n = n;
  spec.p = p;
  for (int i = 0; i < 3; ++i) {
    const Matrix X = random_matrix(n, 2, 300 + static_cast<std::uint64_t>(i));
    spec.models.emplace_back(X, Vector::Zero(2), Vector::Ones(2), 1.0, 0.4);
  }
  const AssembledObjective assembled = assemble(spec);
  const Matrix Z = random_matrix(n, p, 310);
  const Vector c_Z = random_vector(p, 311);

  const Matrix gram_inv = (Z.transpose() * Z).inverse();
  const Matrix closed_form = -assembled.phiw_sum * Z * gram_inv *
                             (2.0 * c_Z * c_Z.transpose()) * gram_inv;
  CHECK((grad_design(Z, c_Z, assembled) - closed_form).cwiseAbs().maxCoeff() <
        1e-10);

  const Vector contrast_closed = 2.0 * assembled.phiw_sum * gram_inv * c_Z;
  CHECK((grad_contrast(Z, c_Z, assembled) - contrast_closed)
            .cwiseAbs()
            .maxCoeff() < 1e-10);
}

TEST_CASE("unconstrained contrast minimizer zeroes the contrast gradient") {
  const ProblemSpec spec = random_spec(30, 3, 4, 401);
  const AssembledObjective assembled = assemble(spec);
  const Matrix Z = random_matrix(30, 3, 402);

  // grad_c = 2 W c (bracket) + 2 W Q W c - 2 W r with W = (Z^T Z)^{-1}:
  // solve the linear system (bracket I + Q W) c = r for the stationary c.
  const Matrix gram = Z.transpose() * Z;
  const Matrix gram_inv = gram.inverse();
  const Matrix ZtH = Z.transpose() * assembled.H;
  const Matrix Q = ZtH * assembled.phi_b.asDiagonal() * ZtH.transpose();
  const Vector r = ZtH * assembled.phi_b.cwiseProduct(assembled.ell).eval();
  const Matrix P = residual_projector(Z);
  double trace_term = 0.0;
  for (Index i = 0; i < assembled.model_count(); ++i) {
    trace_term += assembled.phi_v(i) * assembled.sigma(i) *
                  assembled.H.col(i).dot(P * assembled.H.col(i));
  }
  const double bracket = assembled.phiw_sum + trace_term;
  const Matrix system = bracket * Matrix::Identity(3, 3) + Q * gram_inv;
  const Vector c_star = system.fullPivLu().solve(r);
  CHECK(grad_contrast(Z, c_star, assembled).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("constant term does not enter the gradients") {
  const ProblemSpec spec = random_spec(25, 3, 4, 501);
  AssembledObjective assembled = assemble(spec);
  const Matrix Z = random_matrix(25, 3, 502);
  const Vector c_Z = random_vector(3, 503);
  const Matrix g1 = grad_design(Z, c_Z, assembled);
  const Vector gc1 = grad_contrast(Z, c_Z, assembled);
  assembled.const_term = 0.0;
  CHECK((grad_design(Z, c_Z, assembled) - g1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((grad_contrast(Z, c_Z, assembled) - gc1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("multi-contrast objective is the per-contrast sum") {
  const ProblemSpec spec = random_spec(30, 4, 5, 601);
  const AssembledObjective assembled = assemble(spec);
  const Matrix Z = random_matrix(30, 4, 602);
  const std::vector<Vector> contrasts = {random_vector(4, 603),
                                         random_vector(4, 604)};
  const double total = objective_value(Z, contrasts, assembled);
  const double sum = objective_value(Z, contrasts[0], assembled) +
                     objective_value(Z, contrasts[1], assembled);
  CHECK(total == doctest::Approx(sum).epsilon(1e-12));

  const Matrix g = grad_design(Z, contrasts, assembled);
  const Matrix g_sum = grad_design(Z, contrasts[0], assembled) +
                       grad_design(Z, contrasts[1], assembled);
  CHECK((g - g_sum).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("spec validation rejects broken instances") {
  ProblemSpec spec = random_spec(20, 3, 2, 701);
  SUBCASE("nonpositive model dof") {
    spec.models.emplace_back(random_matrix(20, 20, 702), Vector::Zero(20),
                             Vector::Ones(20), 1.0, 0.5);
    CHECK_THROWS_AS(assemble(spec), InvalidArgument);
  }
  SUBCASE("mismatched rows") {
    spec.models.emplace_back(random_matrix(21, 2, 703), Vector::Zero(2),
                             Vector::Ones(2), 1.0, 0.5);
    CHECK_THROWS_AS(assemble(spec), DimensionMismatch);
  }
  SUBCASE("phi outside the open interval is rejected at construction") {
    CHECK_THROWS_AS(CandidateModel(random_matrix(20, 2, 704), Vector::Zero(2),
                                   Vector::Ones(2), 1.0, 1.0),
                    InvalidArgument);
    CHECK_THROWS_AS(CandidateModel(random_matrix(20, 2, 705), Vector::Zero(2),
                                   Vector::Ones(2), 1.0, 0.0),
                    InvalidArgument);
  }
}
