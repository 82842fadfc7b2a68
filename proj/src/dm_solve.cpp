#include "smartdm/dm_solve.hpp"

#include <utility>

namespace smartdm {

namespace {

struct Packing {
  Index n, p, q;

  Index dim() const { return n * p + q * p; }

  Matrix design(const Vector& x) const {
    return Eigen::Map<const Matrix>(x.data(), n, p);
  }

  std::vector<Vector> contrasts(const Vector& x) const {
    std::vector<Vector> out(static_cast<size_t>(q));
    for (Index s = 0; s < q; ++s) {
      out[static_cast<size_t>(s)] = x.segment(n * p + s * p, p);
    }
    return out;
  }

  Vector pack(const Matrix& Z, const std::vector<Vector>& contrasts) const {
    Vector x(dim());
    Eigen::Map<Matrix>(x.data(), n, p) = Z;
    for (Index s = 0; s < q; ++s) {
      x.segment(n * p + s * p, p) = contrasts[static_cast<size_t>(s)];
    }
    return x;
  }
};

}  // namespace

OptimizationResult solve_dm_problem(const ProblemSpec& spec,
                                    const AssembledObjective& assembled,
                                    const Matrix& init_Z,
                                    const std::vector<Vector>& init_contrasts,
                                    const nlp::SolverOptions& options) {
  spec.validate();
  const Packing pack{spec.n, spec.p,
                     static_cast<Index>(init_contrasts.size())};
  const Index qA = spec.A.size() > 0 ? spec.A.cols() : 0;
  const Index r = spec.C.size() > 0 ? spec.C.rows() : 0;

  nlp::Problem problem;
  problem.dim = pack.dim();
  problem.objective = [&assembled, pack](const Vector& x) {
    try {
      return ObjectiveEvaluator(pack.design(x), assembled)
          .value(pack.contrasts(x));
    } catch (const SingularDesign&) {
      return 1e100;  // trial point outside the full-rank region
    }
  };
  problem.gradient = [&assembled, pack](const Vector& x) {
    const Matrix Z = pack.design(x);
    const std::vector<Vector> contrasts = pack.contrasts(x);
    const ObjectiveEvaluator eval(Z, assembled);
    Vector g(pack.dim());
    Eigen::Map<Matrix>(g.data(), pack.n, pack.p) =
        eval.design_gradient(contrasts);
    for (Index s = 0; s < pack.q; ++s) {
      g.segment(pack.n * pack.p + s * pack.p, pack.p) =
          eval.contrast_gradient(contrasts[static_cast<size_t>(s)]);
    }
    return g;
  };

  problem.eq_count = pack.n * qA + pack.q * r;
  if (problem.eq_count > 0) {
    problem.eq = [&spec, pack, qA, r](const Vector& x) {
      Vector c(pack.n * qA + pack.q * r);
      Index offset = 0;
      if (qA > 0) {
        const Matrix residual = pack.design(x) * spec.A - spec.B;
        c.head(pack.n * qA) =
            Eigen::Map<const Vector>(residual.data(), pack.n * qA);
        offset = pack.n * qA;
      }
      if (r > 0) {
        const auto contrasts = pack.contrasts(x);
        for (Index s = 0; s < pack.q; ++s) {
          c.segment(offset + s * r, r) =
              spec.C * contrasts[static_cast<size_t>(s)] - spec.d;
        }
      }
      return c;
    };
    problem.eq_jac_t = [&spec, pack, qA, r](const Vector&, const Vector& w) {
      Vector jt = Vector::Zero(pack.dim());
      if (qA > 0) {
        const Eigen::Map<const Matrix> w_design(w.data(), pack.n, qA);
        Eigen::Map<Matrix>(jt.data(), pack.n, pack.p) =
            w_design * spec.A.transpose();
      }
      if (r > 0) {
        const Index offset = pack.n * qA;
        for (Index s = 0; s < pack.q; ++s) {
          jt.segment(pack.n * pack.p + s * pack.p, pack.p) =
              spec.C.transpose() * w.segment(offset + s * r, r);
        }
      }
      return jt;
    };
  }

  const Vector x0 = pack.pack(init_Z, init_contrasts);
  const nlp::SolveReport report = nlp::solve(problem, x0, options);

  OptimizationResult out;
  out.Z_hat = pack.design(report.x);
  out.contrasts = pack.contrasts(report.x);
  out.F_hat = report.objective;
  out.iterations = report.outer_iterations;
  out.termination = Termination::ObjectiveTolerance;
  out.trace.push_back({report.outer_iterations, report.objective, 0.0, true});
  return out;
}

}  // namespace smartdm
