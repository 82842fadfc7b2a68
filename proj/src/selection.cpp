#include "smartdm/selection.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "smartdm/rng.hpp"

namespace smartdm {

namespace {

// Orthonormalize `candidate` against the columns of `basis` already filled.
bool orthonormalize_against(const Matrix& basis, Index used, Vector& candidate) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Index j = 0; j < used; ++j) {
      candidate -= basis.col(j).dot(candidate) * basis.col(j);
    }
  }
  const double norm = candidate.norm();
  if (norm < 1e-8) return false;
  candidate /= norm;
  return true;
}

Matrix build_init_columns(const ProblemSpec& spec, const Vector& v_hat,
                          const Matrix& left_singular, Index usable,
                          std::uint64_t seed) {
  const Index n = spec.n;
  const Index p = spec.p;
  Matrix Z0(n, p);
  Z0.col(0) = v_hat;
  const Index from_svd = std::min<Index>(usable, p - 1);
  for (Index j = 0; j < from_svd; ++j) Z0.col(1 + j) = left_singular.col(j);

  if (from_svd < p - 1) {
    // Orthonormal frame spanning what we already have, used to keep the
    // random fill independent of it.
    Matrix frame(n, p);
    Index frame_used = 0;
    for (Index j = 0; j < 1 + from_svd; ++j) {
      Vector col = Z0.col(j);
      if (orthonormalize_against(frame, frame_used, col)) {
        frame.col(frame_used++) = col;
      }
    }
    for (Index j = from_svd; j < p - 1; ++j) {
      Vector draw(n);
      for (int attempt = 0;; ++attempt) {
        KeyedRng rng(seed, 0x66696c6cULL, static_cast<std::uint64_t>(j * 97 + attempt));
        for (Index t = 0; t < n; ++t) draw(t) = rng.next_normal();
        Vector col = draw;
        if (orthonormalize_against(frame, frame_used, col)) {
          frame.col(frame_used++) = col;
          Z0.col(1 + j) = col;
          break;
        }
        if (attempt > 16) throw SingularDesign("could not complete init basis");
      }
    }
  }
  return Z0;
}

}  // namespace

InitialPoint init_design(const ProblemSpec& spec, std::uint64_t seed,
                         double perturb_scale) {
  spec.validate();
  const Index m = spec.model_count();
  const Index n = spec.n;
  const Index p = spec.p;

  double signal_sum = 0.0;
  Vector weighted_profiles = Vector::Zero(n);
  std::vector<double> signals(static_cast<size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const auto& model = spec.models[static_cast<size_t>(i)];
    const double s = model.c_X.dot(model.snr);
    signals[static_cast<size_t>(i)] = s;
    signal_sum += s;
    weighted_profiles += s * (model.X * model.c_X);
  }
  if (signal_sum == 0.0) {
    throw ZeroSignal("sum of c_X^T snr over models vanishes");
  }
  const Vector v_hat = weighted_profiles / signal_sum;

  Matrix residuals(n, m);
  for (Index i = 0; i < m; ++i) {
    const auto& model = spec.models[static_cast<size_t>(i)];
    const double s = signals[static_cast<size_t>(i)];
    residuals.col(i) = s * (model.X * model.c_X - v_hat);
  }
  Eigen::BDCSVD<Matrix> svd(residuals, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  if (sv.size() > 0 && sv(0) > 0.0) {
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > kRankTolerance * sv(0)) ++rank;
    }
  }

  InitialPoint out;
  out.Z0 = build_init_columns(spec, v_hat, svd.matrixU(), rank, seed);

  if (perturb_scale > 0.0) {
    KeyedRng rng(seed, 0x7065727475ULL);
    for (Index j = 1; j < p; ++j) {
      for (Index t = 0; t < n; ++t) {
        out.Z0(t, j) += rng.next_uniform(0.0, perturb_scale);
      }
    }
  }

  Vector c0 = Vector::Zero(p);
  c0(0) = 1.0;

  // Project onto the constraint sets.
  if (spec.A.size() > 0) {
    Eigen::LLT<Matrix> llt(Matrix(spec.A.transpose() * spec.A));
    if (llt.info() != Eigen::Success) {
      throw SingularConstraint("A^T A is singular");
    }
    out.Z0 += (spec.B - out.Z0 * spec.A) *
              llt.solve(Matrix(spec.A.transpose()));
  }
  if (spec.C.size() > 0) {
    Eigen::LLT<Matrix> llt(Matrix(spec.C * spec.C.transpose()));
    if (llt.info() != Eigen::Success) {
      throw SingularConstraint("C C^T is singular");
    }
    c0 += spec.C.transpose() * llt.solve(Vector(spec.d - spec.C * c0));
  }

  if (!has_full_column_rank(out.Z0)) {
    if (perturb_scale == 0.0) {
      // A deterministic retry with jitter breaks ties created by the repair.
      return init_design(spec, seed + 1, 1e-6);
    }
    throw SingularDesign("initial design is rank deficient after repair");
  }

  out.contrasts.assign(static_cast<size_t>(spec.n_contrasts), c0);
  return out;
}

ProblemSpec resize_spec(const ProblemSpec& spec, Index p) {
  ProblemSpec out = spec;
  out.p = p;
  if (spec.A.size() > 0) {
    if (p <= spec.A.cols()) {
      throw InvalidArgument("p must exceed the column-constraint count");
    }
    Matrix A = Matrix::Zero(p, spec.A.cols());
    for (Index j = 0; j < spec.A.cols(); ++j) {
      Index row = -1;
      for (Index i = 0; i < spec.A.rows(); ++i) {
        const double v = spec.A(i, j);
        if (v == 0.0) continue;
        if (v != 1.0 || row >= 0) {
          throw InvalidArgument(
              "only column-selector constraints can be resized");
        }
        row = i;
      }
      if (row < 0 || row >= p) {
        throw InvalidArgument("constraint selects a column outside 1..p");
      }
      A(row, j) = 1.0;
    }
    out.A = A;
  }
  if (spec.C.size() > 0) {
    if (spec.C.rows() != spec.C.cols() ||
        !spec.C.isApprox(Matrix::Identity(spec.C.rows(), spec.C.cols()))) {
      throw InvalidArgument("only fully fixed contrasts can be resized");
    }
    out.C = Matrix::Identity(p, p);
    Vector d = Vector::Zero(p);
    d.head(std::min<Index>(p, spec.d.size())) =
        spec.d.head(std::min<Index>(p, spec.d.size()));
    out.d = d;
  }
  return out;
}

SizeSelectionReport select_size(const ProblemSpec& spec, Index p0, Index p_max,
                                double cutoff, const PgdOptions& opts,
                                std::uint64_t seed, double perturb_scale) {
  if (p0 < 1 || p_max < p0) throw InvalidArgument("need 1 <= p0 <= p_max");
  if (p_max >= spec.n) throw InvalidArgument("p_max must stay below n");
  if (!(cutoff > 0.0 && cutoff <= 1.0)) {
    throw InvalidArgument("cutoff must lie in (0, 1]");
  }

  SizeSelectionReport report;
  report.cutoff = cutoff;
  std::string last_error = "no runs attempted";
  for (Index p = p0; p <= p_max; ++p) {
    try {
      const ProblemSpec sized = resize_spec(spec, p);
      const AssembledObjective assembled = assemble(sized);
      const InitialPoint init = init_design(sized, seed, perturb_scale);
      const OptimizationResult run =
          optimize(assembled, sized, init.Z0, init.contrasts, opts);
      report.p_values.push_back(p);
      report.objectives.push_back(run.F_hat);
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (report.p_values.empty()) {
    throw SolverFailure(std::string("all size-selection runs failed: ") +
                        last_error);
  }

  const auto [min_it, max_it] =
      std::minmax_element(report.objectives.begin(), report.objectives.end());
  const double f_min = *min_it;
  const double f_max = *max_it;
  report.reduction.resize(report.objectives.size());
  if (f_max == f_min) {
    report.degenerate = true;
    std::fill(report.reduction.begin(), report.reduction.end(), 1.0);
    report.p_opt = report.p_values.front();
    return report;
  }
  for (size_t j = 0; j < report.objectives.size(); ++j) {
    report.reduction[j] = (f_max - report.objectives[j]) / (f_max - f_min);
  }
  for (size_t j = 0; j < report.reduction.size(); ++j) {
    if (report.reduction[j] >= cutoff) {
      report.p_opt = report.p_values[j];
      return report;
    }
  }
  report.p_opt = report.p_values.back();  // R is 1 at the argmin, so unreachable
  return report;
}

Index select_size_robust(const ProblemSpec& spec, Index p0, Index p_max,
                         double cutoff, const PgdOptions& opts, int n_iter,
                         std::uint64_t seed) {
  if (n_iter < 1) throw InvalidArgument("need at least one trial");
  std::vector<Index> picks;
  picks.reserve(static_cast<size_t>(n_iter));
  for (int t = 0; t < n_iter; ++t) {
    const double perturb = n_iter == 1 ? 0.0 : 1e-2;
    picks.push_back(select_size(spec, p0, p_max, cutoff, opts,
                                seed + static_cast<std::uint64_t>(t), perturb)
                        .p_opt);
  }
  std::sort(picks.begin(), picks.end());
  return picks[(picks.size() - 1) / 2];  // lower median keeps p integral
}

namespace {

struct PhiInputs {
  double signal;        // c_X^T snr
  double gauss_markov;  // c_X^T (X^T X)^{-1} c_X
};

PhiInputs phi_inputs(const CandidateModel& model) {
  PhiInputs out;
  out.signal = model.c_X.dot(model.snr);
  const Matrix gram_inv = detail::gram_inverse(model.X, "candidate model X");
  out.gauss_markov = model.c_X.dot(gram_inv * model.c_X);
  return out;
}

}  // namespace

double phi_choice_a(double k, const CandidateModel& model) {
  if (k < 0.0) throw InvalidArgument("k must be nonnegative");
  const PhiInputs in = phi_inputs(model);
  if (in.signal == 0.0) {
    throw ZeroSignal("phi rule is undefined for a zero-signal model");
  }
  const double s_sq = in.signal * in.signal;
  return s_sq / (s_sq + k * in.gauss_markov);
}

double phi_choice_b(double k, const CandidateModel& model) {
  if (k < 0.0) throw InvalidArgument("k must be nonnegative");
  const PhiInputs in = phi_inputs(model);
  if (in.signal == 0.0) {
    throw ZeroSignal("phi rule is undefined for a zero-signal model");
  }
  const double a = 2.0 * in.gauss_markov * in.gauss_markov * k * k /
                   (in.signal * in.signal);
  if (a == 0.0) return 1.0;
  return 2.0 / (1.0 + std::sqrt(1.0 + 4.0 * a));
}

}  // namespace smartdm
