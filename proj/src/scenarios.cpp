#include "smartdm/scenarios.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "smartdm/rng.hpp"

namespace smartdm {

Matrix BaseDesign::matrix() const {
  Matrix out(n, 2);
  out.col(0) = ev_primary;
  out.col(1) = ev_drift;
  return out;
}

BaseDesign build_infusion_base(Index n, Index baseline_len, Index ramp_len) {
  if (n <= 2 || baseline_len < 0 || ramp_len <= 0 ||
      baseline_len + ramp_len >= n) {
    throw InvalidArgument("baseline and ramp must fit inside the scan");
  }
  BaseDesign out;
  out.n = n;
  out.ev_primary = Vector::Zero(n);
  for (Index t = baseline_len; t < baseline_len + ramp_len; ++t) {
    out.ev_primary(t) =
        static_cast<double>(t - baseline_len + 1) / static_cast<double>(ramp_len);
  }
  for (Index t = baseline_len + ramp_len; t < n; ++t) out.ev_primary(t) = 1.0;
  out.ev_drift = Vector::LinSpaced(n, 0.0, 1.0);
  return out;
}

Vector shift_right(const Vector& ev, Index shift) {
  if (shift < 0 || shift >= ev.size()) {
    throw InvalidArgument("shift must lie in [0, n)");
  }
  Vector out = Vector::Zero(ev.size());
  out.tail(ev.size() - shift) = ev.head(ev.size() - shift);
  return out;
}

std::vector<CandidateModel> shift_family(const BaseDesign& base, Index count,
                                         const Vector& snr, const Vector& c_X,
                                         double w, double phi) {
  if (count >= base.n) throw InvalidArgument("shift exceeds series length");
  std::vector<CandidateModel> out;
  out.reserve(static_cast<size_t>(count));
  for (Index i = 1; i <= count; ++i) {
    Matrix X(base.n, 2);
    X.col(0) = shift_right(base.ev_primary, i);
    X.col(1) = base.ev_drift;
    out.emplace_back(std::move(X), snr, c_X, w, phi);
  }
  return out;
}

std::vector<CandidateModel> build_infusion_family_723(const BaseDesign& base,
                                                      double phi) {
  const Vector c_X = (Vector(2) << 1.0, 0.0).finished();
  const Index shift_count = 180;
  const std::array<std::pair<double, double>, 4> sign_blocks{
      {{1.0, 0.5}, {-1.0, 0.5}, {1.0, -0.5}, {-1.0, -0.5}}};

  std::vector<CandidateModel> out;
  out.reserve(723);
  for (const auto& [a, b] : sign_blocks) {
    const Vector snr = (Vector(2) << a, b).finished();
    auto block = shift_family(base, shift_count, snr, c_X, 1.0, phi);
    for (auto& model : block) out.push_back(std::move(model));
  }
  const Matrix X0 = base.matrix();
  out.emplace_back(X0, (Vector(2) << 0.0, 1.0).finished(), c_X, 1.0, phi);
  out.emplace_back(X0, (Vector(2) << 0.0, -1.0).finished(), c_X, 1.0, phi);
  out.emplace_back(X0, (Vector(2) << 0.0, 0.0).finished(), c_X, 1.0, phi);
  return out;
}

std::vector<CandidateModel> block_family(Index n, Index block_len,
                                         Index max_shift, double w,
                                         double phi) {
  if (n <= 0 || block_len <= 0 || block_len * 2 > n || max_shift >= n) {
    throw InvalidArgument("block design does not fit the series");
  }
  Vector ev = Vector::Zero(n);
  for (Index t = 0; t < n; ++t) {
    ev(t) = ((t / block_len) % 2 == 1) ? 1.0 : 0.0;
  }
  const Vector c_X = Vector::Ones(1);
  std::vector<CandidateModel> out;
  out.reserve(static_cast<size_t>(2 * max_shift));
  for (double sign : {1.0, -1.0}) {
    for (Index i = 1; i <= max_shift; ++i) {
      Matrix X(n, 1);
      X.col(0) = shift_right(ev, i);
      out.emplace_back(std::move(X), sign * Vector::Ones(1), c_X, w, phi);
    }
  }
  return out;
}

std::vector<CandidateModel> null_augment(std::vector<CandidateModel> models,
                                         std::vector<CandidateModel> nulls) {
  for (auto& model : nulls) {
    if (model.c_X.dot(model.snr) != 0.0) {
      throw InvalidArgument("null model must have c_X^T snr = 0");
    }
    models.push_back(std::move(model));
  }
  return models;
}

double hrf_evaluate(const HrfParams& params, double t) {
  const double pi = 3.14159265358979323846;
  const double rise_start = params.h1;
  const double peak = params.h1 + params.h2;
  const double undershoot = peak + params.h3;
  const double support_end = undershoot + params.h4;
  if (t <= rise_start || t > support_end) return 0.0;
  if (t <= peak) {
    return std::cos(pi / 2.0 - (pi / (2.0 * params.h2)) * (t - rise_start));
  }
  if (t <= undershoot) {
    const double rate = pi / (2.0 * params.h3) + std::asin(params.f) / params.h3;
    return std::cos(rate * (peak - t));
  }
  return params.f * std::cos(pi - (pi / (2.0 * params.h4)) * (t - undershoot));
}

std::vector<HrfCurve> hrf_sample(Index count, const HrfRanges& ranges,
                                 double dt, std::uint64_t seed) {
  if (dt <= 0.0 || ranges.h1_min <= 0.0 || ranges.h1_min > ranges.h1_max ||
      ranges.h2_min <= 0.0 || ranges.h2_min > ranges.h2_max ||
      ranges.h3_min <= 0.0 || ranges.h3_min > ranges.h3_max ||
      ranges.h4_min <= 0.0 || ranges.h4_min > ranges.h4_max ||
      ranges.f_min < 0.0 || ranges.f_max >= 1.0 || ranges.f_min > ranges.f_max) {
    throw InvalidArgument("bad HRF sampling ranges");
  }
  std::vector<HrfCurve> out;
  out.reserve(static_cast<size_t>(count));
  for (Index i = 0; i < count; ++i) {
    KeyedRng rng(seed, static_cast<std::uint64_t>(i));
    HrfCurve curve;
    curve.params.h1 = rng.next_uniform(ranges.h1_min, ranges.h1_max);
    curve.params.h2 = rng.next_uniform(ranges.h2_min, ranges.h2_max);
    curve.params.h3 = rng.next_uniform(ranges.h3_min, ranges.h3_max);
    curve.params.h4 = rng.next_uniform(ranges.h4_min, ranges.h4_max);
    curve.params.f = rng.next_uniform(ranges.f_min, ranges.f_max);
    curve.dt = dt;
    const Index samples =
        static_cast<Index>(std::ceil(curve.params.support_end() / dt)) + 1;
    curve.values.resize(samples);
    for (Index k = 0; k < samples; ++k) {
      curve.values(k) = hrf_evaluate(curve.params, static_cast<double>(k) * dt);
    }
    out.push_back(std::move(curve));
  }
  return out;
}

Vector hrf_convolve(const Vector& ev, const Vector& hrf, double dt) {
  if (ev.size() == 0 || hrf.size() == 0) {
    throw DimensionMismatch("convolution inputs must be nonempty");
  }
  Vector out = Vector::Zero(ev.size());
  for (Index t = 0; t < ev.size(); ++t) {
    const Index k_max = std::min<Index>(t, hrf.size() - 1);
    double acc = 0.0;
    for (Index k = 0; k <= k_max; ++k) acc += hrf(k) * ev(t - k);
    out(t) = dt * acc;
  }
  return out;
}

std::vector<CandidateModel> hrf_family(const std::vector<HrfCurve>& curves,
                                       Index n, bool with_nulls, double w,
                                       double phi) {
  std::vector<CandidateModel> out;
  out.reserve(curves.size() * (with_nulls ? 2 : 1));
  const Vector c_X = Vector::Ones(1);
  for (const auto& curve : curves) {
    if (curve.values.size() > n) {
      throw InvalidArgument("HRF support exceeds the requested length");
    }
    Matrix X = Matrix::Zero(n, 1);
    X.col(0).head(curve.values.size()) = curve.values;
    out.emplace_back(std::move(X), Vector::Ones(1), c_X, w, phi);
  }
  if (with_nulls) {
    const size_t signal_count = curves.size();
    for (size_t i = 0; i < signal_count; ++i) {
      out.emplace_back(out[i].X, Vector::Zero(1), c_X, w, phi);
    }
  }
  return out;
}

Matrix derivative_design(const BaseDesign& base) {
  Matrix out(base.n, 3);
  out.col(0) = base.ev_primary;
  out.col(1) = base.ev_drift;
  out.col(2).setZero();
  for (Index t = 1; t < base.n; ++t) {
    out(t, 2) = base.ev_primary(t) - base.ev_primary(t - 1);
  }
  return out;
}

}  // namespace smartdm
