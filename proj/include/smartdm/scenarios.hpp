#ifndef SMARTDM_SCENARIOS_HPP
#define SMARTDM_SCENARIOS_HPP

#include <vector>

#include "smartdm/glm.hpp"
#include "smartdm/types.hpp"

namespace smartdm {

// Two-column base design: a ramp-and-hold response plus a linear drift.
struct BaseDesign {
  Vector ev_primary;  // 0 on the baseline, ramps to 1, holds
  Vector ev_drift;    // linear, normalized to [0, 1]
  Index n = 0;

  Matrix matrix() const;
};

// Defaults reconstruct a 25-minute acquisition at TR 2.5 s with two dropped
// volumes: 120 baseline points and a 144-point ramp.
BaseDesign build_infusion_base(Index n = 598, Index baseline_len = 120,
                               Index ramp_len = 144);

// Right-shift with zero padding on the left; shift 0 is the identity.
Vector shift_right(const Vector& ev, Index shift);

// Models with the primary column shifted right by 1..count timepoints and the
// drift column unchanged.
std::vector<CandidateModel> shift_family(const BaseDesign& base, Index count,
                                         const Vector& snr, const Vector& c_X,
                                         double w = 1.0, double phi = 0.5);

// The 723-model infusion family: four sign blocks of 180 shifts plus three
// structured-null models on the unshifted design.
std::vector<CandidateModel> build_infusion_family_723(const BaseDesign& base,
                                                      double phi = 0.5);

// Single-column block-design family: shifts 1..max_shift at snr +1, then the
// same shifted columns at snr -1.
std::vector<CandidateModel> block_family(Index n = 200, Index block_len = 20,
                                         Index max_shift = 6,
                                         double w = 1.0, double phi = 0.01);

// Appends structured-null models; each must carry c_X^T snr = 0.
std::vector<CandidateModel> null_augment(std::vector<CandidateModel> models,
                                         std::vector<CandidateModel> nulls);

struct HrfParams {
  double h1;  // seconds to first rise
  double h2;  // rise duration
  double h3;  // fall duration (peak to undershoot)
  double h4;  // recovery duration
  double f;   // undershoot depth, in [0, 1)

  double support_end() const { return h1 + h2 + h3 + h4; }
};

// Five-parameter half-cosine response: flat, rise to 1, fall to -f, recover.
double hrf_evaluate(const HrfParams& params, double t);

struct HrfCurve {
  HrfParams params;
  Vector values;  // sampled at t = 0, dt, 2 dt, ...
  double dt;
};

struct HrfRanges {
  double h1_min = 1.0, h1_max = 3.0;
  double h2_min = 3.0, h2_max = 7.0;
  double h3_min = 3.0, h3_max = 7.0;
  double h4_min = 3.0, h4_max = 9.0;
  double f_min = 0.0, f_max = 0.5;

  double max_support() const { return h1_max + h2_max + h3_max + h4_max; }
};

std::vector<HrfCurve> hrf_sample(Index count, const HrfRanges& ranges,
                                 double dt, std::uint64_t seed);

// Discrete convolution truncated to the stimulus length, scaled by dt.
Vector hrf_convolve(const Vector& ev, const Vector& hrf, double dt);

// Example-6 style family: each sampled curve becomes a one-column model at
// snr [1], optionally doubled with snr-0 nulls sharing the same columns.
std::vector<CandidateModel> hrf_family(const std::vector<HrfCurve>& curves,
                                       Index n, bool with_nulls,
                                       double w = 1.0, double phi = 0.5);

// Base EV1 column extended with its first finite difference (first entry 0).
Matrix derivative_design(const BaseDesign& base);

}  // namespace smartdm

#endif
