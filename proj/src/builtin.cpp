#include "smartdm/builtin.hpp"

#include "smartdm/scenarios.hpp"
#include "smartdm/selection.hpp"

namespace smartdm {

namespace {

Matrix leading_column_selector(Index p, Index count) {
  Matrix A = Matrix::Zero(p, count);
  for (Index j = 0; j < count; ++j) A(j, j) = 1.0;
  return A;
}

Vector unit_vector(Index p) {
  Vector d = Vector::Zero(p);
  d(0) = 1.0;
  return d;
}

// Shared skeleton of the shifted-infusion studies: the first two columns of
// Z are pinned to the unshifted design and the contrast targets column one.
ProblemSpec infusion_spec(Index p, bool fix_design, bool fix_contrast,
                          std::vector<CandidateModel> models) {
  const BaseDesign base = build_infusion_base();
  ProblemSpec spec;
  spec.n = base.n;
  spec.p = p;
  spec.models = std::move(models);
  if (fix_design) {
    spec.A = leading_column_selector(p, 2);
    spec.B = base.matrix();
  }
  if (fix_contrast) {
    spec.C = Matrix::Identity(p, p);
    spec.d = unit_vector(p);
  }
  return spec;
}

std::vector<CandidateModel> shifted_models(double phi) {
  const BaseDesign base = build_infusion_base();
  const Vector snr = (Vector(2) << 1.0, 0.5).finished();
  const Vector c_X = (Vector(2) << 1.0, 0.0).finished();
  return shift_family(base, 50, snr, c_X, 1.0, phi);
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"validation-a", "validation-b", "example-1", "example-2",
          "example-3",    "example-4",    "example-5", "example-6",
          "fmri-723"};
}

ProblemSpec builtin_spec(const std::string& name) {
  if (name == "validation-a") {
    return infusion_spec(4, true, true, shifted_models(0.5));
  }
  if (name == "validation-b") {
    return infusion_spec(4, true, false, shifted_models(0.5));
  }
  if (name == "example-1") {
    return infusion_spec(3, true, true, shifted_models(0.5));
  }
  if (name == "example-2") {
    auto models = shifted_models(0.5);
    for (auto& model : models) model.phi = phi_choice_a(1e3, model);
    return infusion_spec(3, true, true, std::move(models));
  }
  if (name == "example-3") {
    return infusion_spec(3, true, true, shifted_models(0.1));
  }
  if (name == "example-4") {
    const BaseDesign base = build_infusion_base();
    const Vector c_X = (Vector(2) << 1.0, 0.0).finished();
    const double phi = 0.01;
    std::vector<CandidateModel> models;
    for (auto [a, b] : {std::pair{1.0, 0.5}, {-1.0, 0.5}, {1.0, -0.5},
                        {-1.0, -0.5}}) {
      auto block = shift_family(base, 50, (Vector(2) << a, b).finished(), c_X,
                                1.0, phi);
      for (auto& model : block) models.push_back(std::move(model));
    }
    std::vector<CandidateModel> nulls;
    nulls.emplace_back(base.matrix(), (Vector(2) << 0.0, 1.0).finished(), c_X,
                       1.0, phi);
    nulls.emplace_back(base.matrix(), (Vector(2) << 0.0, -1.0).finished(), c_X,
                       1.0, phi);
    return infusion_spec(3, false, true,
                         null_augment(std::move(models), std::move(nulls)));
  }
  if (name == "example-5") {
    const Index n = 200;
    const Index block_len = 20;
    ProblemSpec spec;
    spec.n = n;
    spec.p = 4;
    spec.models = block_family(n, block_len, 6, 1.0, 0.01);
    spec.A = leading_column_selector(spec.p, 1);
    Matrix block_ev(n, 1);
    for (Index t = 0; t < n; ++t) {
      block_ev(t, 0) = ((t / block_len) % 2 == 1) ? 1.0 : 0.0;
    }
    spec.B = block_ev;
    spec.C = Matrix::Identity(spec.p, spec.p);
    spec.d = unit_vector(spec.p);
    return spec;
  }
  if (name == "example-6") {
    const double dt = 0.1;
    const HrfRanges ranges;
    const Index n = static_cast<Index>(ranges.max_support() / dt) + 1;
    const auto curves = hrf_sample(200, ranges, dt, /*seed=*/6);
    ProblemSpec spec;
    spec.n = n;
    spec.p = 5;
    spec.models = hrf_family(curves, n, /*with_nulls=*/true);
    spec.C = Matrix::Identity(spec.p, spec.p);
    spec.d = unit_vector(spec.p);
    return spec;
  }
  if (name == "fmri-723") {
    const BaseDesign base = build_infusion_base();
    return infusion_spec(6, true, true, build_infusion_family_723(base));
  }
  std::string known;
  for (const auto& candidate : builtin_names()) {
    known += known.empty() ? candidate : ", " + candidate;
  }
  throw InvalidArgument("unknown example '" + name + "' (valid: " + known + ")");
}

}  // namespace smartdm
