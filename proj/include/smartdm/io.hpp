#ifndef SMARTDM_IO_HPP
#define SMARTDM_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "smartdm/objective.hpp"
#include "smartdm/pgd.hpp"
#include "smartdm/simulation.hpp"
#include "smartdm/types.hpp"

namespace smartdm::io {

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double value);

void write_csv(const std::filesystem::path& path, const Matrix& values);
Matrix read_csv(const std::filesystem::path& path);

// Spec documents are JSON: {n, p, contrasts, models: [...], A, B, C, d}.
// Model matrices may be inline row-major arrays, CSV file references
// (resolved against the spec's directory), or X_ref back-references to an
// earlier model's matrix.
ProblemSpec parse_spec(const std::string& json_text,
                       const std::filesystem::path& base_dir = {});
ProblemSpec load_spec(const std::filesystem::path& path);
std::string spec_to_json(const ProblemSpec& spec);
void save_spec(const std::filesystem::path& path, const ProblemSpec& spec);

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<TraceRow>& trace);
void write_curves_csv(const std::filesystem::path& path,
                      const PerformanceReport& report);
void write_roc_csv(const std::filesystem::path& path,
                   const std::vector<RocPoint>& roc);
void write_size_curve_csv(const std::filesystem::path& path,
                          const std::vector<Index>& p_values,
                          const std::vector<double>& objectives,
                          const std::vector<double>& reduction);

struct BundleInputs {
  std::string command;
  std::string spec_json;   // full spec, embedded for re-runs
  std::string solver;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> extras;
};

// Writes Z_hat.csv, c_hat.csv, objective.txt, trace.csv and manifest.json
// under `dir`, creating it if needed.
void write_result_bundle(const std::filesystem::path& dir,
                         const OptimizationResult& result,
                         const BundleInputs& inputs);

}  // namespace smartdm::io

#endif
