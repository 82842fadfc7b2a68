#include "smartdm/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace smartdm::io {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
}

ordered_json matrix_to_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const ordered_json& rows, const char* what) {
  if (!rows.is_array() || rows.empty() || !rows.front().is_array()) {
    throw InvalidArgument(std::string(what) + " must be an array of rows");
  }
  const Index n = static_cast<Index>(rows.size());
  const Index p = static_cast<Index>(rows.front().size());
  Matrix out(n, p);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<size_t>(i)];
    if (static_cast<Index>(row.size()) != p) {
      throw InvalidArgument(std::string(what) + " has ragged rows");
    }
    for (Index j = 0; j < p; ++j) out(i, j) = row[static_cast<size_t>(j)].get<double>();
  }
  return out;
}

ordered_json vector_to_json(const Vector& v) {
  ordered_json out = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const ordered_json& arr, const char* what) {
  if (!arr.is_array()) throw InvalidArgument(std::string(what) + " must be an array");
  Vector out(static_cast<Index>(arr.size()));
  for (Index i = 0; i < out.size(); ++i) out(i) = arr[static_cast<size_t>(i)].get<double>();
  return out;
}

bool matrices_identical(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

std::uint64_t matrix_fingerprint(const Matrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
  const size_t count = static_cast<size_t>(m.size()) * sizeof(double);
  for (size_t i = 0; i < count; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void write_csv(const std::filesystem::path& path, const Matrix& values) {
  std::ostringstream out;
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(values(i, j));
    }
    out << '\n';
  }
  write_file(path, out.str());
}

Matrix read_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      double v = 0.0;
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
      const auto parsed = std::from_chars(begin, end, v);
      if (parsed.ec != std::errc{}) {
        throw InvalidArgument("bad number in " + path.string() + ": " + cell);
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InvalidArgument("ragged CSV in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("empty CSV " + path.string());
  Matrix out(static_cast<Index>(rows.size()),
             static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < out.rows(); ++i) {
    for (Index j = 0; j < out.cols(); ++j) {
      out(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
  }
  return out;
}

ProblemSpec parse_spec(const std::string& json_text,
                       const std::filesystem::path& base_dir) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("spec is not valid JSON: ") + e.what());
  }
  ProblemSpec spec;
  try {
    spec.n = doc.at("n").get<Index>();
    spec.p = doc.at("p").get<Index>();
    spec.n_contrasts = doc.value("contrasts", Index{1});
    std::vector<Matrix> matrices;
    for (const auto& entry : doc.at("models")) {
      Matrix X;
      if (entry.contains("X_ref")) {
        const auto ref = entry.at("X_ref").get<size_t>();
        if (ref >= matrices.size()) {
          throw InvalidArgument("X_ref points past the current model");
        }
        X = matrices[ref];
      } else if (entry.contains("X_csv")) {
        X = read_csv(base_dir / entry.at("X_csv").get<std::string>());
      } else {
        X = matrix_from_json(entry.at("X"), "model X");
      }
      matrices.push_back(X);
      spec.models.emplace_back(std::move(X),
                               vector_from_json(entry.at("snr"), "snr"),
                               vector_from_json(entry.at("c_X"), "c_X"),
                               entry.value("w", 1.0),
                               entry.value("phi", 0.5));
    }
    if (doc.contains("A")) spec.A = matrix_from_json(doc.at("A"), "A");
    if (doc.contains("B")) spec.B = matrix_from_json(doc.at("B"), "B");
    if (doc.contains("C")) spec.C = matrix_from_json(doc.at("C"), "C");
    if (doc.contains("d")) spec.d = vector_from_json(doc.at("d"), "d");
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("spec field error: ") + e.what());
  }
  spec.validate();
  return spec;
}

ProblemSpec load_spec(const std::filesystem::path& path) {
  return parse_spec(read_file(path), path.parent_path());
}

std::string spec_to_json(const ProblemSpec& spec) {
  ordered_json doc;
  doc["n"] = spec.n;
  doc["p"] = spec.p;
  doc["contrasts"] = spec.n_contrasts;
  ordered_json models = ordered_json::array();
  std::vector<std::uint64_t> fingerprints;
  for (size_t i = 0; i < spec.models.size(); ++i) {
    const auto& model = spec.models[i];
    ordered_json entry;
    const std::uint64_t fp = matrix_fingerprint(model.X);
    size_t ref = i;
    for (size_t j = 0; j < i; ++j) {
      if (fingerprints[j] == fp && matrices_identical(spec.models[j].X, model.X)) {
        ref = j;
        break;
      }
    }
    if (ref < i) {
      entry["X_ref"] = ref;
    } else {
      entry["X"] = matrix_to_json(model.X);
    }
    fingerprints.push_back(fp);
    entry["snr"] = vector_to_json(model.snr);
    entry["c_X"] = vector_to_json(model.c_X);
    entry["w"] = model.w;
    entry["phi"] = model.phi;
    models.push_back(std::move(entry));
  }
  doc["models"] = std::move(models);
  if (spec.A.size() > 0) {
    doc["A"] = matrix_to_json(spec.A);
    doc["B"] = matrix_to_json(spec.B);
  }
  if (spec.C.size() > 0) {
    doc["C"] = matrix_to_json(spec.C);
    doc["d"] = vector_to_json(spec.d);
  }
  return doc.dump(2) + "\n";
}

void save_spec(const std::filesystem::path& path, const ProblemSpec& spec) {
  write_file(path, spec_to_json(spec));
}

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out << "iteration,objective,alpha,accepted\n";
  for (const auto& row : trace) {
    out << row.iteration << ',' << format_double(row.objective) << ','
        << format_double(row.alpha) << ',' << (row.accepted ? 1 : 0) << '\n';
  }
  write_file(path, out.str());
}

void write_curves_csv(const std::filesystem::path& path,
                      const PerformanceReport& report) {
  std::ostringstream out;
  out << "index,c_b,v_b,cv_delta,expected_t,mc_mean,mc_sd,mc_se\n";
  for (const auto& row : report.per_model) {
    out << row.index << ',' << format_double(row.c_b) << ','
        << format_double(row.v_b) << ',' << format_double(row.cv_delta) << ','
        << format_double(row.expected_t);
    if (row.has_mc) {
      out << ',' << format_double(row.mc_mean) << ','
          << format_double(row.mc_sd) << ',' << format_double(row.mc_se);
    } else {
      out << ",,,";
    }
    out << '\n';
  }
  write_file(path, out.str());
}

void write_roc_csv(const std::filesystem::path& path,
                   const std::vector<RocPoint>& roc) {
  std::ostringstream out;
  out << "threshold,fpr,tpr\n";
  for (const auto& point : roc) {
    out << format_double(point.threshold) << ',' << format_double(point.fpr)
        << ',' << format_double(point.tpr) << '\n';
  }
  write_file(path, out.str());
}

void write_size_curve_csv(const std::filesystem::path& path,
                          const std::vector<Index>& p_values,
                          const std::vector<double>& objectives,
                          const std::vector<double>& reduction) {
  std::ostringstream out;
  out << "p,objective,reduction\n";
  for (size_t i = 0; i < p_values.size(); ++i) {
    out << p_values[i] << ',' << format_double(objectives[i]) << ','
        << format_double(reduction[i]) << '\n';
  }
  write_file(path, out.str());
}

void write_result_bundle(const std::filesystem::path& dir,
                         const OptimizationResult& result,
                         const BundleInputs& inputs) {
  std::filesystem::create_directories(dir);
  write_csv(dir / "Z_hat.csv", result.Z_hat);
  Matrix contrasts(result.contrasts.front().size(),
                   static_cast<Index>(result.contrasts.size()));
  for (Index s = 0; s < contrasts.cols(); ++s) {
    contrasts.col(s) = result.contrasts[static_cast<size_t>(s)];
  }
  write_csv(dir / "c_hat.csv", contrasts);
  write_file(dir / "objective.txt", format_double(result.F_hat) + "\n");
  write_trace_csv(dir / "trace.csv", result.trace);

  ordered_json manifest;
  manifest["tool"] = "smartdm";
  manifest["version"] = "1.0.0";
  manifest["command"] = inputs.command;
  manifest["solver"] = inputs.solver;
  manifest["seed"] = inputs.seed;
  manifest["wall_seconds"] = inputs.wall_seconds;
  for (const auto& [key, value] : inputs.extras) manifest[key] = value;
  manifest["spec"] = ordered_json::parse(inputs.spec_json);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace smartdm::io
