#pragma once

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace irswpt::harness {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kAggregateTrial = -1;

struct ResultRow {
  std::string scenario;
  std::string algorithm;
  std::string sweep_name;
  double sweep_value = 0.0;
  int trial = 0;  // kAggregateTrial for AGGREGATE rows
  double current_amps = 0.0;
  double iterations = 0.0;
  bool converged = false;
  double wall_ms = 0.0;

  bool aggregate() const { return trial == kAggregateTrial; }
  bool failed() const { return std::isnan(current_amps); }
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

/// Mean over the non-failed rows; converged only when every row converged.
inline ResultRow aggregate_rows(const std::vector<const ResultRow*>& rows) {
  ResultRow out;
  if (rows.empty()) return out;
  out.scenario = rows.front()->scenario;
  out.algorithm = rows.front()->algorithm;
  out.sweep_name = rows.front()->sweep_name;
  out.sweep_value = rows.front()->sweep_value;
  out.trial = kAggregateTrial;
  double current = 0.0, iterations = 0.0, wall = 0.0;
  int ok = 0;
  bool all_converged = true;
  for (const ResultRow* r : rows) {
    all_converged = all_converged && r->converged && !r->failed();
    if (r->failed()) continue;
    current += r->current_amps;
    iterations += r->iterations;
    wall += r->wall_ms;
    ++ok;
  }
  out.current_amps = ok ? current / ok : std::nan("");
  out.iterations = ok ? iterations / ok : 0.0;
  out.wall_ms = ok ? wall / ok : 0.0;
  out.converged = all_converged;
  return out;
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline const char* kCsvHeader =
    "scenario,algorithm,sweep_name,sweep_value,trial,current_amps,iterations,converged,wall_ms";

inline void write_csv(const ExperimentResult& result, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const auto& r : result.rows) {
    out << r.scenario << ',' << r.algorithm << ',' << r.sweep_name << ','
        << format_number(r.sweep_value) << ','
        << (r.aggregate() ? std::string("AGGREGATE") : std::to_string(r.trial)) << ','
        << format_number(r.current_amps) << ',' << format_number(r.iterations) << ','
        << (r.converged ? "true" : "false") << ',' << format_number(r.wall_ms) << "\n";
  }
}

inline nlohmann::ordered_json to_json(const ExperimentResult& result) {
  auto number = [](double v) -> nlohmann::ordered_json {
    if (!std::isfinite(v)) return nullptr;
    return std::stod(format_number(v));
  };
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : result.rows) {
    nlohmann::ordered_json row;
    row["scenario"] = r.scenario;
    row["algorithm"] = r.algorithm;
    row["sweep_name"] = r.sweep_name;
    row["sweep_value"] = number(r.sweep_value);
    if (r.aggregate()) row["trial"] = "AGGREGATE";
    else row["trial"] = r.trial;
    row["current_amps"] = number(r.current_amps);
    row["iterations"] = number(r.iterations);
    row["converged"] = r.converged;
    row["wall_ms"] = number(r.wall_ms);
    rows.push_back(std::move(row));
  }
  nlohmann::ordered_json doc;
  doc["rows"] = std::move(rows);
  doc["metadata"] = result.metadata;
  return doc;
}

inline void write_json(const ExperimentResult& result, std::ostream& out) {
  out << to_json(result).dump(2) << "\n";
}

inline void write_results(const ExperimentResult& result, const std::string& path,
                          const std::string& format) {
  if (format != "csv" && format != "json")
    throw std::invalid_argument("unknown output format '" + format + "'");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  if (format == "csv") write_csv(result, out);
  else write_json(result, out);
  out.flush();
  if (!out) throw std::runtime_error("error writing output file: " + path);
}

/// Splits one CSV line written by write_csv (no quoting is ever needed).
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Least-squares line y = a + b x; returns {slope, intercept, r_squared}.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit fit;
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return fit;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace irswpt::harness
