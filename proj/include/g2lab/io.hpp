#pragma once

// Trajectory files and atomic output.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>
#include <unistd.h>

#include "g2lab/config.hpp"
#include "g2lab/flow.hpp"

namespace g2lab::cli {

/// Column names of the trajectory table: U row-major, H upper triangle.
inline const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> cols{
      "s",   "U11", "U12", "U13", "U21", "U22", "U23", "U31", "U32", "U33",
      "H11", "H12", "H13", "H22", "H23", "H33", "h",   "rho", "h_integrated",
      "h_consistency", "symmetry_drift", "sigma_constraint", "tau_constraint", "termination"};
  return cols;
}

namespace detail {

inline std::vector<double> row_values(const SampleRecord& r) {
  const FlowState& st = r.state;
  std::vector<double> v{st.s};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v.push_back(st.U(i, j));
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) v.push_back(st.H(i, j));
  v.insert(v.end(), {st.h(), st.rho(), r.h_integrated, r.h_consistency, r.symmetry_drift, r.sigma_constraint,
                     r.tau_constraint});
  return v;
}

}  // namespace detail

/// CSV with one row per sample; the last row carries the termination reason.
inline std::string trajectory_csv(const std::vector<SampleRecord>& samples, const std::string& termination) {
  std::string out;
  const auto& cols = trajectory_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "," : "") + cols[c];
  out += '\n';
  for (std::size_t k = 0; k < samples.size(); ++k) {
    for (double x : detail::row_values(samples[k])) out += format_double(x) + ",";
    if (k + 1 == samples.size()) out += termination;
    out += '\n';
  }
  return out;
}

/// The same table as a JSON object of named columns.
inline json trajectory_json(const std::vector<SampleRecord>& samples, const std::string& termination) {
  json rows = json::array();
  const auto& cols = trajectory_columns();
  for (const auto& r : samples) {
    json row = json::array();
    for (double x : detail::row_values(r)) row.push_back(x);
    rows.push_back(std::move(row));
  }
  json names = json::array();
  for (std::size_t c = 0; c + 1 < cols.size(); ++c) names.push_back(cols[c]);
  return {{"schema", 1}, {"columns", names}, {"rows", rows}, {"termination", termination}};
}

namespace detail {

inline FlowState state_from_values(const std::vector<double>& v) {
  FlowState st;
  st.s = v[0];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) st.U(i, j) = v[1 + 3 * i + j];
  int k = 10;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) st.H(i, j) = st.H(j, i) = v[k++];
  return st;
}

}  // namespace detail

/// Reads (s, U, H) back from trajectory_csv output; H is rebuilt from its
/// upper triangle.
inline std::vector<FlowState> read_trajectory_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw schema_error("trajectory file is empty");
  const auto& cols = trajectory_columns();
  std::string header;
  for (std::size_t c = 0; c < cols.size(); ++c) header += (c ? "," : "") + cols[c];
  if (detail::trim(line) != header) throw schema_error("trajectory header does not match the expected columns");
  std::vector<FlowState> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    std::vector<double> values;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',') && values.size() + 1 < cols.size()) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw schema_error("trajectory line " + std::to_string(line_no) + ": bad number '" + field + "'");
      }
    }
    if (values.size() + 1 != cols.size())
      throw schema_error("trajectory line " + std::to_string(line_no) + ": wrong number of columns");
    out.push_back(detail::state_from_values(values));
  }
  return out;
}

inline std::vector<FlowState> read_trajectory_json(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("rows") || !j["rows"].is_array())
    throw schema_error("trajectory JSON must be an object with a rows array");
  std::vector<FlowState> out;
  for (const auto& row : j["rows"]) {
    if (!row.is_array() || row.size() + 1 != trajectory_columns().size())
      throw schema_error("trajectory JSON row has the wrong number of columns");
    std::vector<double> v;
    for (const auto& x : row) {
      if (!x.is_number()) throw schema_error("trajectory JSON rows must hold numbers");
      v.push_back(x.get<double>());
    }
    out.push_back(detail::state_from_values(v));
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Writes through a temporary file in the same directory and renames it over
/// the target, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw io_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw io_error("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw io_error("cannot rename into " + path.string());
  }
}

}  // namespace g2lab::cli
