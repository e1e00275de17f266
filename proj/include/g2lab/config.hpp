#pragma once

// Run configuration for the command-line tool: a plain `key = value` file with
// dotted keys. Values are JSON literals (numbers, arrays, quoted strings,
// booleans); a value that is not valid JSON is read as a bare string.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "g2lab/flow.hpp"
#include "json.hpp"

namespace g2lab::cli {

using json = nlohmann::json;

enum class ExitCode : int { pass = 0, tolerance_failure = 1, schema_error = 2, value_error = 3, io_error = 4 };

/// A failure that maps onto one of the non-zero exit codes.
class CliError : public std::runtime_error {
 public:
  CliError(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }
  int exit_code() const { return static_cast<int>(code_); }
  const char* kind() const {
    switch (code_) {
      case ExitCode::schema_error: return "schema";
      case ExitCode::value_error: return "value";
      case ExitCode::io_error: return "io";
      default: return "tolerance";
    }
  }

 private:
  ExitCode code_;
};

inline CliError schema_error(const std::string& what) { return CliError(ExitCode::schema_error, what); }
inline CliError value_error(const std::string& what) { return CliError(ExitCode::value_error, what); }
inline CliError io_error(const std::string& what) { return CliError(ExitCode::io_error, what); }

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"sphere7-analyze", "flow-run", "flow-verify", "eta-init"};
  return names;
}

/// Pass/fail thresholds; the defaults are the acceptance tolerances.
struct Tolerances {
  double closed_form = 1e-8;
  double nearly_parallel = 1e-6;
  double split = 1e-8;
  double evolution = 1e-7;
  double commutation = 1e-7;
  double symmetry = 1e-10;
  double h_consistency = 1e-8;
  double constraint = 1e-10;
  double extremum = 1e-8;
  double hessian = 1e-14;
  double critical_grad = 1e-10;
  double eta = 1e-12;
};

struct RunConfig {
  std::string command;
  Eigen::Vector3d bianchi = Eigen::Vector3d::Zero();
  double s0 = 0.5;
  Eigen::Matrix3d H0 = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d U0 = Eigen::Matrix3d::Identity();
  IntegratorConfig integrator;
  /// Integrate backwards and forwards from s0 to these ends instead of one way.
  std::optional<std::array<double, 2>> span;
  std::uint64_t seed = 0;
  std::string output_path = ".";
  std::string format = "csv";
  Tolerances tolerance;
  long sphere7_samples = 1'000'000;
  long sphere7_zero_samples = 100;
  /// Trajectory file read by flow-verify.
  std::optional<std::string> trajectory;
  /// Rows are η_i over (e^{23}, e^{31}, e^{12}).
  std::optional<Eigen::Matrix3d> eta;
  bool eta_swap_23 = false;

  BaseGeometry base() const { return {bianchi}; }
  FlowState initial_state() const { return {s0, U0, H0}; }
};

// ---------------------------------------------------------------------------
// JSON text with 17 significant digits.

inline std::string format_double(double x) {
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline void emit_json(std::string& out, const json& j, int indent, int depth, bool compact) {
  auto newline = [&](int d) {
    if (compact) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += compact ? ", " : ",";
        first = false;
        newline(depth + 1);
        out += json(it.key()).dump();
        out += ": ";
        emit_json(out, it.value(), indent, depth + 1, compact);
      }
      newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      // Arrays of scalars and small nested arrays stay on one line.
      bool flat = compact;
      if (!flat) {
        flat = true;
        for (const auto& e : j)
          if (e.is_object() || (e.is_array() && e.size() > 0 && e[0].is_array())) flat = false;
      }
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        emit_json(out, e, indent, depth + 1, flat);
      }
      if (!flat && !j.empty()) newline(depth);
      out += ']';
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Pretty JSON whose floating-point numbers carry 17 significant digits.
inline std::string to_json_text(const json& j, int indent = 2) {
  std::string out;
  detail::emit_json(out, j, indent, 0, indent <= 0);
  return out;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// Key table.

namespace detail {

inline json vec_json(const Eigen::Vector3d& v) { return json::array({v(0), v(1), v(2)}); }

inline json mat_json(const Eigen::Matrix3d& m) {
  json out = json::array();
  for (int i = 0; i < 3; ++i) out.push_back(json::array({m(i, 0), m(i, 1), m(i, 2)}));
  return out;
}

inline double as_number(const std::string& key, const json& v) {
  if (!v.is_number()) throw schema_error("key '" + key + "' must be a number");
  return v.get<double>();
}

inline long long as_integer(const std::string& key, const json& v) {
  if (v.is_number_integer()) return v.get<long long>();
  throw schema_error("key '" + key + "' must be an integer");
}

inline std::string as_string(const std::string& key, const json& v, const std::string& raw) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_discarded()) return raw;
  throw schema_error("key '" + key + "' must be a string");
}

inline Eigen::Vector3d as_vec3(const std::string& key, const json& v) {
  if (!v.is_array() || v.size() != 3) throw schema_error("key '" + key + "' must be an array of three numbers");
  Eigen::Vector3d out;
  for (int i = 0; i < 3; ++i) out(i) = as_number(key, v[i]);
  return out;
}

inline Eigen::Matrix3d as_mat3(const std::string& key, const json& v) {
  if (!v.is_array() || v.size() != 3) throw schema_error("key '" + key + "' must be a 3x3 nested array");
  Eigen::Matrix3d out;
  for (int i = 0; i < 3; ++i) out.row(i) = as_vec3(key, v[i]).transpose();
  return out;
}

struct KeySpec {
  std::string name;
  /// raw is the unparsed text, used for bare strings.
  std::function<void(RunConfig&, const json&, const std::string& raw)> set;
  std::function<std::optional<json>(const RunConfig&)> get;
};

inline const std::vector<KeySpec>& key_table() {
  using Opt = std::optional<json>;
  auto number = [](const std::string& name, double RunConfig::*field) {
    return KeySpec{name, [name, field](RunConfig& c, const json& v, const std::string&) { c.*field = as_number(name, v); },
                   [field](const RunConfig& c) -> Opt { return json(c.*field); }};
  };
  auto integrator_number = [](const std::string& name, double IntegratorConfig::*field) {
    return KeySpec{name,
                   [name, field](RunConfig& c, const json& v, const std::string&) {
                     c.integrator.*field = as_number(name, v);
                   },
                   [field](const RunConfig& c) -> Opt { return json(c.integrator.*field); }};
  };
  auto tolerance = [](const std::string& field_name, double Tolerances::*field) {
    const std::string name = "tolerance." + field_name;
    return KeySpec{name,
                   [name, field](RunConfig& c, const json& v, const std::string&) {
                     c.tolerance.*field = as_number(name, v);
                   },
                   [field](const RunConfig& c) -> Opt { return json(c.tolerance.*field); }};
  };

  static const std::vector<KeySpec> table = [&] {
    std::vector<KeySpec> t;
    t.push_back({"H0", [](RunConfig& c, const json& v, const std::string&) { c.H0 = as_mat3("H0", v); },
                 [](const RunConfig& c) -> Opt { return mat_json(c.H0); }});
    t.push_back({"U0", [](RunConfig& c, const json& v, const std::string&) { c.U0 = as_mat3("U0", v); },
                 [](const RunConfig& c) -> Opt { return mat_json(c.U0); }});
    t.push_back({"bianchi", [](RunConfig& c, const json& v, const std::string&) { c.bianchi = as_vec3("bianchi", v); },
                 [](const RunConfig& c) -> Opt { return vec_json(c.bianchi); }});
    t.push_back({"command",
                 [](RunConfig& c, const json& v, const std::string& raw) { c.command = as_string("command", v, raw); },
                 [](const RunConfig& c) -> Opt { return json(c.command); }});
    t.push_back({"eta.coefficients",
                 [](RunConfig& c, const json& v, const std::string&) { c.eta = as_mat3("eta.coefficients", v); },
                 [](const RunConfig& c) -> Opt { return c.eta ? Opt(mat_json(*c.eta)) : std::nullopt; }});
    t.push_back({"eta.swap_23",
                 [](RunConfig& c, const json& v, const std::string&) {
                   if (!v.is_boolean()) throw schema_error("key 'eta.swap_23' must be true or false");
                   c.eta_swap_23 = v.get<bool>();
                 },
                 [](const RunConfig& c) -> Opt { return json(c.eta_swap_23); }});
    t.push_back({"format",
                 [](RunConfig& c, const json& v, const std::string& raw) { c.format = as_string("format", v, raw); },
                 [](const RunConfig& c) -> Opt { return json(c.format); }});
    t.push_back({"integrator.direction",
                 [](RunConfig& c, const json& v, const std::string&) {
                   c.integrator.direction = static_cast<int>(as_integer("integrator.direction", v));
                 },
                 [](const RunConfig& c) -> Opt { return json(c.integrator.direction); }});
    t.push_back({"integrator.max_steps",
                 [](RunConfig& c, const json& v, const std::string&) {
                   c.integrator.max_steps = static_cast<long>(as_integer("integrator.max_steps", v));
                 },
                 [](const RunConfig& c) -> Opt { return json(c.integrator.max_steps); }});
    t.push_back(integrator_number("integrator.metric_max", &IntegratorConfig::metric_max));
    t.push_back(integrator_number("integrator.rho_min", &IntegratorConfig::rho_min));
    t.push_back({"integrator.s_end",
                 [](RunConfig& c, const json& v, const std::string&) {
                   c.integrator.s_end = as_number("integrator.s_end", v);
                 },
                 [](const RunConfig& c) -> Opt {
                   return c.integrator.s_end ? Opt(json(*c.integrator.s_end)) : std::nullopt;
                 }});
    t.push_back(integrator_number("integrator.s_min", &IntegratorConfig::s_min));
    t.push_back(integrator_number("integrator.step", &IntegratorConfig::step));
    t.push_back(integrator_number("integrator.symmetry_limit", &IntegratorConfig::symmetry_limit));
    t.push_back(integrator_number("integrator.u_min", &IntegratorConfig::u_min));
    t.push_back(integrator_number("integrator.wall_fraction", &IntegratorConfig::wall_fraction));
    t.push_back({"output_path",
                 [](RunConfig& c, const json& v, const std::string& raw) {
                   c.output_path = as_string("output_path", v, raw);
                 },
                 [](const RunConfig& c) -> Opt { return json(c.output_path); }});
    t.push_back(number("s0", &RunConfig::s0));
    t.push_back({"seed",
                 [](RunConfig& c, const json& v, const std::string&) {
                   if (!v.is_number_unsigned()) throw schema_error("key 'seed' must be a non-negative integer");
                   c.seed = v.get<std::uint64_t>();
                 },
                 [](const RunConfig& c) -> Opt { return json(c.seed); }});
    t.push_back({"span",
                 [](RunConfig& c, const json& v, const std::string&) {
                   if (!v.is_array() || v.size() != 2) throw schema_error("key 'span' must be an array [lo, hi]");
                   c.span = std::array<double, 2>{as_number("span", v[0]), as_number("span", v[1])};
                 },
                 [](const RunConfig& c) -> Opt {
                   return c.span ? Opt(json::array({(*c.span)[0], (*c.span)[1]})) : std::nullopt;
                 }});
    t.push_back({"sphere7.samples",
                 [](RunConfig& c, const json& v, const std::string&) {
                   c.sphere7_samples = static_cast<long>(as_integer("sphere7.samples", v));
                 },
                 [](const RunConfig& c) -> Opt { return json(c.sphere7_samples); }});
    t.push_back({"sphere7.zero_samples",
                 [](RunConfig& c, const json& v, const std::string&) {
                   c.sphere7_zero_samples = static_cast<long>(as_integer("sphere7.zero_samples", v));
                 },
                 [](const RunConfig& c) -> Opt { return json(c.sphere7_zero_samples); }});
    t.push_back(tolerance("closed_form", &Tolerances::closed_form));
    t.push_back(tolerance("commutation", &Tolerances::commutation));
    t.push_back(tolerance("constraint", &Tolerances::constraint));
    t.push_back(tolerance("critical_grad", &Tolerances::critical_grad));
    t.push_back(tolerance("eta", &Tolerances::eta));
    t.push_back(tolerance("evolution", &Tolerances::evolution));
    t.push_back(tolerance("extremum", &Tolerances::extremum));
    t.push_back(tolerance("h_consistency", &Tolerances::h_consistency));
    t.push_back(tolerance("hessian", &Tolerances::hessian));
    t.push_back(tolerance("nearly_parallel", &Tolerances::nearly_parallel));
    t.push_back(tolerance("split", &Tolerances::split));
    t.push_back(tolerance("symmetry", &Tolerances::symmetry));
    t.push_back({"trajectory",
                 [](RunConfig& c, const json& v, const std::string& raw) {
                   c.trajectory = as_string("trajectory", v, raw);
                 },
                 [](const RunConfig& c) -> Opt { return c.trajectory ? Opt(json(*c.trajectory)) : std::nullopt; }});
    return t;
  }();
  return table;
}

inline const KeySpec* find_key(const std::string& name) {
  for (const auto& k : key_table())
    if (k.name == name) return &k;
  return nullptr;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Drops a trailing `# comment` that is not inside a quoted string.
inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

}  // namespace detail

/// The raw key/value pairs of a config text, in file order.
inline std::vector<std::pair<std::string, std::string>> read_pairs(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = detail::trim(detail::strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw schema_error("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = detail::trim(body.substr(0, eq));
    if (key.empty()) throw schema_error("line " + std::to_string(line_no) + ": empty key");
    for (const auto& [k, v] : out)
      if (k == key) throw schema_error("duplicate key '" + key + "'");
    out.emplace_back(key, detail::trim(body.substr(eq + 1)));
  }
  return out;
}

/// Keys each command cannot run without.
inline std::vector<std::string> required_keys(const std::string& command) {
  if (command == "flow-run") return {"bianchi", "s0"};
  if (command == "flow-verify") return {"bianchi", "trajectory"};
  if (command == "eta-init") return {"eta.coefficients", "s0"};
  return {};
}

/// Range and shape checks that go beyond the key types.
inline void validate(const RunConfig& c) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), c.command) == names.end())
    throw value_error("unknown command '" + c.command + "'");
  if (c.format != "csv" && c.format != "json") throw value_error("format must be csv or json");
  if (!c.H0.allFinite() || !c.U0.allFinite() || !c.bianchi.allFinite() || !std::isfinite(c.s0))
    throw value_error("initial data must be finite");
  const double scale = std::max(1.0, c.H0.cwiseAbs().maxCoeff());
  if ((c.H0 - c.H0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw value_error("H0 must be symmetric");
  if (Eigen::LLT<Eigen::Matrix3d>(c.H0).info() != Eigen::Success) throw value_error("H0 must be positive-definite");
  if (c.command == "flow-run") {
    if (c.s0 == 0.0) throw value_error("s0 must be nonzero");
    if (!(c.H0.determinant() - c.s0 * c.s0 > 0.0)) throw value_error("rho = det H0 - s0^2 must be positive");
    if (!(std::abs(c.U0.determinant()) > 0.0)) throw value_error("U0 must be invertible");
  }
  if (c.command == "eta-init" && !(c.s0 != 0.0 && c.s0 * c.s0 < 1.0))
    throw value_error("eta-init needs 0 < s0^2 < 1");
  if (c.span) {
    const auto [lo, hi] = *c.span;
    if (!(lo < hi)) throw value_error("span must satisfy lo < hi");
    if (c.command == "flow-run" && !(lo <= c.s0 && c.s0 <= hi)) throw value_error("span must contain s0");
  }
  try {
    c.integrator.validate();
  } catch (const Error& e) {
    throw value_error(e.what());
  }
  if (c.sphere7_samples <= 0 || c.sphere7_zero_samples < 0) throw value_error("sphere7 sample counts must be positive");
  const Tolerances& t = c.tolerance;
  for (double v : {t.closed_form, t.nearly_parallel, t.split, t.evolution, t.commutation, t.symmetry, t.h_consistency,
                   t.constraint, t.extremum, t.hessian, t.critical_grad, t.eta})
    if (!(v > 0.0)) throw value_error("tolerances must be positive");
}

/// Parses a config text. command_override (from the command line) wins over a
/// `command` key; the two must agree when both are given.
inline RunConfig parse_config(const std::string& text, const std::string& command_override = "") {
  RunConfig c;
  std::vector<std::string> seen;
  for (const auto& [key, raw] : read_pairs(text)) {
    const detail::KeySpec* spec = detail::find_key(key);
    if (!spec) throw schema_error("unknown key '" + key + "'");
    const json value = json::parse(raw, nullptr, false);
    spec->set(c, value, raw);
    seen.push_back(key);
  }
  if (!command_override.empty()) {
    if (!c.command.empty() && c.command != command_override)
      throw value_error("config command '" + c.command + "' conflicts with '" + command_override + "'");
    c.command = command_override;
  }
  if (c.command.empty()) throw schema_error("missing required field 'command'");
  for (const auto& key : required_keys(c.command))
    if (std::find(seen.begin(), seen.end(), key) == seen.end())
      throw schema_error("missing required field '" + key + "' for " + c.command);
  validate(c);
  return c;
}

/// Every key with its value, sorted by key.
inline json config_json(const RunConfig& c, bool include_output_path = true) {
  json out = json::object();
  for (const auto& spec : detail::key_table()) {
    if (!include_output_path && spec.name == "output_path") continue;
    if (auto v = spec.get(c)) out[spec.name] = *v;
  }
  return out;
}

/// Normal form of a config: one `key = value` line per key, sorted, defaults
/// filled in. parse_config(serialize_config(c)) reproduces c exactly.
inline std::string serialize_config(const RunConfig& c) {
  std::string out;
  const json all = config_json(c);
  for (const auto& [key, value] : all.items()) out += key + " = " + to_json_text(value, 0) + "\n";
  return out;
}

/// Hash of the normal form without output_path, so the same run written to
/// different directories carries the same hash.
inline std::string config_hash(const RunConfig& c) {
  std::string text;
  const json all = config_json(c, false);
  for (const auto& [key, value] : all.items()) text += key + " = " + to_json_text(value, 0) + "\n";
  return hex64(fnv1a64(text));
}

}  // namespace g2lab::cli
