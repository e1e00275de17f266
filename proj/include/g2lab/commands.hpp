#pragma once

// The four analysis commands behind the g2lab executable. Each returns a
// report with named checks and writes its files under config.output_path.

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "g2lab/config.hpp"
#include "g2lab/flow.hpp"
#include "g2lab/io.hpp"
#include "g2lab/sphere7.hpp"
#include "g2lab/torus_reduction.hpp"

namespace g2lab::cli {

struct Check {
  std::string name;
  double value;
  double limit;
  /// "<" or "==".
  std::string relation;
  bool pass;
};

inline Check check_below(const std::string& name, double value, double limit) {
  return {name, value, limit, "<", value < limit};
}

inline Check check_equal(const std::string& name, double value, double expected) {
  return {name, value, expected, "==", value == expected};
}

struct RunReport {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  json config;
  json headline = json::object();
  std::vector<Check> checks;
  std::vector<std::string> outputs;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  json to_json() const {
    json checks_json = json::array();
    for (const auto& c : checks)
      checks_json.push_back(
          {{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"relation", c.relation}, {"pass", c.pass}});
    return {{"schema", 1},       {"command", command}, {"config_hash", config_hash}, {"seed", seed},
            {"config", config},  {"headline", headline}, {"checks", checks_json},    {"pass", pass()},
            {"outputs", outputs}};
  }
};

namespace detail {

inline json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

inline json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline double smallest_singular(const Eigen::Matrix3d& U) {
  return Eigen::JacobiSVD<Eigen::Matrix3d>(U).singularValues()(2);
}

inline bool is_identity(const Eigen::Matrix3d& m) { return m == Eigen::Matrix3d::Identity(); }

inline void emit_output(RunReport& report, const RunConfig& config, const std::string& name,
                        const std::string& contents) {
  write_atomic(std::filesystem::path(config.output_path) / name, contents);
  report.outputs.push_back(name);
}

}  // namespace detail

inline RunReport new_report(const RunConfig& config) {
  RunReport r;
  r.command = config.command;
  r.config_hash = config_hash(config);
  r.seed = config.seed;
  r.config = config_json(config, false);
  return r;
}

// ---------------------------------------------------------------------------

inline RunReport run_sphere7_analyze(const RunConfig& config) {
  using namespace sphere7;
  RunReport report = new_report(config);
  const Tolerances& tol = config.tolerance;

  const ExtremaSearch search = search_extrema(static_cast<std::size_t>(config.sphere7_samples), config.seed);
  const double max_nu = nu(search.maximum.point), min_nu = nu(search.minimum.point);

  Vector8d q_vec;
  q_vec << 0.5, 0, 0.5, 0, 0.5, 0, 0, 0.5;
  const SpherePoint q(q_vec);
  const HessianReport hess = hessian_at(q);
  Matrix8d block = Matrix8d::Zero(), rank5 = Matrix8d::Zero();
  const Eigen::Matrix4d ones = Eigen::Matrix4d::Ones(), id = Eigen::Matrix4d::Identity();
  block.topLeftCorner<4, 4>() = 0.5 * (ones - 4.0 * id);
  block.bottomRightCorner<4, 4>() = -ones;
  rank5 = block;
  rank5.topLeftCorner<4, 4>() = 0.5 * (ones - 3.0 * id);
  const HessianReport hess_max = hessian_at(search.maximum.point);

  // The six three-spheres {z^i = z^j = 0} and the two reference points.
  std::mt19937_64 rng(chunk_seed(config.seed, 1u << 20));
  double zero_grad = 0.0, zero_nu = 0.0;
  json counts = {{"regular", 0}, {"critical_nonzero_associative", 0}, {"critical_zero_degenerate", 0},
                 {"dichotomy_violation", 0}};
  long violations = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (long k = 0; k < config.sphere7_zero_samples; ++k) {
        const SpherePoint p = sample_zero_sphere(i, j, rng);
        const CriticalReport c = critical_classify(p);
        zero_grad = std::max(zero_grad, c.grad_norm);
        zero_nu = std::max(zero_nu, std::abs(c.nu));
        counts[to_string(c.kind)] = counts[to_string(c.kind)].get<long>() + 1;
        if (c.kind != CriticalKind::critical_zero_degenerate) ++violations;
      }
  const CriticalReport at_q = critical_classify(q);
  const CriticalReport at_pole = critical_classify(SpherePoint(Vector8d::Unit(0)));

  report.headline = {{"nu_max", max_nu},
                     {"nu_min", min_nu},
                     {"sample_max", search.sample_max},
                     {"sample_min", search.sample_min},
                     {"samples", search.samples},
                     {"hessian_at_q", detail::matrix_json(hess.matrix)},
                     {"hessian_rank", hess.rank},
                     {"hessian_rank_at_maximum", hess_max.rank},
                     {"hessian_singular_values", detail::vector_json(hess.singular_values)},
                     {"intrinsic_hessian_eigenvalues", detail::vector_json(hess.intrinsic_eigenvalues)},
                     {"rank5_block_deviation", (hess.matrix - rank5).cwiseAbs().maxCoeff()},
                     {"q_classification", to_string(at_q.kind)},
                     {"pole_classification", to_string(at_pole.kind)},
                     {"zero_sphere_counts", counts},
                     {"zero_sphere_max_grad", zero_grad},
                     {"zero_sphere_max_abs_nu", zero_nu}};
  report.checks = {
      check_below("maximum_error", std::abs(max_nu - 0.25), tol.extremum),
      check_below("minimum_error", std::abs(min_nu + 0.25), tol.extremum),
      check_below("hessian_block_deviation", (hess.matrix - block).cwiseAbs().maxCoeff(), tol.hessian),
      check_equal("hessian_rank", hess.rank, 4),
      check_equal("hessian_rank_at_maximum", hess_max.rank, 4),
      check_equal("q_is_associative_critical", at_q.kind == CriticalKind::critical_nonzero_associative, 1),
      check_equal("pole_is_degenerate_critical", at_pole.kind == CriticalKind::critical_zero_degenerate, 1),
      check_below("zero_sphere_grad", zero_grad, tol.critical_grad),
      check_below("zero_sphere_nu", zero_nu, tol.critical_grad),
      check_equal("zero_sphere_misclassified", static_cast<double>(violations), 0),
  };
  return report;
}

// ---------------------------------------------------------------------------

inline double closed_form_error(const FlowSolution& sol, double s0) {
  double err = 0.0;
  for (const auto& r : sol.samples) {
    const FlowState ref = abelian_reference(s0, r.state.s);
    err = std::max(err, (r.state.H - ref.H).cwiseAbs().maxCoeff() / ref.H.cwiseAbs().maxCoeff());
    err = std::max(err, (r.state.U - ref.U).cwiseAbs().maxCoeff() / ref.U.cwiseAbs().maxCoeff());
  }
  return err;
}

inline RunReport run_flow(const RunConfig& config) {
  RunReport report = new_report(config);
  const Tolerances& tol = config.tolerance;
  const BaseGeometry base = config.base();
  const FlowSolution sol = config.span
                               ? integrate_span(config.initial_state(), base, config.integrator, (*config.span)[0],
                                                (*config.span)[1])
                               : integrate(config.initial_state(), base, config.integrator);

  double sigma = 0.0, tau = 0.0;
  for (const auto& r : sol.samples) {
    sigma = std::max(sigma, r.sigma_constraint);
    tau = std::max(tau, r.tau_constraint);
  }
  const FlowState& last = sol.samples.back().state;
  report.headline = {{"samples", sol.samples.size()},
                     {"steps", sol.steps},
                     {"s_first", sol.s_first()},
                     {"s_last", sol.s_last()},
                     {"termination", to_string(sol.termination)},
                     {"final_rho", last.rho()},
                     {"final_u_min", detail::smallest_singular(last.U)},
                     {"final_det_U", last.U.determinant()},
                     {"max_symmetry_drift", sol.max_symmetry_drift()},
                     {"max_h_consistency", sol.max_h_consistency()},
                     {"max_sigma_constraint", sigma},
                     {"max_tau_constraint", tau}};
  if (sol.backward_termination) report.headline["backward_termination"] = to_string(*sol.backward_termination);
  report.checks = {
      check_equal("symmetry_limit_respected", sol.ok(), 1),
      check_below("symmetry_drift", sol.max_symmetry_drift(), tol.symmetry),
      check_below("h_consistency", sol.max_h_consistency(), tol.h_consistency),
      check_below("sigma_constraint", sigma, tol.constraint),
      check_below("tau_constraint", tau, tol.constraint),
  };
  const bool abelian_identity = base.lambda.isZero(0.0) && detail::is_identity(config.H0) &&
                                detail::is_identity(config.U0) && config.s0 > 0.0 && config.s0 < 1.0;
  if (abelian_identity) {
    const double err = closed_form_error(sol, config.s0);
    report.headline["closed_form_relative_error"] = err;
    report.checks.push_back(check_below("closed_form_relative_error", err, tol.closed_form));
  }

  const std::string termination = to_string(sol.termination);
  if (config.format == "csv")
    detail::emit_output(report, config, "trajectory.csv", trajectory_csv(sol.samples, termination));
  else
    detail::emit_output(report, config, "trajectory.json", to_json_text(trajectory_json(sol.samples, termination)));
  return report;
}

// ---------------------------------------------------------------------------

inline RunReport run_flow_verify(const RunConfig& config) {
  RunReport report = new_report(config);
  const Tolerances& tol = config.tolerance;
  const std::filesystem::path path(*config.trajectory);
  const std::string text = read_file(path);
  std::vector<FlowState> states =
      path.extension() == ".json" ? read_trajectory_json(text) : read_trajectory_csv(text);
  if (states.size() > 1 && states.back().s < states.front().s) std::reverse(states.begin(), states.end());
  const VerifyReport v = verify_solution(states, config.base());
  report.headline = {{"samples", states.size()},     {"samples_checked", v.samples_checked},
                     {"s_lo", v.s_lo},                {"s_hi", v.s_hi},
                     {"nearly_parallel", v.nearly_parallel}, {"deg0", v.deg0},
                     {"d_sigma", v.d_sigma},          {"tau_evolution", v.tau_evolution},
                     {"commutation", v.commutation}};
  report.checks = {
      check_below("nearly_parallel", v.nearly_parallel, tol.nearly_parallel),
      check_below("deg0", v.deg0, tol.split),
      check_below("d_sigma", v.d_sigma, tol.split),
      check_below("tau_evolution", v.tau_evolution, tol.evolution),
      check_below("commutation", v.commutation, tol.commutation),
  };
  return report;
}

// ---------------------------------------------------------------------------

inline RunReport run_eta_init(const RunConfig& config) {
  RunReport report = new_report(config);
  const FormTriple eta = two_form_triple(*config.eta);
  const BaseGeometry base = config.base();
  if (exterior_derivative(eta, base.frame()).max_abs() > config.tolerance.eta)
    throw value_error("eta must be closed on the chosen base");

  const EtaDecomposition dec = eta_to_coframe(eta, config.s0, config.eta_swap_23);
  const InvariantData data{config.s0, dec.U, Eigen::Matrix3d::Identity(), base};
  const double round_trip = max_difference(wedge_square(data.alpha()), dec.c_hat * dec.epsilon * dec.eta);
  const DerivedForms forms = derive_forms(data);
  const ClosureReport closure = check_closed(data);

  report.headline = {{"epsilon", dec.epsilon},
                     {"c_hat", dec.c_hat},
                     {"f", detail::vector_json(dec.f)},
                     {"U0", detail::matrix_json(dec.U)},
                     {"sigma_minus_tau", max_difference(forms.sigma, forms.tau)},
                     {"sigma_closure", closure.sigma_residual},
                     {"tau_closure", closure.tau_residual}};
  report.checks = {
      check_below("wedge_square_round_trip", round_trip, config.tolerance.eta),
      check_below("sigma_equals_tau", max_difference(forms.sigma, forms.tau), config.tolerance.eta),
      check_below("sigma_closure", closure.sigma_residual, config.tolerance.eta),
      check_below("tau_closure", closure.tau_residual, config.tolerance.eta),
  };

  // Initial data for a follow-up flow-run.
  RunConfig next = config;
  next.command = "flow-run";
  next.U0 = dec.U;
  next.H0 = Eigen::Matrix3d::Identity();
  next.eta.reset();
  next.eta_swap_23 = false;
  next.trajectory.reset();
  next.output_path = (std::filesystem::path(config.output_path) / "flow").string();
  detail::emit_output(report, config, "initial.cfg", serialize_config(next));
  return report;
}

// ---------------------------------------------------------------------------

/// Runs the configured command and writes report.json next to its outputs.
/// Library errors surface as value errors; I/O problems as io errors.
inline RunReport run(const RunConfig& config) {
  RunReport report;
  try {
    if (config.command == "sphere7-analyze")
      report = run_sphere7_analyze(config);
    else if (config.command == "flow-run")
      report = run_flow(config);
    else if (config.command == "flow-verify")
      report = run_flow_verify(config);
    else if (config.command == "eta-init")
      report = run_eta_init(config);
    else
      throw value_error("unknown command '" + config.command + "'");
  } catch (const Error& e) {
    throw value_error(e.what());
  }
  report.outputs.push_back("report.json");
  write_atomic(std::filesystem::path(config.output_path) / "report.json", to_json_text(report.to_json()) + "\n");
  return report;
}

inline int exit_code(const RunReport& report) {
  return static_cast<int>(report.pass() ? ExitCode::pass : ExitCode::tolerance_failure);
}

/// The machine-readable error object printed on failure.
inline std::string error_json(const CliError& e) {
  return to_json_text({{"schema", 1}, {"error", {{"kind", e.kind()}, {"exit_code", e.exit_code()}, {"message", e.what()}}}},
                      0);
}

}  // namespace g2lab::cli
