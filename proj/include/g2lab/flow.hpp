#pragma once

// The first-order system in s for (U, H), its consistency constraints, a
// fixed-step RK4 integrator that slows down near the walls s = 0, ρ = 0 and
// det U = 0, and an end-to-end check of the lifted structure.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "g2lab/error.hpp"
#include "g2lab/exterior.hpp"
#include "g2lab/g2.hpp"
#include "g2lab/jet.hpp"
#include "g2lab/torus_reduction.hpp"

namespace g2lab {

struct FlowState {
  double s = 0.0;
  Eigen::Matrix3d U = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d H = Eigen::Matrix3d::Identity();

  double h() const { return H.determinant(); }
  double rho() const { return h() - s * s; }
  InvariantData data(const BaseGeometry& base) const { return {s, U, H, base}; }
};

struct FlowDerivative {
  Eigen::Matrix3d A;
  Eigen::Matrix3d U_prime;
  Eigen::Matrix3d H_prime;
  /// Tr(H′ adj H).
  double h_prime;
};

inline void require_regular(double s, double h, double rho, const Eigen::Matrix3d& U) {
  if (!(s != 0.0)) throw Error(ErrorCode::outside_regular_regime, "s = 0: the flow is singular there");
  if (!(h > 0.0)) throw Error(ErrorCode::outside_regular_regime, "h = det H must be positive");
  if (!(rho > 0.0)) throw Error(ErrorCode::outside_regular_regime, "rho = det H - s^2 must be positive");
  if (!(std::abs(U.determinant()) >= coframe_det_floor))
    throw Error(ErrorCode::near_collapse, "det U below threshold");
}

/// H′ = −H/s + ρ/(4hs) HBH − s/(4h) RH and α′ = Aα with
/// A = −5s/(2ρ) Id − s/(4hρ) Fᵀ + s/(4h)(Rᵀ + BᵀH).
inline FlowDerivative flow_rhs(const FlowState& state, const PointwiseJet& jet) {
  const double s = state.s, h = state.h(), rho = h - s * s;
  require_regular(s, h, rho, state.U);
  const Eigen::Matrix3d& H = state.H;
  const Eigen::Matrix3d R = jet.R();
  const Eigen::Matrix3d F = jet.F(H);
  FlowDerivative out;
  out.H_prime = -H / s + (rho / (4.0 * h * s)) * H * jet.B * H - (s / (4.0 * h)) * R * H;
  out.A = (-5.0 * s / (2.0 * rho)) * Eigen::Matrix3d::Identity() - (s / (4.0 * h * rho)) * F.transpose() +
          (s / (4.0 * h)) * (R.transpose() + jet.B.transpose() * H);
  out.U_prime = out.A * state.U;
  out.h_prime = (out.H_prime * adjugate(H)).trace();
  return out;
}

inline PointwiseJet homogeneous_jet(const FlowState& state, const BaseGeometry& base) {
  return PointwiseJet::homogeneous(structure_coeffs(state.U, base));
}

struct ConsistencyResiduals {
  /// |Tr(H′ adj H) − (−3h/s + ρ/(4s) Tr(HB))|.
  double h_prime;
  /// ‖B^♮ − s²/(hρ) S‖, the pointwise form of d₃σ = 0.
  double sigma_constraint;
  /// ‖(RH + HBH)^♮ − (1/ρ) adj H S‖, the pointwise form of d₃τ = 0.
  double tau_constraint;
};

inline Eigen::Vector3d sigma_constraint_vector(const FlowState& state, const PointwiseJet& jet) {
  const double h = state.h(), rho = h - state.s * state.s;
  return natural_flat(jet.B) - (state.s * state.s / (h * rho)) * jet.S(state.H);
}

inline Eigen::Vector3d tau_constraint_vector(const FlowState& state, const PointwiseJet& jet) {
  const Eigen::Matrix3d& H = state.H;
  const double rho = state.rho();
  return natural_flat(jet.R() * H + H * jet.B * H) - (1.0 / rho) * adjugate(H) * jet.S(H);
}

inline ConsistencyResiduals consistency_residuals(const FlowState& state, const PointwiseJet& jet) {
  const FlowDerivative d = flow_rhs(state, jet);
  const double s = state.s, h = state.h(), rho = h - s * s;
  const double h_rhs = -3.0 * h / s + rho / (4.0 * s) * (state.H * jet.B).trace();
  return {std::abs(d.h_prime - h_rhs), sigma_constraint_vector(state, jet).norm(),
          tau_constraint_vector(state, jet).norm()};
}

/// A random jet satisfying both pointwise constraints. The symmetric part of B
/// and a candidate K are drawn uniformly; the 21 unknowns (K and B^♮) are then
/// moved by the minimum-norm correction onto the 6 linear constraints.
inline PointwiseJet sample_consistent_jet(const Eigen::Matrix3d& H, const Eigen::Matrix3d& U, double s,
                                          std::uint64_t seed, bool zero_k = false) {
  const FlowState state{s, U, H};
  require_regular(s, state.h(), state.rho(), U);
  require(Eigen::LLT<Eigen::Matrix3d>(H).info() == Eigen::Success, "H must be positive definite");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> draw(-1.0, 1.0);

  auto random_symmetric = [&] {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) m(i, j) = m(j, i) = draw(rng);
    return m;
  };
  const Eigen::Matrix3d b_sym = random_symmetric();
  if (zero_k) return PointwiseJet::homogeneous(b_sym);

  // Unknowns: 6 upper-triangular entries of each K[p], then B^♮.
  constexpr int n = 21;
  auto unpack = [&](const Eigen::Matrix<double, n, 1>& x) {
    PointwiseJet jet;
    int idx = 0;
    for (int p = 0; p < 3; ++p)
      for (int i = 0; i < 3; ++i)
        for (int a = i; a < 3; ++a) jet.K[p](i, a) = jet.K[p](a, i) = x(idx++);
    jet.B = b_sym;
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      jet.B(j, k) += 0.5 * x(18 + i);
      jet.B(k, j) -= 0.5 * x(18 + i);
    }
    return jet;
  };
  // Both constraints are linear in the unknowns and vanish at x = 0 (b_sym is symmetric).
  auto constraints = [&](const Eigen::Matrix<double, n, 1>& x) {
    const PointwiseJet jet = unpack(x);
    Eigen::Matrix<double, 6, 1> c;
    c << sigma_constraint_vector(state, jet), tau_constraint_vector(state, jet);
    return c;
  };
  Eigen::Matrix<double, 6, n> L;
  for (int col = 0; col < n; ++col) L.col(col) = constraints(Eigen::Matrix<double, n, 1>::Unit(col));

  Eigen::JacobiSVD<Eigen::Matrix<double, 6, n>> svd(L, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(1e-10);
  if (svd.rank() == 6) {
    Eigen::Matrix<double, n, 1> x0;
    for (int i = 0; i < n; ++i) x0(i) = draw(rng);
    return unpack(x0 - svd.solve(L * x0));
  }
  throw Error(ErrorCode::singular_matrix, "constraint system for the jet is rank deficient");
}

/// Coefficient matrix Θ of θ′ = Θ e, with θ′ = (1/s) α′ + (1/ρ) α.
inline Eigen::Matrix3d theta_prime_matrix(const FlowState& state, const PointwiseJet& jet) {
  const FlowDerivative d = flow_rhs(state, jet);
  return d.U_prime / state.s + state.U / state.rho();
}

inline FormTriple theta_prime(const FlowState& state, const PointwiseJet& jet) {
  return coframe_triple(theta_prime_matrix(state, jet));
}

/// s-derivative of the curvature matrix C of d₆θ = C·wedge_square(e), from the
/// flow equations, for left-invariant data.
inline Eigen::Matrix3d curvature_prime_matrix(const FlowState& state, const BaseGeometry& base) {
  const FlowDerivative d = flow_rhs(state, homogeneous_jet(state, base));
  const double s = state.s, rho = state.rho();
  const double rho_prime = d.h_prime - 2.0 * s;
  const Eigen::Matrix3d C = curvature_matrix(state.data(base));
  const Eigen::Matrix3d adj = adjugate(state.H), cof = cofactor(state.U);
  const Eigen::Matrix3d adj_p = adjugate_derivative(state.H, d.H_prime);
  const Eigen::Matrix3d cof_p = adjugate_derivative(state.U, d.U_prime).transpose();
  const Eigen::Matrix3d inner = d.U_prime * base.lambda.asDiagonal() + (4.0 * rho_prime / (rho * rho)) * adj * cof -
                                (4.0 / rho) * (adj_p * cof + adj * cof_p);
  return -C / s + inner / s;
}

// ---------------------------------------------------------------------------
// Integration.

enum class Termination { rho_floor, u_floor, s_floor, metric_blowup, max_steps, s_end, symmetry_drift };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::rho_floor: return "rho_floor";
    case Termination::u_floor: return "u_floor";
    case Termination::s_floor: return "s_floor";
    case Termination::metric_blowup: return "metric_blowup";
    case Termination::max_steps: return "max_steps";
    case Termination::s_end: return "s_end";
    case Termination::symmetry_drift: return "symmetry_drift";
  }
  return "unknown";
}

struct IntegratorConfig {
  double step = 1e-4;
  int direction = 1;
  double rho_min = 1e-6;
  /// Floor on the smallest singular value of U.
  double u_min = 1e-8;
  double s_min = 1e-8;
  /// Ceiling on the largest entry of H. The quadratic term in H′ can blow up
  /// in finite s away from the three walls.
  double metric_max = 1e4;
  long max_steps = 2'000'000;
  std::optional<double> s_end;
  /// A step never exceeds this fraction of the estimated distance to a wall.
  double wall_fraction = 0.05;
  /// Largest tolerated |H − Hᵀ| before the run is declared failed.
  double symmetry_limit = 1e-8;

  void validate() const {
    require(step > 0.0 && std::isfinite(step), "step must be positive");
    require(direction == 1 || direction == -1, "direction must be +1 or -1");
    require(rho_min > 0.0 && u_min > 0.0 && s_min > 0.0, "stop thresholds must be positive");
    require(metric_max > 0.0, "metric_max must be positive");
    require(max_steps > 0, "max_steps must be positive");
    require(wall_fraction > 0.0 && wall_fraction <= 1.0, "wall_fraction must lie in (0, 1]");
    require(symmetry_limit > 0.0, "symmetry_limit must be positive");
  }
};

struct SampleRecord {
  FlowState state;
  /// h obtained by integrating h′ = −3h/s + ρ/(4s) Tr(HB) alongside (U, H).
  double h_integrated = 0.0;
  /// |det H − h_integrated| relative to max(1, |h_integrated|).
  double h_consistency = 0.0;
  double symmetry_drift = 0.0;
  double sigma_constraint = 0.0;
  double tau_constraint = 0.0;
};

struct FlowSolution {
  BaseGeometry base;
  /// In integration order; increasing s for integrate_span.
  std::vector<SampleRecord> samples;
  Termination termination = Termination::max_steps;
  std::optional<Termination> backward_termination;
  long steps = 0;

  bool ok() const {
    return termination != Termination::symmetry_drift && backward_termination != Termination::symmetry_drift;
  }
  double s_first() const { return samples.front().state.s; }
  double s_last() const { return samples.back().state.s; }
  std::vector<FlowState> states() const {
    std::vector<FlowState> out;
    out.reserve(samples.size());
    for (const auto& r : samples) out.push_back(r.state);
    return out;
  }
  double max_symmetry_drift() const {
    double out = 0.0;
    for (const auto& r : samples) out = std::max(out, r.symmetry_drift);
    return out;
  }
  double max_h_consistency() const {
    double out = 0.0;
    for (const auto& r : samples) out = std::max(out, r.h_consistency);
    return out;
  }
};

namespace detail {

struct FlowVector {
  Eigen::Matrix3d U;
  Eigen::Matrix3d H;
  double h;

  FlowVector operator+(const FlowVector& o) const { return {U + o.U, H + o.H, h + o.h}; }
  FlowVector operator*(double c) const { return {c * U, c * H, c * h}; }
};

inline FlowVector derivative(double s, const FlowVector& y, const BaseGeometry& base) {
  const FlowState state{s, y.U, y.H};
  const PointwiseJet jet = homogeneous_jet(state, base);
  const FlowDerivative d = flow_rhs(state, jet);
  // The integrated h follows the trace form of h′ and never looks at det H.
  const double h_rhs = -3.0 * y.h / s + (y.h - s * s) / (4.0 * s) * (y.H * jet.B).trace();
  return {d.U_prime, d.H_prime, h_rhs};
}

inline double smallest_singular_value(const Eigen::Matrix3d& U) {
  return Eigen::JacobiSVD<Eigen::Matrix3d>(U).singularValues()(2);
}

/// Rate of change of the smallest singular value of U along U′.
inline double smallest_singular_rate(const Eigen::Matrix3d& U, const Eigen::Matrix3d& U_prime) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(U, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU().col(2).dot(U_prime * svd.matrixV().col(2));
}

inline SampleRecord record(double s, const FlowVector& y, const BaseGeometry& base) {
  SampleRecord r;
  r.state = {s, y.U, y.H};
  r.h_integrated = y.h;
  r.h_consistency = std::abs(y.H.determinant() - y.h) / std::max(1.0, std::abs(y.h));
  r.symmetry_drift = (y.H - y.H.transpose()).cwiseAbs().maxCoeff();
  const PointwiseJet jet = homogeneous_jet(r.state, base);
  r.sigma_constraint = sigma_constraint_vector(r.state, jet).norm();
  r.tau_constraint = tau_constraint_vector(r.state, jet).norm();
  return r;
}

}  // namespace detail

/// Classical RK4 in s for left-invariant data on a diagonal Bianchi base. H is
/// never re-symmetrised; its drift is recorded and ends the run if it exceeds
/// config.symmetry_limit.
inline FlowSolution integrate(const FlowState& initial, const BaseGeometry& base, const IntegratorConfig& config) {
  config.validate();
  initial.data(base).validate();
  using detail::FlowVector;
  const int dir = config.direction;
  if (config.s_end) require((*config.s_end - initial.s) * dir >= 0.0, "s_end lies behind the start");

  FlowSolution out;
  out.base = base;
  double s = initial.s;
  FlowVector y{initial.U, initial.H, initial.h()};
  out.samples.push_back(detail::record(s, y, base));

  auto wall_reached = [&](double s_now, const FlowVector& v) -> std::optional<Termination> {
    if (std::abs(s_now) < config.s_min) return Termination::s_floor;
    if (v.H.determinant() - s_now * s_now < config.rho_min) return Termination::rho_floor;
    if (detail::smallest_singular_value(v.U) < config.u_min) return Termination::u_floor;
    if (v.H.cwiseAbs().maxCoeff() > config.metric_max) return Termination::metric_blowup;
    return std::nullopt;
  };

  while (true) {
    if (out.samples.back().symmetry_drift > config.symmetry_limit) {
      out.termination = Termination::symmetry_drift;
      break;
    }
    if (auto wall = wall_reached(s, y)) {
      out.termination = *wall;
      break;
    }
    if (config.s_end && std::abs(*config.s_end - s) <= 1e-14 * std::max(1.0, std::abs(s))) {
      out.termination = Termination::s_end;
      break;
    }
    if (out.steps >= config.max_steps) {
      out.termination = Termination::max_steps;
      break;
    }

    const FlowVector k1 = detail::derivative(s, y, base);
    const double rho = y.H.determinant() - s * s;
    const double sigma_min = detail::smallest_singular_value(y.U);

    // Distances to the walls that are being approached, to first order.
    double dist = std::numeric_limits<double>::infinity();
    Termination nearest = Termination::max_steps;
    const double rho_rate = dir * (k1.H * adjugate(y.H)).trace() - dir * 2.0 * s;
    if (rho_rate < 0.0 && rho / -rho_rate < dist) dist = rho / -rho_rate, nearest = Termination::rho_floor;
    const double u_rate = dir * detail::smallest_singular_rate(y.U, k1.U);
    if (u_rate < 0.0 && sigma_min / -u_rate < dist) dist = sigma_min / -u_rate, nearest = Termination::u_floor;
    if (s * dir < 0.0 && std::abs(s) < dist) dist = std::abs(s), nearest = Termination::s_floor;
    // Growth of H like 1/(s* − s): |H|/|H′| estimates the distance to the pole.
    const double H_norm = y.H.norm(), H_rate = dir * (y.H.cwiseProduct(k1.H)).sum() / H_norm;
    if (H_rate > 0.0 && H_norm / H_rate < dist) dist = H_norm / H_rate, nearest = Termination::metric_blowup;

    double dt = config.step;
    if (rho < 10.0 * config.rho_min || sigma_min < 10.0 * config.u_min || std::abs(s) < 10.0 * config.s_min)
      dt *= 0.5;
    while (dt > config.wall_fraction * dist) dt *= 0.5;
    if (config.s_end) dt = std::min(dt, std::abs(*config.s_end - s));

    const double dt_floor = 1e-15 * std::max(1.0, std::abs(s));
    bool advanced = false;
    while (dt >= dt_floor) {
      try {
        const double h = dir * dt;
        const FlowVector k2 = detail::derivative(s + 0.5 * h, y + k1 * (0.5 * h), base);
        const FlowVector k3 = detail::derivative(s + 0.5 * h, y + k2 * (0.5 * h), base);
        const FlowVector k4 = detail::derivative(s + h, y + k3 * h, base);
        const FlowVector next = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        const double s_next =
            (config.s_end && dt == std::abs(*config.s_end - s)) ? *config.s_end : s + h;
        if (next.H.determinant() - s_next * s_next <= 0.0 || !next.U.allFinite() || !next.H.allFinite())
          throw Error(ErrorCode::outside_regular_regime, "step left the regular regime");
        s = s_next;
        y = next;
        advanced = true;
        break;
      } catch (const Error&) {
        dt *= 0.5;
      }
    }
    if (!advanced) {
      // Every trial step left the regular regime: the only rejection is ρ ≤ 0 or a collapsing U.
      out.termination = nearest == Termination::max_steps ? Termination::rho_floor : nearest;
      break;
    }
    ++out.steps;
    out.samples.push_back(detail::record(s, y, base));
  }
  return out;
}

/// Integrates backwards to s_lo and forwards to s_hi from the same start and
/// merges the two runs into one solution ordered by s.
inline FlowSolution integrate_span(const FlowState& initial, const BaseGeometry& base, IntegratorConfig config,
                                   double s_lo, double s_hi) {
  require(s_lo <= initial.s && initial.s <= s_hi, "span must contain the start");
  config.direction = -1;
  config.s_end = s_lo;
  FlowSolution back = integrate(initial, base, config);
  config.direction = 1;
  config.s_end = s_hi;
  FlowSolution fwd = integrate(initial, base, config);
  FlowSolution out;
  out.base = base;
  out.samples.assign(back.samples.rbegin(), back.samples.rend());
  out.samples.insert(out.samples.end(), fwd.samples.begin() + 1, fwd.samples.end());
  out.termination = fwd.termination;
  out.backward_termination = back.termination;
  out.steps = back.steps + fwd.steps;
  return out;
}

/// Closed-form left-invariant solution over the abelian base with H(s0) = Id
/// and U(s0) = Id: H = (s0/s) Id and U = u(s) Id.
inline FlowState abelian_reference(double s0, double s) {
  const double c0 = std::sqrt(1.0 - s0 * s0);
  const double u = std::sqrt(s0 * s0 * s0 - std::pow(s, 5)) / (c0 * std::pow(s0, 1.5));
  return {s, u * Eigen::Matrix3d::Identity(), (s0 / s) * Eigen::Matrix3d::Identity()};
}

// ---------------------------------------------------------------------------
// Finite differences on a (possibly non-uniform) grid.

/// Weights for the first derivative at x0 from values at the nodes x.
inline std::vector<double> fornberg_first_derivative(double x0, const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  require(n >= 2, "finite differences need at least two nodes");
  // c[k][j]: weight of node j for the k-th derivative, k = 0, 1.
  std::vector<std::array<double, 2>> c(n, {0.0, 0.0});
  double c1 = 1.0, c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) w[j] = c[j][1];
  return w;
}

// ---------------------------------------------------------------------------
// End-to-end verification.

struct VerifyReport {
  std::size_t samples_checked = 0;
  double s_lo = 0.0;
  double s_hi = 0.0;
  /// max ‖dφ − 4⋆φ‖ in the metric induced by φ.
  double nearly_parallel = 0.0;
  /// (4/ρ) dh ∧ vol_α − ds ∧ (d₆θ)ᵀ ∧ β.
  double deg0 = 0.0;
  /// dσ + s ds ∧ d(β/ρ).
  double d_sigma = 0.0;
  /// τ′ − τ/s + (1/s) d₃((h/ρ) α).
  double tau_evolution = 0.0;
  /// ∂_s C − Θ Λ, the curvature derivative against d₃θ′.
  double commutation = 0.0;
};

/// Checks the lifted seven-dimensional structure along a sampled trajectory.
/// All s-derivatives are fourth-order finite differences over the samples, so
/// none of the flow equations are reused. A frame whose d² fails to vanish is
/// not rejected; it shows up in the commutation residual. Only samples inside
/// [interior_lo, interior_hi] of the s-range with two neighbours on each side
/// count.
inline VerifyReport verify_solution(const std::vector<FlowState>& samples, const BaseGeometry& base,
                                    double interior_lo = 0.1, double interior_hi = 0.9) {
  const std::size_t n = samples.size();
  if (n < 5) throw Error(ErrorCode::too_few_samples, "verification needs at least five samples");
  for (std::size_t k = 1; k < n; ++k)
    require(samples[k].s > samples[k - 1].s, "samples must be strictly increasing in s");
  const double span = samples.back().s - samples.front().s;
  const double lo = samples.front().s + interior_lo * span, hi = samples.front().s + interior_hi * span;

  std::vector<std::size_t> interior;
  for (std::size_t k = 2; k + 2 < n; ++k)
    if (samples[k].s >= lo && samples[k].s <= hi) interior.push_back(k);
  if (interior.size() < 5) throw Error(ErrorCode::too_few_samples, "fewer than five interior samples");

  // Quantities differentiated in s, cached per sample when needed.
  std::vector<std::optional<SevenForms>> forms(n);
  auto forms_at = [&](std::size_t k) -> const SevenForms& {
    if (!forms[k]) forms[k] = seven_forms(samples[k].data(base));
    return *forms[k];
  };
  auto sigma_matrix = [](const FlowState& st) -> Eigen::Matrix3d {
    return (4.0 * st.h() / st.rho()) * cofactor(st.U);
  };
  auto tau_matrix = [](const FlowState& st) -> Eigen::Matrix3d {
    return (4.0 / st.rho()) * adjugate(st.H) * cofactor(st.U);
  };
  const Eigen::Matrix3d lambda = base.lambda.asDiagonal();

  VerifyReport rep;
  rep.samples_checked = interior.size();
  rep.s_lo = samples[interior.front()].s;
  rep.s_hi = samples[interior.back()].s;
  for (std::size_t k : interior) {
    std::vector<double> nodes;
    for (std::size_t j = k - 2; j <= k + 2; ++j) nodes.push_back(samples[j].s);
    const std::vector<double> w = fornberg_first_derivative(samples[k].s, nodes);
    auto diff = [&](auto&& f) {
      decltype(f(samples[k])) acc = w[0] * f(samples[k - 2]);
      for (int j = 1; j < 5; ++j) acc = acc + w[j] * f(samples[k - 2 + j]);
      return acc;
    };

    const FlowState& st = samples[k];
    const InvariantData data = st.data(base);
    const double s = st.s, h = st.h(), rho = st.rho();
    const Eigen::Matrix3d U_prime = diff([](const FlowState& x) -> Eigen::Matrix3d { return x.U; });
    const double h_prime = diff([](const FlowState& x) { return x.h(); });
    const Eigen::Matrix3d C = curvature_matrix(data);
    const Eigen::Matrix3d C_prime =
        diff([&](const FlowState& x) -> Eigen::Matrix3d { return curvature_matrix(x.data(base)); });
    const Eigen::Matrix3d Theta = U_prime / s + st.U / rho;

    Form phi_prime(7, 3);
    for (int j = 0; j < 5; ++j) phi_prime += w[j] * forms_at(k - 2 + j).phi;

    const SevenStructure seven =
        assemble_seven(data, two_form_triple(C), coframe_triple(Theta), two_form_triple(C_prime),
                                               std::numeric_limits<double>::infinity());
    const G2Structure g2 = G2Structure::from_phi(forms_at(k).phi);
    std::vector<std::optional<Form>> partials(7);
    partials[seven_ds] = phi_prime;
    rep.nearly_parallel = std::max(rep.nearly_parallel, nearly_parallel_residual(g2, seven.frame, partials));

    // Degree-split identities, as coefficient matrices over wedge_square(e) or e^{012}.
    const Eigen::Matrix3d beta = st.H * st.U;
    double curv_beta = 0.0;  // coefficient of e^{012} in Σ_i (d₆θ)_i ∧ β_i
    for (int i = 0; i < 3; ++i) curv_beta += C.row(i).dot(beta.row(i));
    rep.deg0 = std::max(rep.deg0, std::abs(4.0 / rho * h_prime * st.U.determinant() - curv_beta));

    const Eigen::Matrix3d sigma_prime = diff(sigma_matrix);
    rep.d_sigma = std::max(rep.d_sigma, (sigma_prime + (s / rho) * beta * lambda).cwiseAbs().maxCoeff());

    const Eigen::Matrix3d tau_prime = diff(tau_matrix);
    rep.tau_evolution = std::max(
        rep.tau_evolution, (tau_prime - tau_matrix(st) / s + (h / (s * rho)) * st.U * lambda).cwiseAbs().maxCoeff());

    rep.commutation = std::max(rep.commutation, (C_prime - Theta * lambda).cwiseAbs().maxCoeff());
  }
  return rep;
}

inline VerifyReport verify_solution(const FlowSolution& solution, double interior_lo = 0.1,
                                    double interior_hi = 0.9) {
  std::vector<FlowState> states = solution.states();
  if (states.size() > 1 && states.back().s < states.front().s) std::reverse(states.begin(), states.end());
  return verify_solution(states, solution.base, interior_lo, interior_hi);
}

}  // namespace g2lab
