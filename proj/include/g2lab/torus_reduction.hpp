#pragma once

// Reduced data on the base three-manifold Q of a regular level set of the
// multi-moment map, the forms derived from it, and the lift back to a
// G2-structure on (s-interval) × (torus bundle over Q).
//
// Frames: the base frame has generators e^0, e^1, e^2 with de^i = λ_i e^{jk}.
// The seven-frame has ds at index 0, θ_1..θ_3 at 1..3 and e^0..e^2 at 4..6.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "g2lab/error.hpp"
#include "g2lab/exterior.hpp"
#include "g2lab/g2.hpp"
#include "g2lab/jet.hpp"

namespace g2lab {

struct BaseGeometry {
  Eigen::Vector3d lambda = Eigen::Vector3d::Zero();

  FrameAlgebra frame() const { return FrameAlgebra::bianchi(lambda); }
  static BaseGeometry abelian() { return {}; }
  static BaseGeometry su2() { return {Eigen::Vector3d::Ones()}; }
};

inline constexpr double symmetry_tolerance = 1e-10;
inline constexpr double coframe_det_floor = 1e-30;

struct InvariantData {
  double s = 0.0;
  Eigen::Matrix3d U = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d H = Eigen::Matrix3d::Identity();
  BaseGeometry base;

  double h() const { return H.determinant(); }
  double rho() const { return h() - s * s; }

  /// α_i = Σ_a U_ia e^a in the base frame.
  FormTriple alpha(int dim = 3, int offset = 0) const { return coframe_triple(U, dim, offset); }

  void validate() const {
    if (!std::isfinite(s) || !U.allFinite() || !H.allFinite())
      throw Error(ErrorCode::contract_violation, "invariant data contains non-finite entries");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > symmetry_tolerance * scale)
      throw Error(ErrorCode::contract_violation, "H must be symmetric");
    if (Eigen::LLT<Eigen::Matrix3d>(0.5 * (H + H.transpose())).info() != Eigen::Success)
      throw Error(ErrorCode::contract_violation, "H must be positive definite");
    if (std::abs(U.determinant()) < coframe_det_floor)
      throw Error(ErrorCode::near_collapse, "alpha is not a coframe (det U vanishes)");
    if (!(rho() > 0.0))
      throw Error(ErrorCode::outside_regular_regime,
                  "outside regular regime: rho = det H - s^2 = " + std::to_string(rho()));
  }
};

/// wedge_square(Ue) = cof(U)·wedge_square(e), with cof(U) = adj(U)ᵀ.
inline Eigen::Matrix3d cofactor(const Eigen::Matrix3d& U) { return adjugate(U).transpose(); }

/// d₃(Ue) = B·wedge_square(Ue) on the diagonal Bianchi frame.
inline Eigen::Matrix3d structure_coeffs(const Eigen::Matrix3d& U, const BaseGeometry& base) {
  const double det = U.determinant();
  if (std::abs(det) < coframe_det_floor) throw Error(ErrorCode::near_collapse, "det U below threshold");
  return U * base.lambda.asDiagonal() * U.transpose() / det;
}

struct DerivedForms {
  FormTriple beta;
  FormTriple sigma;
  FormTriple tau;
  double h;
  double rho;
};

/// τ = (4/ρ) wedge_square(Hα), σ = Hτ, β = Hα.
inline DerivedForms derive_forms(const InvariantData& data) {
  data.validate();
  const double h = data.h(), rho = data.rho();
  const FormTriple beta = data.H * data.alpha();
  const FormTriple tau = (4.0 / rho) * wedge_square(beta);
  return {beta, data.H * tau, tau, h, rho};
}

/// The two other closed expressions for τ, kept for cross-checks.
struct TauRoutes {
  FormTriple via_adjugate;
  FormTriple via_inverse;
};

inline TauRoutes tau_routes(const InvariantData& data) {
  data.validate();
  const FormTriple ws = wedge_square(data.alpha());
  const double rho = data.rho();
  return {(4.0 / rho) * (adjugate(data.H) * ws), (4.0 * data.h() / rho) * (data.H.inverse() * ws)};
}

struct ClosureReport {
  double sigma_residual;
  double tau_residual;
  /// τ/s = Σ_a M_ia e^{bc}; empty when s = 0.
  std::optional<Eigen::Matrix3d> integrality_coefficients;
};

/// d₃σ and d₃τ for left-invariant data on the base frame.
inline ClosureReport check_closed(const InvariantData& data) {
  const DerivedForms f = derive_forms(data);
  const FrameAlgebra frame = data.base.frame();
  ClosureReport out{exterior_derivative(f.sigma, frame).max_abs(), exterior_derivative(f.tau, frame).max_abs(),
                    std::nullopt};
  if (data.s != 0.0)
    out.integrality_coefficients = (4.0 / (data.s * f.rho)) * adjugate(data.H) * cofactor(data.U);
  return out;
}

/// d₃σ and d₃τ at a point where H varies to first order as described by the jet.
/// Everything is written in the coframe α itself, with d₃α = B·wedge_square(α)
/// and coefficient derivatives along the dual frame taken from K.
inline ClosureReport check_closed(const InvariantData& data, const PointwiseJet& jet) {
  data.validate();
  const Eigen::Matrix3d& H = data.H;
  const double h = data.h(), rho = data.rho(), s2 = data.s * data.s;
  std::vector<FormJet> d_alpha;
  const FormTriple a = coframe_triple(Eigen::Matrix3d::Identity());
  const FormTriple ws = wedge_square(a);
  const FormTriple b_ws = jet.B * ws;
  for (int i = 0; i < 3; ++i) d_alpha.push_back(FormJet::constant(b_ws[i]));
  const FrameAlgebra frame(std::move(d_alpha), Metric::euclidean(3), std::nullopt,
                           std::numeric_limits<double>::infinity());

  const Eigen::Vector3d S = jet.S(H);
  const Eigen::Matrix3d adj = adjugate(H);
  double sigma_res = 0.0, tau_res = 0.0;
  for (int i = 0; i < 3; ++i) {
    FormJet sigma{(4.0 * h / rho) * ws[i], std::vector<std::optional<Form>>(3)};
    FormJet tau{Form(3, 2), std::vector<std::optional<Form>>(3)};
    for (int c = 0; c < 3; ++c) tau.value += (4.0 / rho * adj(i, c)) * ws[c];
    for (int p = 0; p < 3; ++p) {
      // ∂_p h = ∂_p ρ = S_p because s is constant along Q.
      sigma.partials[p] = (-4.0 * s2 * S(p) / (rho * rho)) * ws[i];
      const Eigen::Matrix3d adj_p = adjugate_derivative(H, jet.K[p]);
      Form t(3, 2);
      for (int c = 0; c < 3; ++c)
        t += (4.0 / rho * adj_p(i, c) - 4.0 * S(p) / (rho * rho) * adj(i, c)) * ws[c];
      tau.partials[p] = t;
    }
    sigma_res = std::max(sigma_res, exterior_derivative(sigma, frame).max_abs());
    tau_res = std::max(tau_res, exterior_derivative(tau, frame).max_abs());
  }
  return {sigma_res, tau_res, std::nullopt};
}

/// (d₆θ)_i = Σ_a C_ia e^{bc} with C = (1/s)(Uλ − (4/ρ) adj H · cof U).
inline Eigen::Matrix3d curvature_matrix(const InvariantData& data) {
  data.validate();
  if (data.s == 0.0) throw Error(ErrorCode::contract_violation, "curvature needs s != 0");
  return (data.U * data.base.lambda.asDiagonal() - (4.0 / data.rho()) * adjugate(data.H) * cofactor(data.U)) /
         data.s;
}

/// d₆θ = (1/s)(d₃α − τ) as two-forms on the base frame.
inline FormTriple curvature(const InvariantData& data) {
  if (data.s == 0.0) throw Error(ErrorCode::contract_violation, "curvature needs s != 0");
  const DerivedForms f = derive_forms(data);
  return (1.0 / data.s) * (exterior_derivative(data.alpha(), data.base.frame()) - f.tau);
}

inline FormTriple two_form_triple(const Eigen::Matrix3d& C) {
  return C * wedge_square(coframe_triple(Eigen::Matrix3d::Identity()));
}

// ---------------------------------------------------------------------------
// Initial data from a closed triple of two-forms.

struct EtaDecomposition {
  FormTriple eta;
  Eigen::Vector3d f;
  /// Rows are the coframe γ_i dual to the unit kernel fields Y_i.
  Eigen::Matrix3d gamma;
  int epsilon;
  double c_hat;
  /// Rows are α_i = a_i γ_i, so α = U e.
  Eigen::Matrix3d U;
};

/// Finds α with wedge_square(α) = ĉ ε η, ĉ = (1 − s0²) s0 / 4, for a triple η of
/// pointwise independent two-forms with constant coefficients on the base frame.
inline EtaDecomposition eta_to_coframe(const FormTriple& eta_in, double s0, bool swap_23 = false) {
  require(eta_in.dim() == 3 && eta_in.degree() == 2, "eta must be a triple of two-forms on the base");
  if (!(s0 != 0.0 && s0 * s0 < 1.0))
    throw Error(ErrorCode::contract_violation, "eta initial data needs 0 < s0^2 < 1");
  const FormTriple eta = swap_23 ? FormTriple(eta_in[0], eta_in[2], eta_in[1]) : eta_in;

  // η_i = Σ_a v_ia e^{bc}; its kernel is spanned by the vector v_i.
  Eigen::Matrix3d v;
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 3; ++a) v(i, a) = eta[i].coefficient({(a + 1) % 3, (a + 2) % 3});
  const double scale = v.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || std::abs(v.determinant()) < 1e-12 * std::pow(scale, 3))
    throw Error(ErrorCode::singular_matrix, "eta components are linearly dependent");

  // Columns Y_i = v_i/|v_i|; this sign makes γ_i ∧ η_i positive.
  Eigen::Matrix3d Y = v.transpose();
  for (int i = 0; i < 3; ++i) Y.col(i).normalize();
  const Eigen::Matrix3d gamma = Y.inverse();

  const FormTriple g = coframe_triple(gamma);
  const Mask top = 0x7;
  const double vol_gamma = wedge(g[0], g[1], g[2])[top];
  Eigen::Vector3d f;
  for (int i = 0; i < 3; ++i) f(i) = wedge(g[i], eta[i])[top] / vol_gamma;
  const double product = f.prod();
  if (std::abs(product) < 1e-14 * std::pow(scale, 3))
    throw Error(ErrorCode::singular_matrix, "eta factorisation has a vanishing coefficient");

  const double c_hat = (1.0 - s0 * s0) * s0 / 4.0;
  const int epsilon = c_hat * product > 0.0 ? 1 : -1;
  const double b = std::sqrt(epsilon * c_hat * product);
  Eigen::Matrix3d U;
  for (int i = 0; i < 3; ++i) U.row(i) = (b / f(i)) * gamma.row(i);
  return {eta, f, gamma, epsilon, c_hat, U};
}

// ---------------------------------------------------------------------------
// The seven-dimensional structure.

inline constexpr int seven_ds = 0;
inline constexpr int seven_theta = 1;
inline constexpr int seven_base = 4;

struct SevenForms {
  Metric metric;
  Form volume;
  Form phi;
  Form star_phi;
};

/// g, vol, φ and ⋆φ on the seven-frame, as closed expressions in (s, U, H).
inline SevenForms seven_forms(const InvariantData& data) {
  const DerivedForms f = derive_forms(data);
  const double s = data.s, rho = f.rho, h = f.h;
  const Form ds = Form::basis(7, {seven_ds});
  const FormTriple theta = coframe_triple(Eigen::Matrix3d::Identity(), 7, seven_theta);
  const FormTriple alpha = data.alpha(7, seven_base);
  const FormTriple ws_theta = wedge_square(theta);
  const FormTriple ws_alpha = wedge_square(alpha);
  const FormTriple tau = embed(f.tau, 7, seven_base);
  const Form vol_theta = Form::basis(7, {1, 2, 3});
  const Form vol_alpha = wedge(alpha[0], alpha[1], alpha[2]);

  Form phi = s * vol_theta - dot_wedge(ws_theta, alpha) - (s / rho) * dot_wedge(theta, ws_alpha) -
             (1.0 / (4.0 * rho)) * wedge(ds, dot_wedge(theta, data.H * alpha)) + (1.0 / rho) * vol_alpha;
  Form star = 0.25 * wedge(ds, vol_theta) - 0.25 * dot_wedge(ws_theta, tau) +
              (s / (4.0 * rho)) * wedge(ds, dot_wedge(ws_theta, alpha)) -
              (1.0 / (4.0 * rho)) * wedge(ds, dot_wedge(theta, ws_alpha)) -
              (s / (4.0 * rho * rho)) * wedge(ds, vol_alpha);

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(7, 7);
  g(0, 0) = 1.0 / (16.0 * rho);
  g.block<3, 3>(1, 1) = data.H;
  g.block<3, 3>(4, 4) = data.U.transpose() * data.H * data.U / rho;
  g = 0.5 * (g + g.transpose()).eval();
  const int orientation = data.U.determinant() > 0 ? 1 : -1;
  Form volume = (h / (4.0 * rho * rho)) * wedge(wedge(vol_theta, vol_alpha), ds);
  return {Metric{g, orientation}, std::move(volume), std::move(phi), std::move(star)};
}

struct SevenStructure {
  FrameAlgebra frame;
  SevenForms forms;
};

/// Builds the extended frame with dθ = d₆θ + ds ∧ θ′ and the structure forms.
/// curvature_prime is the s-derivative of d₆θ; when omitted, d₃θ′ is used,
/// which is what d² = 0 demands. Throws inconsistent_connection if d² ≠ 0 on
/// the extended frame beyond jacobi_tol (relative to the structure scale).
inline SevenStructure assemble_seven(const InvariantData& data, const FormTriple& theta_curvature,
                                     const FormTriple& theta_prime,
                                     const std::optional<FormTriple>& curvature_prime = std::nullopt,
                                     double jacobi_tol = 1e-9) {
  require(theta_curvature.dim() == 3 && theta_curvature.degree() == 2, "curvature must be base two-forms");
  require(theta_prime.dim() == 3 && theta_prime.degree() == 1, "theta' must be base one-forms");
  SevenForms forms = seven_forms(data);
  const FrameAlgebra base = data.base.frame();
  const FormTriple c_prime = curvature_prime ? *curvature_prime : exterior_derivative(theta_prime, base);
  require(c_prime.dim() == 3 && c_prime.degree() == 2, "curvature derivative must be base two-forms");

  const Form ds = Form::basis(7, {seven_ds});
  std::vector<FormJet> d(7, FormJet::constant(Form(7, 2)));
  for (int i = 0; i < 3; ++i) {
    d[seven_theta + i] = FormJet::s_dependent(
        embed(theta_curvature[i], 7, seven_base) + wedge(ds, embed(theta_prime[i], 7, seven_base)),
        embed(c_prime[i], 7, seven_base), seven_ds);
    d[seven_base + i] = FormJet::constant(embed(base.differential(i).value, 7, seven_base));
  }
  return {FrameAlgebra(std::move(d), forms.metric, seven_ds, jacobi_tol), std::move(forms)};
}

// ---------------------------------------------------------------------------
// Change of basis for the torus action.

/// ν ↦ det P ν, H ↦ P H Pᵀ, α ↦ (adj P)ᵀ α. The base frame is unchanged.
inline InvariantData basis_change(const InvariantData& data, const Eigen::Matrix3d& P) {
  const double det = P.determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-12 * std::max(1.0, std::pow(P.cwiseAbs().maxCoeff(), 3)))
    throw Error(ErrorCode::singular_matrix, "basis change needs an invertible P");
  InvariantData out = data;
  out.s = det * data.s;
  out.H = P * data.H * P.transpose();
  out.H = 0.5 * (out.H + out.H.transpose()).eval();
  out.U = adjugate(P).transpose() * data.U;
  return out;
}

/// θ ↦ (Pᵀ)⁻¹ θ.
inline Eigen::Matrix3d theta_transform(const Eigen::Matrix3d& P) { return P.transpose().inverse(); }

}  // namespace g2lab
