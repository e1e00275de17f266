#pragma once

// G2-specific constructions: the standard three-form, metric recovery, the
// cross product, the multi-moment map at a point and the local normal form
// of three commuting symmetry fields.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "g2lab/error.hpp"
#include "g2lab/exterior.hpp"

namespace g2lab {

/// φ = e^{123} − e^1(e^{45}+e^{67}) − e^2(e^{46}+e^{75}) − e^3(e^{47}+e^{56}),
/// generators numbered from zero.
inline Form standard_phi() {
  Form phi(7, 3);
  phi += Form::basis(7, {0, 1, 2});
  phi -= Form::basis(7, {0, 3, 4}) + Form::basis(7, {0, 5, 6});
  phi -= Form::basis(7, {1, 3, 5}) + Form::basis(7, {1, 6, 4});
  phi -= Form::basis(7, {2, 3, 6}) + Form::basis(7, {2, 4, 5});
  return phi;
}

inline Form standard_star_phi() {
  Form psi(7, 4);
  psi += Form::basis(7, {3, 4, 5, 6});
  psi -= Form::basis(7, {1, 2, 3, 4}) + Form::basis(7, {1, 2, 5, 6});
  psi -= Form::basis(7, {2, 0, 3, 5}) + Form::basis(7, {2, 0, 6, 4});
  psi -= Form::basis(7, {0, 1, 3, 6}) + Form::basis(7, {0, 1, 4, 5});
  return psi;
}

struct MetricAndVolume {
  Metric metric;
  Form volume;
};

/// Recovers (g, vol) from 6 g(X,Y) vol = (X⌟φ) ∧ (Y⌟φ) ∧ φ. The orientation is
/// read off the sign of the bilinear form; an indefinite one means φ is not a
/// G2 form.
inline MetricAndVolume metric_from_three_form(const Form& phi) {
  require(phi.dim() == 7 && phi.degree() == 3, "metric recovery needs a three-form in dimension seven");
  const Mask top = 0x7f;
  std::vector<Form> contractions;
  for (int i = 0; i < 7; ++i) contractions.push_back(interior(Eigen::VectorXd::Unit(7, i), phi));
  Eigen::Matrix<double, 7, 7> B;
  for (int i = 0; i < 7; ++i) {
    const Form left = wedge(contractions[i], phi);
    for (int j = i; j < 7; ++j) B(i, j) = B(j, i) = wedge(contractions[j], left)[top];
  }
  const double det_b = B.determinant();
  if (!(std::abs(det_b) >= 1e-20)) throw Error(ErrorCode::not_g2_form, "three-form is degenerate");
  int orientation = 0;
  if (Eigen::LLT<Eigen::Matrix<double, 7, 7>>(B).info() == Eigen::Success) {
    orientation = 1;
  } else if (Eigen::LLT<Eigen::Matrix<double, 7, 7>>(-B).info() == Eigen::Success) {
    orientation = -1;
  } else {
    throw Error(ErrorCode::not_g2_form, "not a G2 form: induced bilinear form is indefinite");
  }
  const double det_g = std::pow(std::abs(det_b) / std::pow(6.0, 7), 2.0 / 9.0);
  Metric metric{B / (6.0 * orientation * std::sqrt(det_g)), orientation};
  // Round-off can leave B a hair off symmetric in the last bit; it is exact by construction.
  metric.g = 0.5 * (metric.g + metric.g.transpose()).eval();
  return {metric, volume_form(metric)};
}

struct G2Structure {
  Form phi;
  Metric metric;
  Form star_phi;
  Form volume;

  static G2Structure from_phi(Form phi) {
    auto [metric, volume] = metric_from_three_form(phi);
    Form star = hodge_star(phi, metric);
    return {std::move(phi), std::move(metric), std::move(star), std::move(volume)};
  }
};

inline G2Structure standard_g2() { return G2Structure::from_phi(standard_phi()); }

/// g(x × y, z) = φ(x, y, z).
inline Eigen::VectorXd cross(const G2Structure& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Form w = interior(y, interior(x, s.phi));
  Eigen::VectorXd lowered(7);
  for (int i = 0; i < 7; ++i) lowered(i) = w[static_cast<Mask>(1u << i)];
  return s.metric.g.ldlt().solve(lowered);
}

struct CrossAndAssociative {
  Eigen::VectorXd cross;
  bool is_associative = false;
  double residual = 0.0;
};

/// Cross product x × y, and whether span{x, y, z} is closed under ×. The
/// closure residual of each pairwise product is measured relative to the
/// area of the pair that produced it.
inline CrossAndAssociative cross_and_associative(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                                 const Eigen::VectorXd& z, const G2Structure& s,
                                                 double tol = 1e-10) {
  const Eigen::MatrixXd& g = s.metric.g;
  Eigen::Matrix<double, 7, 3> span;
  span << x, y, z;
  const Eigen::Matrix3d gram = span.transpose() * g * span;
  const double scale = gram(0, 0) * gram(1, 1) * gram(2, 2);
  if (!(scale > 0.0) || gram.determinant() <= 1e-12 * scale)
    throw Error(ErrorCode::degenerate_plane, "degenerate plane: vectors are linearly dependent");

  const Eigen::VectorXd* pairs[3][2] = {{&x, &y}, {&y, &z}, {&z, &x}};
  double worst = 0.0;
  for (const auto& pair : pairs) {
    const Eigen::VectorXd& a = *pair[0];
    const Eigen::VectorXd& b = *pair[1];
    const Eigen::VectorXd c = cross(s, a, b);
    const Eigen::Vector3d coeffs = gram.ldlt().solve(span.transpose() * g * c);
    const Eigen::VectorXd r = c - span * coeffs;
    const double area2 = a.dot(g * a) * b.dot(g * b) - std::pow(a.dot(g * b), 2);
    worst = std::max(worst, std::sqrt(std::max(0.0, r.dot(g * r)) / area2));
  }
  return {cross(s, x, y), worst <= tol, worst};
}

struct MultiMoment {
  double nu = 0.0;
  Form dnu;  ///< −4 ⋆φ(U1, U2, U3, ·)
};

inline MultiMoment multi_moment(const G2Structure& s, const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                                const Eigen::VectorXd& u3) {
  const double nu = evaluate(s.phi, {u1, u2, u3});
  Form dnu = -4.0 * interior(u3, interior(u2, interior(u1, s.star_phi)));
  return {nu, std::move(dnu)};
}

/// Three commuting fields in the normal form U = V (E1, E2, E3, E4)^T with V
/// lower staircase.
struct LocalFrameData {
  double p = 1.0, q1 = 0.0, q2 = 1.0;
  double r1 = 0.0, r2 = 0.0, r3 = 1.0, r4 = 0.0;

  Eigen::Matrix<double, 3, 4> V() const {
    Eigen::Matrix<double, 3, 4> v;
    v << p, 0, 0, 0, q1, q2, 0, 0, r1, r2, r3, r4;
    return v;
  }

  double r_tilde_squared() const { return r3 * r3 + r4 * r4; }
  Eigen::Matrix3d H() const { return V() * V().transpose(); }

  /// U_i as vectors in the seven-frame.
  Eigen::VectorXd U(int i) const {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(7);
    u.head<4>() = V().row(i).transpose();
    return u;
  }

  bool regular() const { return p > 0 && q2 > 0 && r_tilde_squared() > 0; }

  Eigen::Matrix<double, 3, 4> X() const {
    const double rt2 = r_tilde_squared();
    Eigen::Matrix3d left;
    left << q2, -q1, q1 * r2 - q2 * r1, 0, p, -p * r2, 0, 0, p * q2;
    Eigen::Matrix<double, 3, 4> right;
    right << rt2, 0, 0, 0, 0, rt2, 0, 0, 0, 0, r3, r4;
    return left * right / (p * q2 * rt2);
  }
};

struct LocalInvariantForms {
  FormTriple theta;
  FormTriple alpha;
};

/// θ dual to U and α_i = ν θ_i − φ(U_j, U_k, ·), from the closed-form X matrix.
inline LocalInvariantForms local_invariant_forms(const LocalFrameData& d) {
  const double h = d.H().determinant();
  if (!d.regular() || !(h > 1e-14))
    throw Error(ErrorCode::collapsed_orbit, "collapsed orbit: U1, U2, U3 are linearly dependent");
  const Eigen::Matrix<double, 3, 4> X = d.X();
  std::array<Form, 3> theta{Form(7, 1), Form(7, 1), Form(7, 1)};
  std::array<Form, 3> alpha{Form(7, 1), Form(7, 1), Form(7, 1)};
  const double scale = d.p * d.q2 * d.r4;
  // α uses (e6, −e5, e4, −e3) in one-based numbering.
  const int alpha_gen[4] = {5, 4, 3, 2};
  const double alpha_sign[4] = {1, -1, 1, -1};
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 4; ++a) {
      theta[i].add(static_cast<Mask>(1u << a), X(i, a));
      alpha[i].add(static_cast<Mask>(1u << alpha_gen[a]), scale * alpha_sign[a] * X(i, a));
    }
  return {FormTriple(theta[0], theta[1], theta[2]), FormTriple(alpha[0], alpha[1], alpha[2])};
}

/// ‖dφ − 4⋆φ‖ in the metric induced by φ. phi_partials carries coefficient
/// derivatives of φ along frame directions (e.g. along ds), if any.
inline double nearly_parallel_residual(const G2Structure& s, const FrameAlgebra& frame,
                                       std::vector<std::optional<Form>> phi_partials = {}) {
  require(frame.dim() == 7, "nearly parallel residual needs a seven-frame");
  const Form dphi = exterior_derivative(FormJet{s.phi, std::move(phi_partials)}, frame);
  return norm(dphi - 4.0 * s.star_phi, s.metric);
}

}  // namespace g2lab
