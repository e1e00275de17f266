#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "g2lab/exterior.hpp"
#include "g2lab/torus_reduction.hpp"

namespace g2lab::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Form random_form(std::mt19937_64& rng, int dim, int degree, double density = 0.7) {
  Form f(dim, degree);
  for (Mask m : masks_of_degree(dim, degree))
    if (uniform(rng, 0, 1) < density) f.add(m, uniform(rng, -1, 1));
  return f;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = uniform(rng, -1, 1);
  return v;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double lo = -1, double hi = 1) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = uniform(rng, lo, hi);
  return m;
}

/// Symmetric positive-definite with eigenvalues in [lo, hi].
inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int dim, double lo = 0.5, double hi = 2.0) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, dim, dim));
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd eig(dim);
  for (int i = 0; i < dim; ++i) eig(i) = uniform(rng, lo, hi);
  return q * eig.asDiagonal() * q.transpose();
}

/// Q1 diag(σ) Q2 with singular values in [0.5, 2].
inline Eigen::MatrixXd random_well_conditioned(std::mt19937_64& rng, int dim) {
  const Eigen::MatrixXd q1 = Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(rng, dim, dim)).householderQ();
  const Eigen::MatrixXd q2 = Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(rng, dim, dim)).householderQ();
  Eigen::VectorXd sigma(dim);
  for (int i = 0; i < dim; ++i) sigma(i) = uniform(rng, 0.5, 2.0);
  return q1 * sigma.asDiagonal() * q2;
}

inline Eigen::Matrix3d random_invertible3(std::mt19937_64& rng, double min_abs_det = 0.2) {
  while (true) {
    Eigen::Matrix3d m = random_matrix(rng, 3, 3, -1.5, 1.5);
    if (std::abs(m.determinant()) > min_abs_det) return m;
  }
}

/// Determinant by Laplace expansion along the first row.
inline double laplace_det(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  if (n == 1) return m(0, 0);
  double out = 0.0;
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXd minor(n - 1, n - 1);
    for (int r = 1; r < n; ++r)
      for (int c = 0, cc = 0; c < n; ++c)
        if (c != j) minor(r - 1, cc++) = m(r, c);
    out += ((j & 1) ? -1.0 : 1.0) * m(0, j) * laplace_det(minor);
  }
  return out;
}

/// Adjugate from cofactors: adj(M)_{ji} = (−1)^{i+j} det(M without row i, column j).
inline Eigen::MatrixXd cofactor_adjugate(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  Eigen::MatrixXd adj(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Eigen::MatrixXd minor(n - 1, n - 1);
      for (int r = 0, rr = 0; r < n; ++r) {
        if (r == i) continue;
        for (int c = 0, cc = 0; c < n; ++c)
          if (c != j) minor(rr, cc++) = m(r, c);
        ++rr;
      }
      adj(j, i) = (((i + j) & 1) ? -1.0 : 1.0) * laplace_det(minor);
    }
  return adj;
}

inline Eigen::Vector3d random_bianchi(std::mt19937_64& rng) {
  Eigen::Vector3d lambda;
  for (int i = 0; i < 3; ++i) lambda(i) = static_cast<double>(static_cast<int>(rng() % 3) - 1);
  return lambda;
}

/// Regular left-invariant data: H with eigenvalues in [0.7, 1.6], |det U| ≥ 0.2
/// and s² at most 60% of det H, with s bounded away from zero.
inline InvariantData random_invariant_data(std::mt19937_64& rng, const Eigen::Vector3d& lambda) {
  InvariantData d;
  d.base.lambda = lambda;
  d.H = random_spd(rng, 3, 0.7, 1.6);
  d.U = random_invertible3(rng);
  const double bound = std::sqrt(0.6 * d.H.determinant());
  d.s = uniform(rng, 0.2, 1.0) * bound * (uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0);
  return d;
}

}  // namespace g2lab::testing
