#pragma once

#include <Eigen/Dense>

#include <array>

#include "g2lab/exterior.hpp"

namespace g2lab {

/// The bilinear form behind the adjugate: adj(X) = adjugate_polar(X, X), and
/// the derivative of adj(H) along H' is adjugate_polar(H', H) + adjugate_polar(H, H').
inline Eigen::Matrix3d adjugate_polar(const Eigen::Matrix3d& X, const Eigen::Matrix3d& Y) {
  Eigen::Matrix3d out;
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      out(a, i) = 0.5 * (X(j, b) * Y(k, c) + Y(j, b) * X(k, c) - X(j, c) * Y(k, b) - Y(j, c) * X(k, b));
    }
  }
  return out;
}

inline Eigen::Matrix3d adjugate_derivative(const Eigen::Matrix3d& H, const Eigen::Matrix3d& H_dot) {
  return 2.0 * adjugate_polar(H, H_dot);
}

/// First-order data of the reduced structure at one point of the base:
/// d₃α = B·wedge_square(α) and d₃H_ia = Σ_p K[p](i, a) α_p.
struct PointwiseJet {
  Eigen::Matrix3d B = Eigen::Matrix3d::Zero();
  std::array<Eigen::Matrix3d, 3> K{Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero()};

  static PointwiseJet homogeneous(const Eigen::Matrix3d& B) {
    PointwiseJet jet;
    jet.B = B;
    return jet;
  }

  bool is_homogeneous() const {
    return K[0].isZero(0.0) && K[1].isZero(0.0) && K[2].isZero(0.0);
  }

  double k_asymmetry() const {
    double out = 0.0;
    for (const auto& k : K) out = std::max(out, (k - k.transpose()).cwiseAbs().maxCoeff());
    return out;
  }

  /// d₃(Hα) = (R + HB)·wedge_square(α), with R_ia = K^b_ic − K^c_ib for cyclic (abc).
  Eigen::Matrix3d R() const {
    Eigen::Matrix3d r;
    for (int i = 0; i < 3; ++i)
      for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        r(i, a) = K[b](i, c) - K[c](i, b);
      }
    return r;
  }

  /// d₃h = Σ_p S_p α_p.
  Eigen::Vector3d S(const Eigen::Matrix3d& H) const {
    const Eigen::Matrix3d adj = adjugate(H);
    Eigen::Vector3d s;
    for (int p = 0; p < 3; ++p) s(p) = K[p].cwiseProduct(adj.transpose()).sum();
    return s;
  }

  /// F_ip = H_ir S_q − H_iq S_r for cyclic (pqr).
  Eigen::Matrix3d F(const Eigen::Matrix3d& H) const {
    const Eigen::Vector3d s = S(H);
    Eigen::Matrix3d f;
    for (int i = 0; i < 3; ++i)
      for (int p = 0; p < 3; ++p) {
        const int q = (p + 1) % 3, r = (p + 2) % 3;
        f(i, p) = H(i, r) * s(q) - H(i, q) * s(r);
      }
    return f;
  }
};

inline Eigen::Matrix3d w_from_a(const Eigen::Matrix3d& A) {
  return -A.transpose() + A.trace() * Eigen::Matrix3d::Identity();
}

inline Eigen::Matrix3d a_from_w(const Eigen::Matrix3d& W) {
  return -W.transpose() + 0.5 * W.trace() * Eigen::Matrix3d::Identity();
}

}  // namespace g2lab
