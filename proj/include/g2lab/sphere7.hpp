#pragma once

// The round seven-sphere as the nearly parallel G2 manifold Spin(7)/G2, with
// the maximal torus T³ ⊂ Spin(7) and its multi-moment map
// ν = 4 Im(z¹z²z³z⁴), z¹ = x⁰ − ix¹, z² = x² − ix³, z³ = x⁴ + ix⁵, z⁴ = x⁶ + ix⁷.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <atomic>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "g2lab/error.hpp"
#include "g2lab/exterior.hpp"
#include "g2lab/g2.hpp"

namespace g2lab::sphere7 {

using Vector8d = Eigen::Matrix<double, 8, 1>;
using Matrix8d = Eigen::Matrix<double, 8, 8>;
using TangentFrame = Eigen::Matrix<double, 8, 7>;

inline constexpr double unit_tolerance = 1e-12;
inline constexpr double default_grad_tolerance = 1e-9;
inline constexpr double default_rank_threshold = 1e-8;

class SpherePoint {
 public:
  /// Throws contract_violation unless |‖x‖ − 1| < 1e-12.
  explicit SpherePoint(const Vector8d& x) : x_(x) {
    require(std::abs(x.norm() - 1.0) < unit_tolerance, "sphere point must have unit norm");
  }

  static SpherePoint normalized(const Vector8d& v) {
    const double n = v.norm();
    require(n > 0.0, "cannot normalize the zero vector");
    return SpherePoint(v / n);
  }

  const Vector8d& x() const { return x_; }
  double operator[](int i) const { return x_(i); }

 private:
  Vector8d x_;
};

/// Ψ = dx⁰ ∧ φ₀ + ⋆φ₀ with φ₀ the standard form on the span of x¹..x⁷.
inline Form spin7_form() {
  Form psi = wedge(Form::basis(8, {0}), embed(standard_phi(), 8, 1));
  psi += embed(standard_star_phi(), 8, 1);
  return psi;
}

/// V_i = −x^{2i+1}∂_{2i} + x^{2i}∂_{2i+1} as the matrix of the linear field x ↦ Mx.
inline Matrix8d rotation_generator(int i) {
  require(i >= 0 && i < 4, "rotation generator index must lie in 0..3");
  Matrix8d m = Matrix8d::Zero();
  m(2 * i, 2 * i + 1) = -1.0;
  m(2 * i + 1, 2 * i) = 1.0;
  return m;
}

/// U1 = V0 + V3, U2 = V1 + V3, U3 = V2 − V3.
inline std::array<Matrix8d, 3> torus_generators() {
  const Matrix8d v3 = rotation_generator(3);
  return {rotation_generator(0) + v3, rotation_generator(1) + v3, rotation_generator(2) - v3};
}

inline std::array<Vector8d, 3> torus_fields(const SpherePoint& p) {
  const auto gens = torus_generators();
  return {gens[0] * p.x(), gens[1] * p.x(), gens[2] * p.x()};
}

/// exp(Σ t_k U_k) applied to the point.
inline SpherePoint apply_torus(const SpherePoint& p, const Eigen::Vector3d& t) {
  const double angle[4] = {t(0), t(1), t(2), t(0) + t(1) - t(2)};
  Vector8d y;
  for (int i = 0; i < 4; ++i) {
    const double c = std::cos(angle[i]), s = std::sin(angle[i]);
    y(2 * i) = c * p[2 * i] - s * p[2 * i + 1];
    y(2 * i + 1) = s * p[2 * i] + c * p[2 * i + 1];
  }
  return SpherePoint::normalized(y);
}

struct SliceReduction {
  SpherePoint point;
  Eigen::Vector3d angles;
};

/// Moves p along its T³-orbit to the slice x¹ = x³ = x⁵ = 0 with x⁰, x², x⁴ ≥ 0.
inline SliceReduction reduce_to_slice(const SpherePoint& p) {
  Eigen::Vector3d t;
  for (int i = 0; i < 3; ++i) t(i) = -std::atan2(p[2 * i + 1], p[2 * i]);
  SpherePoint q = apply_torus(p, t);
  Vector8d y = q.x();
  for (int i = 0; i < 3; ++i) y(2 * i + 1) = 0.0;
  return {SpherePoint::normalized(y), t};
}

/// Orthonormal basis of x^⊥, oriented so that (x, frame) is positive in ℝ⁸.
inline TangentFrame tangent_frame(const SpherePoint& p) {
  Eigen::HouseholderQR<Vector8d> qr(p.x());
  Matrix8d q = qr.householderQ();
  if (q.col(0).dot(p.x()) < 0) q.col(0) *= -1.0;
  TangentFrame frame = q.rightCols<7>();
  Matrix8d full;
  full << p.x(), frame;
  if (full.determinant() < 0) frame.col(6) *= -1.0;
  return frame;
}

struct InducedStructure {
  TangentFrame frame;
  Form ambient_phi;  ///< E ⌟ Ψ at the point, as a three-form on ℝ⁸
  G2Structure g2;    ///< φ pulled back to the tangent frame
};

/// φ = ι*(E ⌟ Ψ) at p, expressed in an oriented orthonormal tangent frame.
inline InducedStructure induced_phi_at(const SpherePoint& p) {
  const TangentFrame frame = tangent_frame(p);
  Form ambient = interior(p.x(), spin7_form());
  G2Structure g2 = G2Structure::from_phi(pullback(ambient, frame));
  return {frame, std::move(ambient), std::move(g2)};
}

namespace detail {

inline std::array<std::complex<double>, 4> z_coordinates(const Vector8d& x) {
  return {std::complex<double>(x(0), -x(1)), std::complex<double>(x(2), -x(3)),
          std::complex<double>(x(4), x(5)), std::complex<double>(x(6), x(7))};
}

/// ∂z^{k(a)}/∂x^a where k(a) = a / 2.
inline std::complex<double> z_partial(int a) {
  if (a % 2 == 0) return 1.0;
  return a < 4 ? std::complex<double>(0, -1) : std::complex<double>(0, 1);
}

}  // namespace detail

inline double nu(const Vector8d& x) {
  const auto z = detail::z_coordinates(x);
  return 4.0 * (z[0] * z[1] * z[2] * z[3]).imag();
}
inline double nu(const SpherePoint& p) { return nu(p.x()); }

/// Euclidean gradient of the quartic polynomial ν on ℝ⁸.
inline Vector8d nu_euclidean_gradient(const Vector8d& x) {
  const auto z = detail::z_coordinates(x);
  Vector8d g;
  for (int a = 0; a < 8; ++a) {
    std::complex<double> prod = detail::z_partial(a);
    for (int k = 0; k < 4; ++k)
      if (k != a / 2) prod *= z[k];
    g(a) = 4.0 * prod.imag();
  }
  return g;
}

inline Matrix8d nu_euclidean_hessian(const Vector8d& x) {
  const auto z = detail::z_coordinates(x);
  Matrix8d h = Matrix8d::Zero();
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) {
      if (a / 2 == b / 2) continue;
      std::complex<double> prod = detail::z_partial(a) * detail::z_partial(b);
      for (int k = 0; k < 4; ++k)
        if (k != a / 2 && k != b / 2) prod *= z[k];
      h(a, b) = 4.0 * prod.imag();
    }
  return h;
}

/// Gradient of ν on the round sphere: the tangential part of the Euclidean one.
inline Vector8d grad_nu(const SpherePoint& p) {
  const Vector8d g = nu_euclidean_gradient(p.x());
  return g - g.dot(p.x()) * p.x();
}

/// ν = φ_x(U1, U2, U3) evaluated through the Spin(7) form.
inline double nu_from_phi(const SpherePoint& p) {
  const auto u = torus_fields(p);
  return evaluate(interior(p.x(), spin7_form()), {u[0], u[1], u[2]});
}

/// (−4 ⋆φ(U1, U2, U3, ·))^♯ using ⋆φ = ι*Ψ and the round metric.
inline Vector8d grad_nu_from_star_phi(const SpherePoint& p) {
  const auto u = torus_fields(p);
  const Form one = interior(u[2], interior(u[1], interior(u[0], spin7_form())));
  Vector8d c;
  for (int a = 0; a < 8; ++a) c(a) = -4.0 * one[static_cast<Mask>(1u << a)];
  return c - c.dot(p.x()) * p.x();
}

/// Riemannian Hessian of ν in the oriented tangent frame (7×7).
inline Eigen::Matrix<double, 7, 7> intrinsic_hessian(const SpherePoint& p) {
  const TangentFrame t = tangent_frame(p);
  const double radial = nu_euclidean_gradient(p.x()).dot(p.x());
  return t.transpose() * nu_euclidean_hessian(p.x()) * t - radial * Eigen::Matrix<double, 7, 7>::Identity();
}

/// X_i(X_j ν) with X_i = ∂_i − x^i E, for the quartic ν.
inline double second_projected_derivative(const Vector8d& x, int i, int j) {
  const Vector8d g = nu_euclidean_gradient(x);
  const Matrix8d h = nu_euclidean_hessian(x);
  const double n = nu(x);
  return h(i, j) - 4.0 * (i == j ? n : 0.0) - 4.0 * x(j) * g(i) - x(i) * (3.0 * g(j) - 20.0 * x(j) * n);
}

struct SpanningVector {
  int index;
  double sign;
};

/// X0, X2, X4, εX7, X1, X3, −X5, εX6.
inline std::array<SpanningVector, 8> hessian_spanning_set(int epsilon) {
  const double e = epsilon;
  return {{{0, 1.0}, {2, 1.0}, {4, 1.0}, {7, e}, {1, 1.0}, {3, 1.0}, {5, -1.0}, {6, e}}};
}

struct HessianReport {
  Matrix8d matrix;                        ///< Hess(Y_a, Y_b) over the spanning set
  Vector8d singular_values;
  int rank = 0;
  Eigen::Matrix<double, 7, 1> intrinsic_eigenvalues;  ///< ascending
  int epsilon = 1;
};

inline HessianReport hessian_at(const SpherePoint& p, double grad_tol = default_grad_tolerance,
                                double rank_threshold = default_rank_threshold) {
  if (!(grad_nu(p).norm() < grad_tol)) throw Error(ErrorCode::contract_violation, "hessian_at needs a critical point");
  HessianReport out;
  out.epsilon = nu(p) < 0 ? -1 : 1;
  const auto span = hessian_spanning_set(out.epsilon);
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b)
      out.matrix(a, b) = span[a].sign * span[b].sign * second_projected_derivative(p.x(), span[a].index, span[b].index);
  out.singular_values = Eigen::JacobiSVD<Matrix8d>(out.matrix).singularValues();
  out.rank = static_cast<int>((out.singular_values.array() > rank_threshold).count());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 7, 7>> eig(intrinsic_hessian(p));
  out.intrinsic_eigenvalues = eig.eigenvalues();
  return out;
}

enum class CriticalKind {
  regular,
  critical_nonzero_associative,
  critical_zero_degenerate,
  dichotomy_violation,  ///< critical, but neither branch's conclusion holds
};

inline const char* to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::regular: return "regular";
    case CriticalKind::critical_nonzero_associative: return "critical_nonzero_associative";
    case CriticalKind::critical_zero_degenerate: return "critical_zero_degenerate";
    case CriticalKind::dichotomy_violation: return "dichotomy_violation";
  }
  return "unknown";
}

struct CriticalReport {
  CriticalKind kind = CriticalKind::regular;
  double nu = 0.0;
  double grad_norm = 0.0;
  Eigen::Vector3d orbit_singular_values = Eigen::Vector3d::Zero();
  std::optional<double> associative_residual;
};

inline CriticalReport critical_classify(const SpherePoint& p, double grad_tol = default_grad_tolerance,
                                        double rank_threshold = default_rank_threshold) {
  CriticalReport r;
  r.nu = nu(p);
  r.grad_norm = grad_nu(p).norm();
  const auto u = torus_fields(p);
  Eigen::Matrix<double, 8, 3> orbit;
  orbit << u[0], u[1], u[2];
  r.orbit_singular_values = Eigen::JacobiSVD<Eigen::Matrix<double, 8, 3>>(orbit).singularValues();
  if (!(r.grad_norm < grad_tol)) return r;

  if (std::abs(r.nu) > grad_tol) {
    const InducedStructure s = induced_phi_at(p);
    const Eigen::MatrixXd t = s.frame.transpose();
    const auto closure = cross_and_associative(t * u[0], t * u[1], t * u[2], s.g2);
    r.associative_residual = closure.residual;
    r.kind = closure.is_associative ? CriticalKind::critical_nonzero_associative : CriticalKind::dichotomy_violation;
  } else {
    r.kind = r.orbit_singular_values(2) < rank_threshold ? CriticalKind::critical_zero_degenerate
                                                          : CriticalKind::dichotomy_violation;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Locating extrema.

struct PolishResult {
  SpherePoint point;
  double grad_norm;
  int iterations;
};

/// Riemannian Newton iteration for grad ν = 0 with a pseudo-inverse Hessian,
/// so the flat T³-orbit directions do not stall it.
inline PolishResult polish_critical(const SpherePoint& start, int max_iterations = 60, double tol = 1e-13) {
  SpherePoint p = start;
  for (int it = 0; it < max_iterations; ++it) {
    const TangentFrame t = tangent_frame(p);
    const Eigen::Matrix<double, 7, 1> g = t.transpose() * nu_euclidean_gradient(p.x());
    if (g.norm() < tol) return {p, g.norm(), it};
    const Eigen::Matrix<double, 7, 7> h = intrinsic_hessian(p);
    Eigen::JacobiSVD<Eigen::Matrix<double, 7, 7>> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-8);
    const Eigen::Matrix<double, 7, 1> step = -svd.solve(g);
    p = SpherePoint::normalized(p.x() + t * step);
  }
  return {p, grad_nu(p).norm(), max_iterations};
}

/// Projected gradient ascent (direction +1) or descent (−1) with backtracking,
/// then Newton polishing once the gradient is small.
inline PolishResult local_extremum(const SpherePoint& start, int direction, int max_iterations = 2000) {
  require(direction == 1 || direction == -1, "direction must be +1 or -1");
  SpherePoint p = start;
  double step = 0.5;
  for (int it = 0; it < max_iterations; ++it) {
    const Vector8d g = grad_nu(p);
    if (g.norm() < 1e-5) break;
    const double current = direction * nu(p);
    while (step > 1e-12) {
      SpherePoint trial = SpherePoint::normalized(p.x() + direction * step * g);
      if (direction * nu(trial) > current) {
        p = trial;
        step = std::min(1.0, 2.0 * step);
        break;
      }
      step *= 0.5;
    }
  }
  return polish_critical(p);
}

/// Worker count from G2LAB_THREADS, else the hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("G2LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Seed for chunk c of a run seeded with `seed` (SplitMix64 finalizer).
inline std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (chunk + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Vector8d uniform_on_sphere(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector8d v;
  do {
    for (int i = 0; i < 8; ++i) v(i) = normal(rng);
  } while (v.norm() < 1e-8);
  return v.normalized();
}

/// Uniform point on S⁷ ∩ {z^i = z^j = 0}, zero-based pair indices i ≠ j.
inline SpherePoint sample_zero_sphere(int i, int j, std::mt19937_64& rng) {
  require(i != j && i >= 0 && i < 4 && j >= 0 && j < 4, "zero sphere needs two distinct pairs");
  Vector8d v = uniform_on_sphere(rng);
  v(2 * i) = v(2 * i + 1) = v(2 * j) = v(2 * j + 1) = 0.0;
  if (v.norm() < 1e-8) {
    int k = 0;
    while (k == i || k == j) ++k;
    v(2 * k) = 1.0;
  }
  return SpherePoint::normalized(v);
}

struct ExtremaSearch {
  std::size_t samples = 0;
  double sample_max = -1.0, sample_min = 1.0;
  double max_abs_sample = 0.0;
  SpherePoint sample_argmax{Vector8d::Unit(0)};
  SpherePoint sample_argmin{Vector8d::Unit(0)};
  PolishResult maximum{SpherePoint(Vector8d::Unit(0)), 0.0, 0};
  PolishResult minimum{SpherePoint(Vector8d::Unit(0)), 0.0, 0};
};

/// Monte Carlo over uniform samples in fixed-size chunks (each with its own
/// seeded stream, so the result does not depend on the thread count), then
/// local ascent and descent from the best samples.
inline ExtremaSearch search_extrema(std::size_t samples, std::uint64_t seed, unsigned threads = 0) {
  require(samples > 0, "need at least one sample");
  constexpr std::size_t chunk_size = 1 << 15;
  const std::size_t chunks = (samples + chunk_size - 1) / chunk_size;
  struct ChunkResult {
    double max = -1.0, min = 1.0, max_abs = 0.0;
    Vector8d argmax, argmin;
  };
  std::vector<ChunkResult> results(chunks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      std::mt19937_64 rng(chunk_seed(seed, c));
      ChunkResult r;
      const std::size_t n = std::min(chunk_size, samples - c * chunk_size);
      for (std::size_t k = 0; k < n; ++k) {
        const Vector8d x = uniform_on_sphere(rng);
        const double v = nu(x);
        r.max_abs = std::max(r.max_abs, std::abs(v));
        if (v > r.max) r.max = v, r.argmax = x;
        if (v < r.min) r.min = v, r.argmin = x;
      }
      results[c] = r;
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads ? threads : default_thread_count(),
                                                             static_cast<unsigned>(chunks)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ExtremaSearch out;
  out.samples = samples;
  for (const auto& r : results) {
    out.max_abs_sample = std::max(out.max_abs_sample, r.max_abs);
    if (r.max > out.sample_max) out.sample_max = r.max, out.sample_argmax = SpherePoint::normalized(r.argmax);
    if (r.min < out.sample_min) out.sample_min = r.min, out.sample_argmin = SpherePoint::normalized(r.argmin);
  }
  out.maximum = local_extremum(out.sample_argmax, +1);
  out.minimum = local_extremum(out.sample_argmin, -1);
  return out;
}

}  // namespace g2lab::sphere7
