#pragma once

// Exterior algebra over frames of dimension at most eight.
//
// A basis k-form e^{i1...ik} is encoded as a bitmask with bit i set for
// generator i (generators are numbered from zero). Coefficients are doubles;
// every form is homogeneous of a fixed degree.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "g2lab/error.hpp"

namespace g2lab {

using Mask = std::uint16_t;

inline constexpr int max_frame_dim = 8;
inline constexpr double default_prune_threshold = 1e-14;
inline constexpr double default_form_tolerance = 1e-10;

inline int degree_of(Mask m) { return std::popcount(static_cast<unsigned>(m)); }

/// Sign of e^A ∧ e^B relative to e^{A|B}; zero when A and B overlap.
inline int wedge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  int inversions = 0;
  for (unsigned rest = b; rest != 0; rest &= rest - 1) {
    const int j = std::countr_zero(rest);
    inversions += std::popcount(static_cast<unsigned>(a) >> (j + 1));
  }
  return (inversions & 1) ? -1 : 1;
}

/// All masks of the given popcount below 2^dim, in increasing order.
inline std::vector<Mask> masks_of_degree(int dim, int degree) {
  std::vector<Mask> out;
  for (unsigned m = 0; m < (1u << dim); ++m)
    if (std::popcount(m) == degree) out.push_back(static_cast<Mask>(m));
  return out;
}

inline std::vector<int> mask_indices(Mask m) {
  std::vector<int> out;
  for (unsigned rest = m; rest != 0; rest &= rest - 1) out.push_back(std::countr_zero(rest));
  return out;
}

class Form {
 public:
  using Terms = std::map<Mask, double>;

  Form(int dim, int degree, double prune = default_prune_threshold)
      : dim_(dim), degree_(degree), prune_(prune) {
    require(dim >= 1 && dim <= max_frame_dim, "form dimension must lie in 1..8");
    require(degree >= 0 && degree <= dim, "form degree must lie in 0..dim");
  }

  static Form scalar(int dim, double value) {
    Form f(dim, 0);
    f.add(0, value);
    return f;
  }

  /// c · e^{i1} ∧ ... ∧ e^{ik}; indices may come in any order.
  static Form basis(int dim, std::initializer_list<int> indices, double c = 1.0) {
    return basis(dim, std::vector<int>(indices), c);
  }

  static Form basis(int dim, std::vector<int> idx, double c = 1.0) {
    Form f(dim, static_cast<int>(idx.size()));
    int sign = 1;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      require(idx[i] >= 0 && idx[i] < dim, "basis index out of range");
      for (std::size_t j = i + 1; j < idx.size(); ++j) {
        if (idx[i] == idx[j]) return f;
        if (idx[i] > idx[j]) sign = -sign;
      }
    }
    Mask m = 0;
    for (int i : idx) m |= static_cast<Mask>(1u << i);
    f.add(m, sign * c);
    return f;
  }

  /// Σ c_i e^i.
  static Form one_form(const Eigen::Ref<const Eigen::VectorXd>& c) {
    Form f(static_cast<int>(c.size()), 1);
    for (int i = 0; i < c.size(); ++i) f.add(static_cast<Mask>(1u << i), c(i));
    return f;
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  double prune_threshold() const { return prune_; }
  const Terms& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  double operator[](Mask m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
  }

  /// Coefficient of e^{i1...ik} with the indices in the order given.
  double coefficient(std::initializer_list<int> idx) const {
    const Form probe = basis(dim_, idx);
    if (probe.empty()) return 0.0;
    const auto& [m, sign] = *probe.terms_.begin();
    return sign * (*this)[m];
  }

  void add(Mask m, double value) {
    require(degree_of(m) == degree_, "term degree does not match form degree");
    require(m < (1u << dim_), "term uses a generator outside the frame");
    if (value == 0.0) return;
    double& slot = terms_[m];
    slot += value;
    if (std::abs(slot) < prune_) terms_.erase(m);
  }

  double max_abs() const {
    double out = 0.0;
    for (const auto& [m, c] : terms_) out = std::max(out, std::abs(c));
    return out;
  }

  Form& operator+=(const Form& other) {
    check_compatible(other);
    for (const auto& [m, c] : other.terms_) add(m, c);
    return *this;
  }
  Form& operator-=(const Form& other) {
    check_compatible(other);
    for (const auto& [m, c] : other.terms_) add(m, -c);
    return *this;
  }
  Form& operator*=(double s) {
    Terms scaled;
    for (const auto& [m, c] : terms_)
      if (std::abs(c * s) >= prune_) scaled.emplace(m, c * s);
    terms_ = std::move(scaled);
    return *this;
  }

  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator*(double s, Form a) { return a *= s; }
  friend Form operator*(Form a, double s) { return a *= s; }
  friend Form operator-(Form a) { return a *= -1.0; }

 private:
  void check_compatible(const Form& other) const {
    require(dim_ == other.dim_, "forms live over frames of different dimension");
    require(degree_ == other.degree_, "cannot add forms of different degree");
  }

  int dim_;
  int degree_;
  double prune_;
  Terms terms_;
};

inline bool approx_equal(const Form& a, const Form& b, double tol = default_form_tolerance) {
  if (a.dim() != b.dim() || a.degree() != b.degree()) return false;
  for (const auto& [m, c] : a.terms())
    if (std::abs(c - b[m]) > tol) return false;
  for (const auto& [m, c] : b.terms())
    if (std::abs(c - a[m]) > tol) return false;
  return true;
}

/// Largest termwise difference; infinite for incompatible forms.
inline double max_difference(const Form& a, const Form& b) {
  if (a.dim() != b.dim() || a.degree() != b.degree()) return INFINITY;
  return (a - b).max_abs();
}

inline Form wedge(const Form& a, const Form& b) {
  require(a.dim() == b.dim(), "wedge: dimension mismatch");
  require(a.degree() + b.degree() <= a.dim(), "wedge: degree exceeds dimension");
  Form out(a.dim(), a.degree() + b.degree(), a.prune_threshold());
  for (const auto& [ma, ca] : a.terms())
    for (const auto& [mb, cb] : b.terms())
      if (const int s = wedge_sign(ma, mb)) out.add(ma | mb, s * ca * cb);
  return out;
}

inline Form wedge(const Form& a, const Form& b, const Form& c) { return wedge(wedge(a, b), c); }

/// v ⌟ a, with v given in the dual basis E_0..E_{dim-1}.
inline Form interior(const Eigen::Ref<const Eigen::VectorXd>& v, const Form& a) {
  require(v.size() == a.dim(), "interior: vector dimension mismatch");
  if (a.degree() == 0) return Form(a.dim(), 0, a.prune_threshold());
  Form out(a.dim(), a.degree() - 1, a.prune_threshold());
  for (const auto& [m, c] : a.terms()) {
    int position = 0;
    for (unsigned rest = m; rest != 0; rest &= rest - 1, ++position) {
      const int g = std::countr_zero(rest);
      if (v(g) == 0.0) continue;
      const double sign = (position & 1) ? -1.0 : 1.0;
      out.add(static_cast<Mask>(m & ~(1u << g)), sign * v(g) * c);
    }
  }
  return out;
}

/// a(v_1, ..., v_k).
inline double evaluate(const Form& a, const std::vector<Eigen::VectorXd>& vectors) {
  require(static_cast<int>(vectors.size()) == a.degree(), "evaluate: need one vector per slot");
  Form current = a;
  for (const auto& v : vectors) current = interior(v, current);
  return current[0];
}

/// Re-expresses a in the coframe dual to the columns of `basis` (each column a
/// vector in the original frame). The result has dimension basis.cols().
inline Form pullback(const Form& a, const Eigen::MatrixXd& basis) {
  require(basis.rows() == a.dim(), "pullback: basis vectors have the wrong length");
  const int m = static_cast<int>(basis.cols());
  require(a.degree() <= m, "pullback: degree exceeds target dimension");
  Form out(m, a.degree(), a.prune_threshold());
  const int k = a.degree();
  for (Mask target : masks_of_degree(m, k)) {
    const auto cols = mask_indices(target);
    double value = 0.0;
    for (const auto& [source, c] : a.terms()) {
      if (k == 0) {
        value += c;
        continue;
      }
      const auto rows = mask_indices(source);
      Eigen::MatrixXd block(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) block(i, j) = basis(rows[i], cols[j]);
      value += c * block.determinant();
    }
    out.add(target, value);
  }
  return out;
}

/// Maps generator i of a to generator i + offset of a frame of dimension new_dim.
inline Form embed(const Form& a, int new_dim, int offset) {
  require(offset >= 0 && a.dim() + offset <= new_dim, "embed: target frame too small");
  Form out(new_dim, a.degree(), a.prune_threshold());
  for (const auto& [m, c] : a.terms()) out.add(static_cast<Mask>(m << offset), c);
  return out;
}

/// The derivation extending e^i ↦ Σ_j M_ij e^j. For a constant-coefficient
/// form this is the Lie derivative along the linear vector field x ↦ Mx.
inline Form linear_derivation(const Eigen::MatrixXd& M, const Form& a) {
  require(M.rows() == a.dim() && M.cols() == a.dim(), "linear_derivation: matrix size mismatch");
  Form out(a.dim(), a.degree(), a.prune_threshold());
  for (const auto& [m, c] : a.terms()) {
    const auto idx = mask_indices(m);
    for (std::size_t p = 0; p < idx.size(); ++p) {
      const Mask removed = static_cast<Mask>(m & ~(1u << idx[p]));
      for (int j = 0; j < a.dim(); ++j) {
        if (M(idx[p], j) == 0.0) continue;
        // e^{i_p} sits at position p; moving e^j there from the front costs (-1)^p.
        const Mask jm = static_cast<Mask>(1u << j);
        const int s = wedge_sign(jm, removed);
        if (s == 0) continue;
        out.add(removed | jm, ((p & 1) ? -1.0 : 1.0) * s * c * M(idx[p], j));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics, inner products and the Hodge star.

struct Metric {
  Eigen::MatrixXd g;
  int orientation = 1;

  static Metric euclidean(int dim) { return Metric{Eigen::MatrixXd::Identity(dim, dim), 1}; }

  int dim() const { return static_cast<int>(g.rows()); }

  void validate() const {
    require(g.rows() == g.cols() && g.rows() >= 1 && g.rows() <= max_frame_dim,
            "metric must be square of size 1..8");
    require(orientation == 1 || orientation == -1, "orientation must be +1 or -1");
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    require((g - g.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, "metric must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    require(llt.info() == Eigen::Success, "metric must be positive-definite");
  }
};

namespace detail {

inline double minor_det(const Eigen::MatrixXd& m, Mask rows, Mask cols) {
  const auto r = mask_indices(rows);
  const auto c = mask_indices(cols);
  const int k = static_cast<int>(r.size());
  if (k == 0) return 1.0;
  Eigen::MatrixXd block(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) block(i, j) = m(r[i], c[j]);
  return block.determinant();
}

inline bool is_diagonal(const Eigen::MatrixXd& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

}  // namespace detail

/// Induced inner product ⟨e^I, e^K⟩ = det(g^{-1}[I, K]).
inline double inner(const Form& a, const Form& b, const Metric& metric) {
  require(a.dim() == metric.dim() && b.dim() == metric.dim(), "inner: dimension mismatch");
  if (a.degree() != b.degree()) return 0.0;
  const Eigen::MatrixXd ginv = metric.g.inverse();
  const bool diagonal = detail::is_diagonal(ginv);
  double out = 0.0;
  for (const auto& [ma, ca] : a.terms()) {
    if (diagonal) {
      out += ca * b[ma] * detail::minor_det(ginv, ma, ma);
      continue;
    }
    for (const auto& [mb, cb] : b.terms()) out += ca * cb * detail::minor_det(ginv, ma, mb);
  }
  return out;
}

inline double norm(const Form& a, const Metric& metric) {
  return std::sqrt(std::max(0.0, inner(a, a, metric)));
}

inline Form volume_form(const Metric& metric) {
  const int n = metric.dim();
  Form vol(n, n);
  vol.add(static_cast<Mask>((1u << n) - 1), metric.orientation * std::sqrt(metric.g.determinant()));
  return vol;
}

/// Defined by a ∧ ⋆b = ⟨a, b⟩ vol.
inline Form hodge_star(const Form& a, const Metric& metric) {
  const int n = metric.dim();
  require(a.dim() == n, "hodge_star: dimension mismatch");
  const Eigen::MatrixXd ginv = metric.g.inverse();
  const bool diagonal = detail::is_diagonal(ginv);
  const double vol = metric.orientation * std::sqrt(metric.g.determinant());
  const Mask full = static_cast<Mask>((1u << n) - 1);
  const auto candidates = masks_of_degree(n, a.degree());
  Form out(n, n - a.degree(), a.prune_threshold());
  for (const auto& [mi, c] : a.terms()) {
    auto contribute = [&](Mask mk) {
      const double gram = detail::minor_det(ginv, mi, mk);
      if (gram == 0.0) return;
      const Mask complement = static_cast<Mask>(full & ~mk);
      out.add(complement, vol * c * gram * wedge_sign(mk, complement));
    };
    if (diagonal) {
      contribute(mi);
    } else {
      for (Mask mk : candidates) contribute(mk);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Frames with structure equations, and the exterior derivative.

/// A form whose coefficients are functions, known to first order at a point:
/// partials[g] holds the derivatives of the coefficients along E_g. Missing
/// entries mean constant coefficients in that direction.
struct FormJet {
  Form value;
  std::vector<std::optional<Form>> partials;

  static FormJet constant(Form value) { return FormJet{std::move(value), {}}; }

  /// Coefficients depending on the single parameter s dual to generator s_index.
  static FormJet s_dependent(Form value, Form s_derivative, int s_index) {
    require(value.dim() == s_derivative.dim() && value.degree() == s_derivative.degree(),
            "s-derivative must match the form it differentiates");
    FormJet jet{std::move(value), {}};
    jet.partials.resize(jet.value.dim());
    jet.partials[s_index] = std::move(s_derivative);
    return jet;
  }
};

/// A scalar depending on s, known with its first derivative.
struct SDependentScalar {
  double value = 0.0;
  double s_derivative = 0.0;
};

class FrameAlgebra {
 public:
  /// differentials[g] is d e^g. When s_index is set, that generator is ds and
  /// must be closed. Throws inconsistent_connection when d² ≠ 0 on a generator
  /// beyond jacobi_tol (relative to the largest structure coefficient).
  FrameAlgebra(std::vector<FormJet> differentials, Metric metric,
               std::optional<int> s_index = std::nullopt, double jacobi_tol = 1e-12)
      : differentials_(std::move(differentials)), metric_(std::move(metric)), s_index_(s_index) {
    const int n = static_cast<int>(differentials_.size());
    require(n >= 1 && n <= max_frame_dim, "frame dimension must lie in 1..8");
    require(metric_.dim() == n, "metric size must match the number of generators");
    metric_.validate();
    for (const auto& d : differentials_) {
      require(d.value.dim() == n && d.value.degree() == 2, "generator differentials must be two-forms");
      require(d.partials.empty() || static_cast<int>(d.partials.size()) == n,
              "differential jets need one partial slot per generator");
    }
    if (s_index_) {
      require(*s_index_ >= 0 && *s_index_ < n, "s generator index out of range");
      require(differentials_[*s_index_].value.empty(), "the ds generator must be closed");
    }
    basis_d_.reserve(1u << n);
    for (unsigned m = 0; m < (1u << n); ++m) basis_d_.push_back(differential_of_basis(static_cast<Mask>(m)));
    const double defect = jacobi_defect();
    if (defect > jacobi_tol * std::max(1.0, structure_scale()))
      throw Error(ErrorCode::inconsistent_connection,
                  "frame differentials violate d^2 = 0 (defect " + std::to_string(defect) + ")");
  }

  static FrameAlgebra abelian(int dim) {
    std::vector<FormJet> d;
    for (int i = 0; i < dim; ++i) d.push_back(FormJet::constant(Form(dim, 2)));
    return FrameAlgebra(std::move(d), Metric::euclidean(dim));
  }

  /// Diagonal Bianchi normal form de^i = λ_i e^{jk} for cyclic (ijk).
  static FrameAlgebra bianchi(const Eigen::Vector3d& lambda) {
    std::vector<FormJet> d;
    for (int i = 0; i < 3; ++i)
      d.push_back(FormJet::constant(Form::basis(3, {(i + 1) % 3, (i + 2) % 3}, lambda(i))));
    return FrameAlgebra(std::move(d), Metric::euclidean(3));
  }

  int dim() const { return static_cast<int>(differentials_.size()); }
  const Metric& metric() const { return metric_; }
  int orientation() const { return metric_.orientation; }
  std::optional<int> s_index() const { return s_index_; }
  const FormJet& differential(int g) const { return differentials_.at(g); }

  /// d(e^I) for a basis form.
  const Form& basis_differential(Mask m) const { return basis_d_.at(m); }

  /// Largest coefficient of d(d e^g) over all generators.
  double jacobi_defect() const;

  double structure_scale() const {
    double out = 0.0;
    for (const auto& d : differentials_) {
      out = std::max(out, d.value.max_abs());
      for (const auto& p : d.partials)
        if (p) out = std::max(out, p->max_abs());
    }
    return out;
  }

 private:
  Form differential_of_basis(Mask m) const {
    const int n = dim();
    const int k = degree_of(m);
    if (k == n) return Form(n, n);
    Form out(n, k + 1);
    int position = 0;
    for (unsigned rest = m; rest != 0; rest &= rest - 1, ++position) {
      const int g = std::countr_zero(rest);
      const Mask before = static_cast<Mask>(m & ((1u << g) - 1));
      const Mask after = static_cast<Mask>(m & ~((1u << (g + 1)) - 1));
      const double sign = (position & 1) ? -1.0 : 1.0;
      for (const auto& [dm, dc] : differentials_[g].value.terms()) {
        const int s1 = wedge_sign(before, dm);
        if (s1 == 0) continue;
        const int s2 = wedge_sign(before | dm, after);
        if (s2 == 0) continue;
        out.add(before | dm | after, sign * s1 * s2 * dc);
      }
    }
    return out;
  }

  std::vector<FormJet> differentials_;
  Metric metric_;
  std::optional<int> s_index_;
  std::vector<Form> basis_d_;
};

/// d a = Σ_g e^g ∧ ∂_g a + Σ_I a_I d(e^I).
inline Form exterior_derivative(const FormJet& a, const FrameAlgebra& frame) {
  const int n = frame.dim();
  require(a.value.dim() == n, "exterior_derivative: dimension mismatch");
  if (a.value.degree() == n) return Form(n, n);
  Form out(n, a.value.degree() + 1, a.value.prune_threshold());
  for (const auto& [m, c] : a.value.terms()) {
    for (const auto& [dm, dc] : frame.basis_differential(m).terms()) out.add(dm, c * dc);
  }
  for (std::size_t g = 0; g < a.partials.size(); ++g) {
    if (!a.partials[g]) continue;
    const Form& p = *a.partials[g];
    require(p.dim() == n && p.degree() == a.value.degree(), "partial derivative has the wrong shape");
    out += wedge(Form::basis(n, {static_cast<int>(g)}), p);
  }
  return out;
}

inline Form exterior_derivative(const Form& a, const FrameAlgebra& frame) {
  return exterior_derivative(FormJet::constant(a), frame);
}

inline double FrameAlgebra::jacobi_defect() const {
  double out = 0.0;
  for (const auto& d : differentials_) out = std::max(out, exterior_derivative(d, *this).max_abs());
  return out;
}

// ---------------------------------------------------------------------------
// R³-valued forms and the matrix calculus on them. Index triples (ijk) always
// run over cyclic permutations of (012).

class FormTriple {
 public:
  FormTriple(Form a, Form b, Form c) : c_{std::move(a), std::move(b), std::move(c)} {
    for (int i = 1; i < 3; ++i) {
      require(c_[i].dim() == c_[0].dim(), "triple components must share a frame");
      require(c_[i].degree() == c_[0].degree(), "triple components must share a degree");
    }
  }

  static FormTriple zero(int dim, int degree) {
    return FormTriple(Form(dim, degree), Form(dim, degree), Form(dim, degree));
  }

  const Form& operator[](int i) const { return c_.at(i); }
  int dim() const { return c_[0].dim(); }
  int degree() const { return c_[0].degree(); }

  double max_abs() const {
    return std::max({c_[0].max_abs(), c_[1].max_abs(), c_[2].max_abs()});
  }

  friend FormTriple operator+(const FormTriple& a, const FormTriple& b) {
    return FormTriple(a[0] + b[0], a[1] + b[1], a[2] + b[2]);
  }
  friend FormTriple operator-(const FormTriple& a, const FormTriple& b) {
    return FormTriple(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
  }
  friend FormTriple operator*(double s, const FormTriple& a) {
    return FormTriple(s * a[0], s * a[1], s * a[2]);
  }
  /// (M γ)_i = Σ_a M_ia γ_a.
  friend FormTriple operator*(const Eigen::Matrix3d& M, const FormTriple& a) {
    std::array<Form, 3> out{Form(a.dim(), a.degree()), Form(a.dim(), a.degree()), Form(a.dim(), a.degree())};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (M(i, j) != 0.0) out[i] += M(i, j) * a[j];
    return FormTriple(std::move(out[0]), std::move(out[1]), std::move(out[2]));
  }

 private:
  std::array<Form, 3> c_;
};

inline bool approx_equal(const FormTriple& a, const FormTriple& b, double tol = default_form_tolerance) {
  for (int i = 0; i < 3; ++i)
    if (!approx_equal(a[i], b[i], tol)) return false;
  return true;
}

inline double max_difference(const FormTriple& a, const FormTriple& b) {
  double out = 0.0;
  for (int i = 0; i < 3; ++i) out = std::max(out, max_difference(a[i], b[i]));
  return out;
}

/// (γ ⊼ δ)_i = γ_j ∧ δ_k.
inline FormTriple barwedge(const FormTriple& a, const FormTriple& b) {
  return FormTriple(wedge(a[1], b[2]), wedge(a[2], b[0]), wedge(a[0], b[1]));
}

/// The "wedge square" γ ⊼ γ, i.e. (γ_j ∧ γ_k)_i.
inline FormTriple wedge_square(const FormTriple& g) { return barwedge(g, g); }

/// a^T ∧ b = Σ_i a_i ∧ b_i.
inline Form dot_wedge(const FormTriple& a, const FormTriple& b) {
  return wedge(a[0], b[0]) + wedge(a[1], b[1]) + wedge(a[2], b[2]);
}

inline FormTriple wedge(const Form& a, const FormTriple& b) {
  return FormTriple(wedge(a, b[0]), wedge(a, b[1]), wedge(a, b[2]));
}

inline FormTriple embed(const FormTriple& t, int new_dim, int offset) {
  return FormTriple(embed(t[0], new_dim, offset), embed(t[1], new_dim, offset), embed(t[2], new_dim, offset));
}

inline FormTriple exterior_derivative(const FormTriple& t, const FrameAlgebra& frame) {
  return FormTriple(exterior_derivative(t[0], frame), exterior_derivative(t[1], frame),
                    exterior_derivative(t[2], frame));
}

/// γ_i = Σ_a C_ia e^{offset + a} in a frame of dimension dim.
inline FormTriple coframe_triple(const Eigen::Matrix3d& C, int dim = 3, int offset = 0) {
  std::array<Form, 3> out{Form(dim, 1), Form(dim, 1), Form(dim, 1)};
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 3; ++a) out[i].add(static_cast<Mask>(1u << (offset + a)), C(i, a));
  return FormTriple(std::move(out[0]), std::move(out[1]), std::move(out[2]));
}

/// (X^♮)_i = X_jk − X_kj.
inline Eigen::Vector3d natural_flat(const Eigen::Matrix3d& X) {
  return {X(1, 2) - X(2, 1), X(2, 0) - X(0, 2), X(0, 1) - X(1, 0)};
}

/// H · adj H = det H · Id.
inline Eigen::Matrix3d adjugate(const Eigen::Matrix3d& H) {
  Eigen::Matrix3d adj;
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      adj(a, i) = H(j, b) * H(k, c) - H(j, c) * H(k, b);
    }
  }
  return adj;
}

}  // namespace g2lab
