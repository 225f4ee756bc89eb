#ifndef IQC_VALUE_SET_HPP
#define IQC_VALUE_SET_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "iqc/lti.hpp"

namespace iqc {

enum class ValueSetKind { RepeatedQuadratic, FullBlock, Intersection, LmiRegion, EquationConstrained };

inline const char* to_string(ValueSetKind k) {
  switch (k) {
    case ValueSetKind::RepeatedQuadratic: return "RepeatedQuadratic";
    case ValueSetKind::FullBlock: return "FullBlock";
    case ValueSetKind::Intersection: return "Intersection";
    case ValueSetKind::LmiRegion: return "LmiRegion";
    case ValueSetKind::EquationConstrained: return "EquationConstrained";
  }
  return "?";
}

inline ValueSetKind value_set_kind_from_string(const std::string& s) {
  for (auto k : {ValueSetKind::RepeatedQuadratic, ValueSetKind::FullBlock, ValueSetKind::Intersection,
                 ValueSetKind::LmiRegion, ValueSetKind::EquationConstrained})
    if (s == to_string(k)) return k;
  throw Error(ErrorCode::ParseError, "unknown value set kind '" + s + "'");
}

inline constexpr double kMembershipTol = 1e-9;

/// Uncertainty value set. Scalar kinds describe {v I_k}; FullBlock describes l×k matrices.
///
/// Sign requirements on the P data (r ≤ 0, R ⪯ 0) are checked at construction unless
/// the set is flagged parametric, in which case only real constant uncertainties are
/// assumed to enter the loop and the requirement is waived.
class ValueSet {
 public:
  static ValueSet repeated(const Matrix& p0, int k, bool parametric = false) {
    return ValueSet(ValueSetKind::RepeatedQuadratic, {p0}, k, k, 1, parametric);
  }
  static ValueSet full_block(const Matrix& p0, int k, int l, bool parametric = false) {
    return ValueSet(ValueSetKind::FullBlock, {p0}, k, l, 1, parametric);
  }
  static ValueSet intersection(std::vector<Matrix> ps, int k, bool parametric = false) {
    const int nu = static_cast<int>(ps.size());
    return ValueSet(ValueSetKind::Intersection, std::move(ps), k, k, nu, parametric);
  }
  static ValueSet lmi_region(const Matrix& p0, int nu, int k, bool parametric = false) {
    return ValueSet(ValueSetKind::LmiRegion, {p0}, k, k, nu, parametric);
  }
  static ValueSet equation_constrained(const Matrix& p0, int k, bool parametric = false) {
    return ValueSet(ValueSetKind::EquationConstrained, {p0}, k, k, 1, parametric);
  }

  ValueSetKind kind() const { return kind_; }
  const std::vector<Matrix>& p_blocks() const { return p_; }
  const Matrix& p0() const { return p_.front(); }
  int rep_dim() const { return k_; }
  std::pair<int, int> block_dims() const { return {k_, l_}; }
  int nu() const { return nu_; }
  bool parametric() const { return parametric_; }
  bool is_scalar() const { return kind_ != ValueSetKind::FullBlock; }

  /// Whether the sign requirements on the P data hold (independent of the parametric flag).
  bool sign_constraints_hold() const {
    switch (kind_) {
      case ValueSetKind::RepeatedQuadratic:
      case ValueSetKind::EquationConstrained: return p_[0](1, 1) <= 0.0;
      case ValueSetKind::Intersection:
        return std::all_of(p_.begin(), p_.end(), [](const Matrix& p) { return p(1, 1) <= 0.0; });
      case ValueSetKind::FullBlock: return max_eig(p_[0].bottomRightCorner(l_, l_)) <= 1e-12;
      case ValueSetKind::LmiRegion: return max_eig(p_[0].bottomRightCorner(nu_, nu_)) <= 1e-12;
    }
    return false;
  }

  bool operator==(const ValueSet& o) const {
    return kind_ == o.kind_ && p_ == o.p_ && k_ == o.k_ && l_ == o.l_ && nu_ == o.nu_ &&
           parametric_ == o.parametric_;
  }

 private:
  ValueSet(ValueSetKind kind, std::vector<Matrix> ps, int k, int l, int nu, bool parametric)
      : kind_(kind), p_(std::move(ps)), k_(k), l_(l), nu_(nu), parametric_(parametric) {
    if (p_.empty()) throw Error(ErrorCode::DimensionMismatch, "value set needs at least one P block");
    if (k_ < 0 || l_ < 0) throw Error(ErrorCode::DimensionMismatch, "negative channel dimension");
    Eigen::Index expect = 2;
    if (kind_ == ValueSetKind::FullBlock) expect = k_ + l_;
    if (kind_ == ValueSetKind::LmiRegion) expect = 2 * nu_;
    for (const Matrix& p : p_) {
      if (p.rows() != expect || p.cols() != expect)
        throw Error(ErrorCode::DimensionMismatch, "P block must be " + std::to_string(expect) + "x" +
                                                      std::to_string(expect));
      if (!(p - p.transpose()).isZero(1e-12)) throw Error(ErrorCode::InvalidSignature, "P block is not symmetric");
    }
    if (!parametric_ && !sign_constraints_hold())
      throw Error(ErrorCode::InvalidSignature,
                  std::string(to_string(kind_)) + ": lower-right block must be negative semidefinite");
  }

  ValueSetKind kind_;
  std::vector<Matrix> p_;
  int k_;
  int l_;
  int nu_;
  bool parametric_;
};

/// [1; v]* P [1; v] for P ∈ 𝕊².
inline double scalar_form(const Matrix& p, Complex v) {
  return p(0, 0) + 2.0 * p(0, 1) * v.real() + p(1, 1) * std::norm(v);
}

/// Q + vS + v̄Sᵀ + |v|²R for an LMI-region matrix P₀ = [Q S; Sᵀ R].
inline CMatrix lmi_region_form(const Matrix& p0, int nu, Complex v) {
  const Matrix q = p0.topLeftCorner(nu, nu), s = p0.topRightCorner(nu, nu), r = p0.bottomRightCorner(nu, nu);
  return q.cast<Complex>() + v * s.cast<Complex>() + std::conj(v) * s.transpose().cast<Complex>() +
         std::norm(v) * r.cast<Complex>();
}

/// [I; V]* P₀ [I; V] for a full-block set.
inline CMatrix full_block_form(const Matrix& p0, int k, int l, const CMatrix& v) {
  CMatrix iv(k + l, k);
  iv << CMatrix::Identity(k, k), v;
  return iv.adjoint() * p0.cast<Complex>() * iv;
}

inline bool contains(const ValueSet& set, Complex v, double tol = kMembershipTol) {
  switch (set.kind()) {
    case ValueSetKind::RepeatedQuadratic: return scalar_form(set.p0(), v) >= -tol;
    case ValueSetKind::EquationConstrained:
      return scalar_form(set.p0(), v) >= -tol && std::abs(v.imag()) <= tol;
    case ValueSetKind::Intersection:
      return std::all_of(set.p_blocks().begin(), set.p_blocks().end(),
                         [&](const Matrix& p) { return scalar_form(p, v) >= -tol; });
    case ValueSetKind::LmiRegion: return min_eig(lmi_region_form(set.p0(), set.nu(), v)) >= -tol;
    case ValueSetKind::FullBlock: {
      const auto [k, l] = set.block_dims();
      if (k != 1 || l != 1) throw Error(ErrorCode::DimensionMismatch, "scalar point for a full-block set");
      return min_eig(full_block_form(set.p0(), 1, 1, CMatrix::Constant(1, 1, v))) >= -tol;
    }
  }
  return false;
}

inline bool contains(const ValueSet& set, const CMatrix& v, double tol = kMembershipTol) {
  const auto [k, l] = set.block_dims();
  if (set.kind() == ValueSetKind::FullBlock) {
    if (v.rows() != l || v.cols() != k) throw Error(ErrorCode::DimensionMismatch, "value point must be l x k");
    return min_eig(full_block_form(set.p0(), k, l, v)) >= -tol;
  }
  if (v.rows() == 1 && v.cols() == 1) return contains(set, v(0, 0), tol);
  if (v.rows() != k || v.cols() != k) throw Error(ErrorCode::DimensionMismatch, "value point must be k x k");
  const Complex s = v.diagonal().mean();
  if ((v - s * CMatrix::Identity(k, k)).cwiseAbs().maxCoeff() > tol) return false;
  return contains(set, s, tol);
}

/// Geometry of {v : [1;v]*P[1;v] ≥ 0} for P ∈ 𝕊².
struct ScalarRegion {
  enum class Shape { Disk, DiskComplement, HalfPlane, Plane, Empty };
  Shape shape = Shape::Plane;
  Complex center{};
  double radius = 0.0;
  double line_re = 0.0;      ///< boundary Re v = line_re for half-planes
  bool right_side = true;    ///< half-plane is Re v ≥ line_re

  /// Signed distance to the boundary, positive inside.
  double depth(Complex v) const {
    switch (shape) {
      case Shape::Disk: return radius - std::abs(v - center);
      case Shape::DiskComplement: return std::abs(v - center) - radius;
      case Shape::HalfPlane: return right_side ? v.real() - line_re : line_re - v.real();
      case Shape::Plane: return std::numeric_limits<double>::infinity();
      case Shape::Empty: return -std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }
};

inline ScalarRegion scalar_region(const Matrix& p) {
  const double q = p(0, 0), s = p(0, 1), r = p(1, 1);
  ScalarRegion g;
  if (r != 0.0) {
    // r|v + s/r|² = s²/r − q
    const double rhs = (s * s / r - q) / r;
    g.center = Complex(-s / r, 0.0);
    if (rhs < 0.0) {
      g.shape = r < 0.0 ? ScalarRegion::Shape::Empty : ScalarRegion::Shape::Plane;
    } else {
      g.radius = std::sqrt(rhs);
      g.shape = r < 0.0 ? ScalarRegion::Shape::Disk : ScalarRegion::Shape::DiskComplement;
    }
  } else if (s != 0.0) {
    g.shape = ScalarRegion::Shape::HalfPlane;
    g.line_re = -q / (2.0 * s);
    g.right_side = s > 0.0;
  } else {
    g.shape = q >= 0.0 ? ScalarRegion::Shape::Plane : ScalarRegion::Shape::Empty;
  }
  return g;
}

namespace detail {

inline std::vector<Complex> boundary_curve(const ScalarRegion& g, int count) {
  std::vector<Complex> out;
  const double pi = std::numbers::pi;
  if (g.shape == ScalarRegion::Shape::Disk || g.shape == ScalarRegion::Shape::DiskComplement) {
    for (int j = 0; j < count; ++j) out.push_back(g.center + std::polar(g.radius, 2.0 * pi * j / count));
  } else if (g.shape == ScalarRegion::Shape::HalfPlane) {
    for (int j = 0; j < count; ++j) out.emplace_back(g.line_re, std::tan(pi * (j + 0.5) / count - 0.5 * pi));
  }
  return out;
}

inline bool is_diagonal(const Matrix& m) { return (m - Matrix(m.diagonal().asDiagonal())).isZero(0.0); }

/// Splits an LMI region with diagonal Q, S, R into its ν scalar constraints.
inline std::optional<std::vector<Matrix>> diagonal_region_split(const Matrix& p0, int nu) {
  const Matrix q = p0.topLeftCorner(nu, nu), s = p0.topRightCorner(nu, nu), r = p0.bottomRightCorner(nu, nu);
  if (!is_diagonal(q) || !is_diagonal(s) || !is_diagonal(r)) return std::nullopt;
  std::vector<Matrix> ps;
  for (int i = 0; i < nu; ++i) {
    Matrix p(2, 2);
    p << q(i, i), s(i, i), s(i, i), r(i, i);
    ps.push_back(p);
  }
  return ps;
}

inline std::vector<Complex> clipped_union(const std::vector<Matrix>& ps, int count) {
  std::vector<Complex> out;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (Complex v : boundary_curve(scalar_region(ps[i]), count)) {
      bool keep = true;
      for (std::size_t j = 0; j < ps.size() && keep; ++j)
        if (j != i && scalar_form(ps[j], v) < -1e-12) keep = false;
      if (keep) out.push_back(v);
    }
  }
  return out;
}

/// Ray search from an interior point for general (convex) LMI regions.
inline std::vector<Complex> lmi_region_rays(const ValueSet& set, int count) {
  const int nu = set.nu();
  const double scale = 1.0 + set.p0().norm();
  auto depth = [&](Complex v) { return min_eig(lmi_region_form(set.p0(), nu, v)); };
  Complex best{};
  double best_depth = -std::numeric_limits<double>::infinity();
  const int grid = 81;
  for (int a = 0; a < grid; ++a)
    for (int b = 0; b < grid; ++b) {
      const Complex v(scale * (2.0 * a / (grid - 1) - 1.0), scale * (2.0 * b / (grid - 1) - 1.0));
      const double d = depth(v);
      if (d > best_depth) best_depth = d, best = v;
    }
  std::vector<Complex> out;
  if (best_depth <= 0.0) return out;
  const double far = 1e3 * scale;
  for (int j = 0; j < count; ++j) {
    const Complex dir = std::polar(1.0, 2.0 * std::numbers::pi * j / count);
    if (depth(best + far * dir) >= 0.0) continue;  // unbounded along this ray
    double lo = 0.0, hi = far;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * far; ++it) {
      const double mid = 0.5 * (lo + hi);
      (depth(best + mid * dir) >= 0.0 ? lo : hi) = mid;
    }
    out.push_back(best + lo * dir);
  }
  return out;
}

}  // namespace detail

/// Points on the boundary of the scalar value set, for plotting and sampling.
inline std::vector<Complex> boundary_samples(const ValueSet& set, int count) {
  if (count <= 0) throw Error(ErrorCode::DimensionMismatch, "boundary_samples: count must be positive");
  switch (set.kind()) {
    case ValueSetKind::FullBlock: throw Error(ErrorCode::Unsupported, "boundary_samples: full-block set");
    case ValueSetKind::RepeatedQuadratic: return detail::boundary_curve(scalar_region(set.p0()), count);
    case ValueSetKind::EquationConstrained: {
      // the set is a real segment/ray; report its end points
      std::vector<Complex> out;
      const ScalarRegion g = scalar_region(set.p0());
      if (g.shape == ScalarRegion::Shape::Disk) {
        out.push_back(g.center - g.radius);
        out.push_back(g.center + g.radius);
      } else if (g.shape == ScalarRegion::Shape::HalfPlane || g.shape == ScalarRegion::Shape::DiskComplement) {
        for (Complex v : detail::boundary_curve(g, count))
          if (std::abs(v.imag()) < 1e-12) out.push_back(v);
        if (g.shape == ScalarRegion::Shape::HalfPlane) out.emplace_back(g.line_re, 0.0);
      }
      return out;
    }
    case ValueSetKind::Intersection: return detail::clipped_union(set.p_blocks(), count);
    case ValueSetKind::LmiRegion: {
      if (set.nu() == 1) return detail::boundary_curve(scalar_region(set.p0()), count);
      if (auto split = detail::diagonal_region_split(set.p0(), set.nu())) return detail::clipped_union(*split, count);
      return detail::lmi_region_rays(set, count);
    }
  }
  return {};
}

inline ValueSet equivalent_intersection(const std::vector<Matrix>& ps, int k = 1, bool parametric = false) {
  return ValueSet::intersection(ps, k, parametric);
}

/// LMI-region description with diagonal Q, S, R of an intersection set.
inline ValueSet as_diagonal_lmi_region(const ValueSet& inter) {
  if (inter.kind() != ValueSetKind::Intersection)
    throw Error(ErrorCode::Unsupported, "as_diagonal_lmi_region needs an intersection set");
  const int nu = inter.nu();
  Matrix p0 = Matrix::Zero(2 * nu, 2 * nu);
  for (int i = 0; i < nu; ++i) {
    const Matrix& p = inter.p_blocks()[i];
    p0(i, i) = p(0, 0);
    p0(i, nu + i) = p0(nu + i, i) = p(0, 1);
    p0(nu + i, nu + i) = p(1, 1);
  }
  return ValueSet::lmi_region(p0, nu, inter.rep_dim(), inter.parametric());
}

/// Scalar points of the set on the real axis, taken from a uniform grid over [lo, hi].
inline std::vector<double> real_points_in_set(const ValueSet& set, double lo, double hi, int grid) {
  std::vector<double> out;
  for (int i = 0; i < grid; ++i) {
    const double x = lo + (hi - lo) * i / std::max(1, grid - 1);
    if (contains(set, Complex(x, 0.0))) out.push_back(x);
  }
  return out;
}

/// Bounding box {re_lo, re_hi, im_lo, im_hi} of a scalar set; unbounded sets are clipped to ±limit.
inline std::array<double, 4> scalar_bounding_box(const ValueSet& set, double limit = 10.0) {
  bool unbounded = false;
  for (int j = 0; j < 8 && !unbounded; ++j)
    unbounded = contains(set, std::polar(1e6, std::numbers::pi * j / 4.0));
  if (unbounded) return {-limit, limit, -limit, limit};
  const std::vector<Complex> pts = boundary_samples(set, 256);
  if (pts.empty()) return {-limit, limit, -limit, limit};
  std::array<double, 4> box{pts[0].real(), pts[0].real(), pts[0].imag(), pts[0].imag()};
  for (Complex v : pts) {
    box[0] = std::min(box[0], v.real());
    box[1] = std::max(box[1], v.real());
    box[2] = std::min(box[2], v.imag());
    box[3] = std::max(box[3], v.imag());
  }
  const double pad = 0.05 * std::max(box[1] - box[0], box[3] - box[2]) + 1e-9;
  return {box[0] - pad, box[1] + pad, box[2] - pad, box[3] + pad};
}

/// Uniform rejection samples from the scalar set (within its clipped bounding box).
inline std::vector<Complex> interior_samples(const ValueSet& set, int count, std::uint64_t seed) {
  const auto box = scalar_bounding_box(set);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ure(box[0], box[1]), uim(box[2], box[3]);
  std::vector<Complex> out;
  const bool real_only = set.kind() == ValueSetKind::EquationConstrained;
  for (int tries = 0; tries < 200 * count && static_cast<int>(out.size()) < count; ++tries) {
    const Complex v(ure(rng), real_only ? 0.0 : uim(rng));
    if (contains(set, v)) out.push_back(v);
  }
  return out;
}

}  // namespace iqc

#endif  // IQC_VALUE_SET_HPP
