#ifndef IQC_MULTIPLIER_HPP
#define IQC_MULTIPLIER_HPP

#include <optional>
#include <string>
#include <vector>

#include "iqc/sdp.hpp"
#include "iqc/value_set.hpp"

namespace iqc {

enum class FilterFamily { Repeated, SisoColumn, Raw };

inline const char* to_string(FilterFamily f) {
  switch (f) {
    case FilterFamily::Repeated: return "repeated";
    case FilterFamily::SisoColumn: return "siso_column";
    case FilterFamily::Raw: return "raw";
  }
  return "?";
}

inline FilterFamily filter_family_from_string(const std::string& s) {
  for (auto f : {FilterFamily::Repeated, FilterFamily::SisoColumn, FilterFamily::Raw})
    if (s == to_string(f)) return f;
  throw Error(ErrorCode::ParseError, "unknown filter family '" + s + "'");
}

/// Stable basis filter ψ with k inputs and m_ψ outputs.
struct BasisFilter {
  StateSpace psi;
  double alpha = 0.0;  ///< pole location (0 for raw filters)
  int order = 0;       ///< highest power of 1/(s+α) (0 for raw filters)
  FilterFamily family = FilterFamily::Repeated;

  Eigen::Index states() const { return psi.states(); }
  Eigen::Index outputs() const { return psi.outputs(); }
  Eigen::Index channels() const { return psi.inputs(); }

  /// Any realization with Hurwitz A is admissible.
  static BasisFilter raw(const StateSpace& psi) {
    if (!is_hurwitz(psi.a())) throw Error(ErrorCode::InvalidSignature, "filter A matrix must be Hurwitz");
    return BasisFilter{psi, 0.0, 0, FilterFamily::Raw};
  }

  bool operator==(const BasisFilter&) const = default;
};

/// ψ(s) = [1, 1/(s+α), …, 1/(s+α)^ν]ᵀ ⊗ I_k (repeated) or the same column with k = 1 (siso_column).
inline BasisFilter make_basis_filter(double alpha, int nu, int channel_dim, FilterFamily family) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidSignature, "filter pole alpha must be positive");
  if (nu < 0 || channel_dim < 0) throw Error(ErrorCode::DimensionMismatch, "negative filter order or channel count");
  if (family == FilterFamily::Raw) throw Error(ErrorCode::Unsupported, "raw filters are built with BasisFilter::raw");
  const int k = family == FilterFamily::SisoColumn ? 1 : channel_dim;
  Matrix a = Matrix::Zero(nu, nu);
  Matrix b = Matrix::Zero(nu, 1);
  Matrix c = Matrix::Zero(nu + 1, nu);
  Matrix d = Matrix::Zero(nu + 1, 1);
  d(0, 0) = 1.0;
  for (int j = 0; j < nu; ++j) {
    a(j, j) = -alpha;
    if (j > 0) a(j, j - 1) = 1.0;
    c(j + 1, j) = 1.0;
  }
  if (nu > 0) b(0, 0) = 1.0;
  const Matrix eye = Matrix::Identity(k, k);
  return BasisFilter{StateSpace(kron(a, eye), kron(b, eye), kron(c, eye), kron(d, eye)), alpha, nu, family};
}

enum class TestKind {
  StaticFullBlock,
  DynRepeated,
  DynFullBlock,
  DynIntersection,
  LmiRegionStatic,
  LmiRegionDynamic,
  EquationConstrained,
};

inline const char* to_string(TestKind k) {
  switch (k) {
    case TestKind::StaticFullBlock: return "StaticFullBlock";
    case TestKind::DynRepeated: return "DynRepeated";
    case TestKind::DynFullBlock: return "DynFullBlock";
    case TestKind::DynIntersection: return "DynIntersection";
    case TestKind::LmiRegionStatic: return "LmiRegionStatic";
    case TestKind::LmiRegionDynamic: return "LmiRegionDynamic";
    case TestKind::EquationConstrained: return "EquationConstrained";
  }
  return "?";
}

inline TestKind test_kind_from_string(const std::string& s) {
  for (auto k : {TestKind::StaticFullBlock, TestKind::DynRepeated, TestKind::DynFullBlock, TestKind::DynIntersection,
                 TestKind::LmiRegionStatic, TestKind::LmiRegionDynamic, TestKind::EquationConstrained})
    if (s == to_string(k)) return k;
  throw Error(ErrorCode::ParseError, "unknown test kind '" + s + "'");
}

inline bool is_static(TestKind k) { return k == TestKind::StaticFullBlock || k == TestKind::LmiRegionStatic; }

struct VariableShape {
  std::string name;
  VarKind kind = VarKind::Symmetric;
  int dim = 0;
  bool operator==(const VariableShape&) const = default;
};

/// Filter, value set and the resulting multiplier variable structure of one test.
struct MultiplierRecipe {
  TestKind test_kind = TestKind::DynRepeated;
  std::optional<BasisFilter> filter;
  ValueSet value_set = ValueSet::repeated(Matrix::Identity(2, 2) * 0.0, 1);
  std::vector<VariableShape> variable_shapes;
  std::vector<VariableShape> terminal_shapes;

  bool operator==(const MultiplierRecipe& o) const {
    return test_kind == o.test_kind && filter == o.filter && value_set == o.value_set &&
           variable_shapes == o.variable_shapes && terminal_shapes == o.terminal_shapes;
  }
};

namespace detail {

inline bool kind_matches_set(TestKind kind, ValueSetKind set) {
  switch (kind) {
    case TestKind::StaticFullBlock:
      return set == ValueSetKind::RepeatedQuadratic || set == ValueSetKind::FullBlock ||
             set == ValueSetKind::Intersection;
    case TestKind::DynRepeated: return set == ValueSetKind::RepeatedQuadratic;
    case TestKind::DynFullBlock: return set == ValueSetKind::FullBlock;
    case TestKind::DynIntersection: return set == ValueSetKind::Intersection;
    case TestKind::LmiRegionStatic:
    case TestKind::LmiRegionDynamic: return set == ValueSetKind::LmiRegion;
    case TestKind::EquationConstrained: return set == ValueSetKind::EquationConstrained;
  }
  return false;
}

/// ψ actually used by the builder; static kinds use the ν = 0 filter.
inline BasisFilter effective_filter(const MultiplierRecipe& r) {
  if (r.filter) return *r.filter;
  const bool full = r.value_set.kind() == ValueSetKind::FullBlock;
  return make_basis_filter(1.0, 0, full ? 1 : r.value_set.rep_dim(),
                           full ? FilterFamily::SisoColumn : FilterFamily::Repeated);
}

inline std::string indexed(const char* base, int i) { return std::string(base) + std::to_string(i + 1); }

}  // namespace detail

inline MultiplierRecipe make_recipe(TestKind kind, const ValueSet& set, std::optional<BasisFilter> filter = std::nullopt) {
  if (!detail::kind_matches_set(kind, set.kind()))
    throw Error(ErrorCode::UnsupportedCombination,
                std::string(to_string(kind)) + " does not apply to a " + to_string(set.kind()) + " value set");
  if (is_static(kind) && filter)
    throw Error(ErrorCode::UnsupportedCombination, "static tests take no filter");
  if (!is_static(kind) && !filter) throw Error(ErrorCode::StaticKind, "dynamic tests need a filter");

  MultiplierRecipe r;
  r.test_kind = kind;
  r.filter = std::move(filter);
  r.value_set = set;
  const BasisFilter f = detail::effective_filter(r);
  if (set.kind() == ValueSetKind::FullBlock) {
    if (f.channels() != 1) throw Error(ErrorCode::UnsupportedCombination, "full-block tests need a single-input filter");
  } else if (f.channels() != set.rep_dim()) {
    throw Error(ErrorCode::UnsupportedCombination, "filter channel count differs from the repetition dimension");
  }
  const int m = static_cast<int>(f.outputs());
  const int n = static_cast<int>(f.states());
  switch (set.kind()) {
    case ValueSetKind::RepeatedQuadratic:
    case ValueSetKind::FullBlock:
      r.variable_shapes = {{"M", VarKind::Symmetric, m}, {"Y", VarKind::Symmetric, n}};
      r.terminal_shapes = {{"Y", VarKind::Symmetric, n}};
      break;
    case ValueSetKind::Intersection:
      for (int i = 0; i < set.nu(); ++i) r.variable_shapes.push_back({detail::indexed("M", i), VarKind::Symmetric, m});
      for (int i = 0; i < set.nu(); ++i) {
        r.variable_shapes.push_back({detail::indexed("Y", i), VarKind::Symmetric, n});
        r.terminal_shapes.push_back({detail::indexed("Y", i), VarKind::Symmetric, n});
      }
      break;
    case ValueSetKind::LmiRegion:
      r.variable_shapes = {{"M", VarKind::Symmetric, set.nu() * m}, {"Y", VarKind::Symmetric, set.nu() * n}};
      r.terminal_shapes = {{"Y", VarKind::Symmetric, set.nu() * n}};
      break;
    case ValueSetKind::EquationConstrained:
      r.variable_shapes = {{"M", VarKind::Symmetric, m},
                           {"Y", VarKind::Symmetric, n},
                           {"N", VarKind::General, m},
                           {"Z", VarKind::Symmetric, n}};
      r.terminal_shapes = {{"Y", VarKind::Symmetric, n}, {"Z", VarKind::Symmetric, n}};
      break;
  }
  return r;
}

/// Ψ = diag(ψ, ψ), or diag(I_k ⊗ ψ, I_l ⊗ ψ) for full-block sets.
inline StateSpace outer_factor(const MultiplierRecipe& r) {
  if (!r.filter) throw Error(ErrorCode::StaticKind, std::string(to_string(r.test_kind)) + " has no filter");
  const StateSpace& psi = r.filter->psi;
  if (r.value_set.kind() == ValueSetKind::FullBlock) {
    const auto [k, l] = r.value_set.block_dims();
    return diag_join(kron_left(k, psi), kron_left(l, psi));
  }
  return diag_join(psi, psi);
}

/// Outer factor with static kinds mapped to the identity.
inline StateSpace effective_outer_factor(const MultiplierRecipe& r) {
  if (r.filter) return outer_factor(r);
  if (r.value_set.kind() == ValueSetKind::FullBlock) {
    const auto [k, l] = r.value_set.block_dims();
    return StateSpace::identity(k + l);
  }
  return StateSpace::identity(2 * r.value_set.rep_dim());
}

/// (I₂ ⊗ vec(I_ν) ⊗ I_k)ᵀ (P₀ ⊗ M) (I₂ ⊗ vec(I_ν) ⊗ I_k) with ν = dim P₀ / 2 and k = dim M / ν.
inline Matrix lmi_region_middle(const Matrix& p0, const Matrix& m) {
  if (p0.rows() != p0.cols() || p0.rows() % 2 != 0 || m.rows() != m.cols())
    throw Error(ErrorCode::DimensionMismatch, "lmi_region_middle: P0 must be 2nu x 2nu and M square");
  const Eigen::Index nu = p0.rows() / 2;
  if (nu == 0 || m.rows() % nu != 0) throw Error(ErrorCode::DimensionMismatch, "lmi_region_middle: dim M not a multiple of nu");
  const Eigen::Index k = m.rows() / nu;
  Matrix vec_i = Matrix::Zero(nu * nu, 1);
  for (Eigen::Index i = 0; i < nu; ++i) vec_i(i * nu + i, 0) = 1.0;
  const Matrix t = kron(kron(Matrix::Identity(2, 2), vec_i), Matrix::Identity(k, k));
  return t.transpose() * kron(p0, m) * t;
}

/// (•)ᵀ[0 Y; Y 0][I 0; A B] + (•)ᵀ M [C D] for the realization (A, B, C, D).
inline Matrix positivity_form(const StateSpace& psi, const Matrix& m, const Matrix& y) {
  const Eigen::Index n = psi.states(), k = psi.inputs();
  if (m.rows() != psi.outputs() || y.rows() != n)
    throw Error(ErrorCode::DimensionMismatch, "positivity_form: variable dimensions do not match the filter");
  Matrix top(n, n + k);
  top << Matrix::Identity(n, n), Matrix::Zero(n, k);
  Matrix bottom(n, n + k);
  bottom << psi.a(), psi.b();
  Matrix cd(psi.outputs(), n + k);
  cd << psi.c(), psi.d();
  const Matrix cross = top.transpose() * y * bottom;
  return cross + cross.transpose() + cd.transpose() * m * cd;
}

/// Filter realization seen by the positivity constraint of the recipe (ν-fold for LMI regions).
inline StateSpace positivity_filter(const MultiplierRecipe& r) {
  const BasisFilter f = detail::effective_filter(r);
  if (r.value_set.kind() == ValueSetKind::LmiRegion) return kron_left(r.value_set.nu(), f.psi);
  return f.psi;
}

struct PositivityConstraint {
  std::string label;
  BlockKind kind;
  MatrixExpr expr;
};

/// Multiplier positivity (and, for equation-constrained sets, the equality on (N, Z)).
inline std::vector<PositivityConstraint> positivity_constraints(const MultiplierRecipe& r) {
  const StateSpace psi = positivity_filter(r);
  std::vector<PositivityConstraint> out;
  if (r.value_set.kind() == ValueSetKind::Intersection) {
    for (int i = 0; i < r.value_set.nu(); ++i) {
      const std::string mi = detail::indexed("M", i), yi = detail::indexed("Y", i);
      out.push_back({"positivity_" + std::to_string(i + 1), BlockKind::Strict,
                     [psi, mi, yi](const VarValues& v) { return positivity_form(psi, v.at(mi), v.at(yi)); }});
    }
    return out;
  }
  out.push_back({"positivity", BlockKind::Strict,
                 [psi](const VarValues& v) { return positivity_form(psi, v.at("M"), v.at("Y")); }});
  if (r.value_set.kind() == ValueSetKind::EquationConstrained) {
    out.push_back({"equation", BlockKind::Equality, [psi](const VarValues& v) {
                     const Matrix& n = v.at("N");
                     return positivity_form(psi, n + n.transpose(), v.at("Z"));
                   }});
  }
  return out;
}

namespace detail {

inline const Matrix& lookup(const VarValues& vars, const std::string& name) {
  auto it = vars.find(name);
  if (it == vars.end()) throw Error(ErrorCode::MissingVariable, "missing variable '" + name + "'");
  return it->second;
}

}  // namespace detail

/// Constant middle matrix of the multiplier Π = Ψ* (middle) Ψ.
inline Matrix middle_matrix(const MultiplierRecipe& r, const VarValues& vars) {
  const ValueSet& set = r.value_set;
  switch (set.kind()) {
    case ValueSetKind::RepeatedQuadratic:
    case ValueSetKind::FullBlock: return kron(set.p0(), detail::lookup(vars, "M"));
    case ValueSetKind::Intersection: {
      Matrix out;
      for (int i = 0; i < set.nu(); ++i) {
        const Matrix term = kron(set.p_blocks()[i], detail::lookup(vars, detail::indexed("M", i)));
        out = i == 0 ? term : Matrix(out + term);
      }
      return out;
    }
    case ValueSetKind::LmiRegion: return lmi_region_middle(set.p0(), detail::lookup(vars, "M"));
    case ValueSetKind::EquationConstrained: {
      const Matrix& n = detail::lookup(vars, "N");
      const Eigen::Index m = n.rows();
      Matrix out = kron(set.p0(), detail::lookup(vars, "M"));
      out.topRightCorner(m, m) += n;
      out.bottomLeftCorner(m, m) += n.transpose();
      return out;
    }
  }
  return {};
}

/// Terminal cost matrix on the state of Ψ.
inline Matrix terminal_cost(const MultiplierRecipe& r, const VarValues& vars) {
  const ValueSet& set = r.value_set;
  switch (set.kind()) {
    case ValueSetKind::RepeatedQuadratic:
    case ValueSetKind::FullBlock: return kron(set.p0(), detail::lookup(vars, "Y"));
    case ValueSetKind::Intersection: {
      Matrix out;
      for (int i = 0; i < set.nu(); ++i) {
        const Matrix term = kron(set.p_blocks()[i], detail::lookup(vars, detail::indexed("Y", i)));
        out = i == 0 ? term : Matrix(out + term);
      }
      return out;
    }
    case ValueSetKind::LmiRegion: {
      const Matrix& y = detail::lookup(vars, "Y");
      if (y.rows() == 0) return Matrix(0, 0);
      return lmi_region_middle(set.p0(), y);
    }
    case ValueSetKind::EquationConstrained: {
      const Matrix& z = detail::lookup(vars, "Z");
      const Eigen::Index n = z.rows();
      Matrix out = kron(set.p0(), detail::lookup(vars, "Y"));
      out.topRightCorner(n, n) += 0.5 * z;
      out.bottomLeftCorner(n, n) += 0.5 * z.transpose();
      return out;
    }
  }
  return {};
}

}  // namespace iqc

#endif  // IQC_MULTIPLIER_HPP
