#ifndef IQC_SDP_HPP
#define IQC_SDP_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iqc/lti.hpp"

namespace iqc {

/// Relative strictness margin: strict blocks must satisfy F ⪰ margin·I with
/// margin = kStrictMarginScale · (1 + ‖F₀‖_F).
inline constexpr double kStrictMarginScale = 1e-7;

enum class VarKind { Symmetric, General };

struct VariableDecl {
  std::string name;
  VarKind kind = VarKind::Symmetric;
  int dim = 0;

  int scalar_count() const { return kind == VarKind::Symmetric ? dim * (dim + 1) / 2 : dim * dim; }
  bool operator==(const VariableDecl&) const = default;
};

using VarValues = std::map<std::string, Matrix>;

enum class BlockKind {
  Strict,     ///< F(y) ⪰ margin·I
  NonStrict,  ///< F(y) ⪰ 0
  Equality,   ///< F(y) = 0
  Check,      ///< implied by the other blocks; evaluated but not handed to the solver
};

inline const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::Strict: return "strict";
    case BlockKind::NonStrict: return "nonstrict";
    case BlockKind::Equality: return "equality";
    case BlockKind::Check: return "check";
  }
  return "?";
}

inline BlockKind block_kind_from_string(const std::string& s) {
  for (auto k : {BlockKind::Strict, BlockKind::NonStrict, BlockKind::Equality, BlockKind::Check})
    if (s == to_string(k)) return k;
  throw Error(ErrorCode::ParseError, "unknown block kind '" + s + "'");
}

/// Affine symmetric matrix expression F₀ + Σᵢ yᵢ Fᵢ over the scalar coordinates y.
struct LmiBlock {
  std::string label;
  BlockKind kind = BlockKind::Strict;
  Matrix constant;
  std::vector<std::pair<int, Matrix>> terms;  ///< (scalar index, coefficient), ascending index

  Eigen::Index size() const { return constant.rows(); }

  double margin() const {
    return kind == BlockKind::Strict ? kStrictMarginScale * (1.0 + constant.norm()) : 0.0;
  }

  Matrix evaluate(const Vector& y) const {
    Matrix out = constant;
    for (const auto& [i, f] : terms) out += y(i) * f;
    return out;
  }

  bool operator==(const LmiBlock&) const = default;
};

struct SdpProblem {
  std::vector<VariableDecl> variables;
  std::vector<LmiBlock> blocks;
  std::optional<Vector> objective;  ///< minimize objectiveᵀ y when present
  std::map<std::string, std::string> metadata;

  int scalar_count() const {
    int n = 0;
    for (const auto& v : variables) n += v.scalar_count();
    return n;
  }

  int offset(const std::string& name) const {
    int n = 0;
    for (const auto& v : variables) {
      if (v.name == name) return n;
      n += v.scalar_count();
    }
    throw Error(ErrorCode::MissingVariable, "no variable named '" + name + "'");
  }

  const VariableDecl& variable(const std::string& name) const {
    for (const auto& v : variables)
      if (v.name == name) return v;
    throw Error(ErrorCode::MissingVariable, "no variable named '" + name + "'");
  }

  const LmiBlock& block(const std::string& label) const {
    for (const auto& b : blocks)
      if (b.label == label) return b;
    throw Error(ErrorCode::MissingVariable, "no block labelled '" + label + "'");
  }

  bool has_block(const std::string& label) const {
    for (const auto& b : blocks)
      if (b.label == label) return true;
    return false;
  }

  /// Symmetric variables are vectorized column-major over the upper triangle.
  Vector pack(const VarValues& values) const {
    Vector y(scalar_count());
    int at = 0;
    for (const auto& v : variables) {
      auto it = values.find(v.name);
      if (it == values.end()) throw Error(ErrorCode::MissingVariable, "missing value for '" + v.name + "'");
      const Matrix& m = it->second;
      if (m.rows() != v.dim || m.cols() != v.dim)
        throw Error(ErrorCode::DimensionMismatch, "value for '" + v.name + "' has wrong shape");
      for (int j = 0; j < v.dim; ++j)
        for (int i = 0; i < (v.kind == VarKind::Symmetric ? j + 1 : v.dim); ++i) y(at++) = m(i, j);
    }
    return y;
  }

  VarValues unpack(const Vector& y) const {
    if (y.size() != scalar_count()) throw Error(ErrorCode::DimensionMismatch, "unpack: wrong vector length");
    VarValues out;
    int at = 0;
    for (const auto& v : variables) {
      Matrix m = Matrix::Zero(v.dim, v.dim);
      for (int j = 0; j < v.dim; ++j)
        for (int i = 0; i < (v.kind == VarKind::Symmetric ? j + 1 : v.dim); ++i) {
          m(i, j) = y(at++);
          if (v.kind == VarKind::Symmetric) m(j, i) = m(i, j);
        }
      out.emplace(v.name, std::move(m));
    }
    return out;
  }

  bool operator==(const SdpProblem&) const = default;
};

using MatrixExpr = std::function<Matrix(const VarValues&)>;

/// Turns affine matrix-valued functions of named matrix variables into LmiBlocks
/// by evaluating them on the canonical basis of the variable space.
class ProblemBuilder {
 public:
  /// Zero-dimensional variables are accepted and silently dropped.
  void add_variable(const std::string& name, VarKind kind, int dim) {
    if (dim < 0) throw Error(ErrorCode::DimensionMismatch, "negative variable dimension");
    for (const auto& v : problem_.variables)
      if (v.name == name) throw Error(ErrorCode::DimensionMismatch, "duplicate variable '" + name + "'");
    if (dim == 0) {
      empty_.emplace(name, Matrix(0, 0));
      return;
    }
    problem_.variables.push_back({name, kind, dim});
  }

  bool has_variable(const std::string& name) const {
    for (const auto& v : problem_.variables)
      if (v.name == name) return true;
    return empty_.count(name) > 0;
  }

  void add_block(const std::string& label, BlockKind kind, const MatrixExpr& expr) {
    VarValues probe = zero_values();
    const Matrix constant = sym(expr(probe));
    LmiBlock block{label, kind, constant, {}};
    int index = 0;
    for (const auto& v : problem_.variables) {
      Matrix& slot = probe.at(v.name);
      for (int j = 0; j < v.dim; ++j)
        for (int i = 0; i < (v.kind == VarKind::Symmetric ? j + 1 : v.dim); ++i) {
          slot(i, j) = 1.0;
          if (v.kind == VarKind::Symmetric) slot(j, i) = 1.0;
          Matrix coeff = sym(expr(probe)) - constant;
          if (coeff.rows() != constant.rows())
            throw Error(ErrorCode::DimensionMismatch, "block '" + label + "' changes size");
          if (!coeff.isZero(0.0)) block.terms.emplace_back(index, std::move(coeff));
          slot(i, j) = 0.0;
          slot(j, i) = 0.0;
          ++index;
        }
    }
    problem_.blocks.push_back(std::move(block));
  }

  void set_objective(const std::function<double(const VarValues&)>& f) {
    VarValues probe = zero_values();
    const double c0 = f(probe);
    Vector c = Vector::Zero(problem_.scalar_count());
    int index = 0;
    for (const auto& v : problem_.variables) {
      Matrix& slot = probe.at(v.name);
      for (int j = 0; j < v.dim; ++j)
        for (int i = 0; i < (v.kind == VarKind::Symmetric ? j + 1 : v.dim); ++i) {
          slot(i, j) = 1.0;
          if (v.kind == VarKind::Symmetric) slot(j, i) = 1.0;
          c(index++) = f(probe) - c0;
          slot(i, j) = 0.0;
          slot(j, i) = 0.0;
        }
    }
    problem_.objective = c;
  }

  void set_metadata(const std::string& key, const std::string& value) { problem_.metadata[key] = value; }

  const SdpProblem& problem() const { return problem_; }
  SdpProblem build() const { return problem_; }

 private:
  VarValues zero_values() const {
    VarValues values = empty_;
    for (const auto& v : problem_.variables) values.emplace(v.name, Matrix::Zero(v.dim, v.dim));
    return values;
  }

  SdpProblem problem_;
  VarValues empty_;
};

}  // namespace iqc

#endif  // IQC_SDP_HPP
