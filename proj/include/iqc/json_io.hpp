#ifndef IQC_JSON_IO_HPP
#define IQC_JSON_IO_HPP

#include <json.hpp>

#include "iqc/multiplier.hpp"
#include "iqc/plant.hpp"
#include "iqc/sdp.hpp"

namespace iqc {

using Json = nlohmann::json;

/// Row-major nested arrays; an r×0 matrix is r empty rows, a 0×c matrix is [].
inline Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j, Eigen::Index cols_if_empty = 0) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "matrix must be an array of rows");
  if (j.empty()) return Matrix(0, cols_if_empty);
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols)
      throw Error(ErrorCode::ParseError, "ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

inline Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Vector vector_from_json(const Json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

inline Json to_json(const StateSpace& s) {
  Json j;
  j["a"] = to_json(s.a());
  j["b"] = to_json(s.b());
  j["c"] = to_json(s.c());
  j["d"] = to_json(s.d());
  if (s.outputs() == 0 || s.inputs() == 0) j["dims"] = {s.states(), s.inputs(), s.outputs()};
  return j;
}

inline StateSpace state_space_from_json(const Json& j) {
  try {
    Eigen::Index n = static_cast<Eigen::Index>(j.at("a").size());
    Eigen::Index m = 0;
    if (j.contains("dims")) {
      n = j["dims"][0].get<Eigen::Index>();
      m = j["dims"][1].get<Eigen::Index>();
    } else {
      m = matrix_from_json(j.at("d")).cols();
    }
    return StateSpace(matrix_from_json(j.at("a"), n), matrix_from_json(j.at("b"), m),
                      matrix_from_json(j.at("c"), n), matrix_from_json(j.at("d"), m));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("state space: ") + e.what());
  }
}

inline Json to_json(const Plant& p) {
  Json j;
  j["sys"] = to_json(p.sys);
  if (p.perf) {
    j["perf"] = {{"b2", to_json(p.perf->b2)},
                 {"c2", to_json(p.perf->c2)},
                 {"d12", to_json(p.perf->d12)},
                 {"d21", to_json(p.perf->d21)},
                 {"d22", to_json(p.perf->d22)}};
  }
  return j;
}

inline Plant plant_from_json(const Json& j) {
  try {
    StateSpace sys = state_space_from_json(j.at("sys"));
    if (!j.contains("perf") || j["perf"].is_null()) return Plant(sys);
    const Json& q = j["perf"];
    PerformanceChannel perf;
    perf.d22 = matrix_from_json(q.at("d22"));
    const auto nd = perf.d22.cols();
    perf.b2 = matrix_from_json(q.at("b2"), nd);
    perf.c2 = matrix_from_json(q.at("c2"), sys.states());
    perf.d12 = matrix_from_json(q.at("d12"), nd);
    perf.d21 = matrix_from_json(q.at("d21"), sys.inputs());
    return Plant(sys, perf);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("plant: ") + e.what());
  }
}

inline Json to_json(const ValueSet& s) {
  Json ps = Json::array();
  for (const Matrix& p : s.p_blocks()) ps.push_back(to_json(p));
  const auto [k, l] = s.block_dims();
  return Json{{"kind", to_string(s.kind())}, {"p_blocks", ps},     {"rep_dim", s.rep_dim()},
              {"block_dims", {k, l}},        {"nu", s.nu()},        {"parametric", s.parametric()}};
}

inline ValueSet value_set_from_json(const Json& j) {
  try {
    const ValueSetKind kind = value_set_kind_from_string(j.at("kind").get<std::string>());
    std::vector<Matrix> ps;
    for (const Json& p : j.at("p_blocks")) ps.push_back(matrix_from_json(p));
    const int k = j.value("rep_dim", 1);
    const bool parametric = j.value("parametric", false);
    if (ps.empty()) throw Error(ErrorCode::ParseError, "value set without P blocks");
    switch (kind) {
      case ValueSetKind::RepeatedQuadratic: return ValueSet::repeated(ps[0], k, parametric);
      case ValueSetKind::FullBlock: {
        const Json& dims = j.at("block_dims");
        return ValueSet::full_block(ps[0], dims[0].get<int>(), dims[1].get<int>(), parametric);
      }
      case ValueSetKind::Intersection: return ValueSet::intersection(ps, k, parametric);
      case ValueSetKind::LmiRegion:
        return ValueSet::lmi_region(ps[0], j.value("nu", static_cast<int>(ps[0].rows() / 2)), k, parametric);
      case ValueSetKind::EquationConstrained: return ValueSet::equation_constrained(ps[0], k, parametric);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("value set: ") + e.what());
  }
  throw Error(ErrorCode::ParseError, "value set: unreachable");
}

inline Json to_json(const BasisFilter& f) {
  if (f.family == FilterFamily::Raw) return Json{{"family", "raw"}, {"psi", to_json(f.psi)}};
  return Json{{"alpha", f.alpha}, {"nu", f.order}, {"family", to_string(f.family)}, {"channel_dim", f.channels()}};
}

/// channel_dim defaults to the repetition dimension of the owning set.
inline BasisFilter filter_from_json(const Json& j, int default_channels) {
  try {
    const FilterFamily family = filter_family_from_string(j.value("family", std::string("repeated")));
    if (family == FilterFamily::Raw) return BasisFilter::raw(state_space_from_json(j.at("psi")));
    return make_basis_filter(j.at("alpha").get<double>(), j.at("nu").get<int>(),
                             j.value("channel_dim", default_channels), family);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("filter: ") + e.what());
  }
}

inline Json to_json(const MultiplierRecipe& r) {
  Json j{{"test_kind", to_string(r.test_kind)}, {"value_set", to_json(r.value_set)}};
  j["filter"] = r.filter ? to_json(*r.filter) : Json(nullptr);
  return j;
}

inline MultiplierRecipe recipe_from_json(const Json& j) {
  try {
    const TestKind kind = test_kind_from_string(j.at("test_kind").get<std::string>());
    const ValueSet set = value_set_from_json(j.at("value_set"));
    std::optional<BasisFilter> filter;
    if (j.contains("filter") && !j["filter"].is_null()) {
      const int channels = set.kind() == ValueSetKind::FullBlock ? 1 : set.rep_dim();
      filter = filter_from_json(j["filter"], channels);
    }
    return make_recipe(kind, set, filter);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("recipe: ") + e.what());
  }
}

inline Json to_json(const VarValues& vars) {
  Json j = Json::object();
  for (const auto& [name, m] : vars) j[name] = {{"rows", m.rows()}, {"cols", m.cols()}, {"value", to_json(m)}};
  return j;
}

inline VarValues var_values_from_json(const Json& j) {
  VarValues out;
  for (const auto& [name, entry] : j.items()) {
    Matrix m = matrix_from_json(entry.at("value"), entry.at("cols").get<Eigen::Index>());
    if (m.rows() == 0) m.resize(entry.at("rows").get<Eigen::Index>(), entry.at("cols").get<Eigen::Index>());
    out.emplace(name, std::move(m));
  }
  return out;
}

inline Json to_json(const SdpProblem& p) {
  Json vars = Json::array();
  for (const auto& v : p.variables)
    vars.push_back({{"name", v.name}, {"kind", v.kind == VarKind::Symmetric ? "symmetric" : "general"}, {"dim", v.dim}});
  Json blocks = Json::array();
  for (const auto& b : p.blocks) {
    Json terms = Json::array();
    for (const auto& [i, f] : b.terms) terms.push_back({{"index", i}, {"coeff", to_json(f)}});
    blocks.push_back({{"label", b.label}, {"kind", to_string(b.kind)}, {"constant", to_json(b.constant)}, {"terms", terms}});
  }
  Json j{{"variables", vars}, {"blocks", blocks}, {"metadata", p.metadata}};
  j["objective"] = p.objective ? to_json(*p.objective) : Json(nullptr);
  return j;
}

inline SdpProblem sdp_problem_from_json(const Json& j) {
  try {
    SdpProblem p;
    for (const Json& v : j.at("variables"))
      p.variables.push_back({v.at("name").get<std::string>(),
                             v.at("kind").get<std::string>() == "symmetric" ? VarKind::Symmetric : VarKind::General,
                             v.at("dim").get<int>()});
    for (const Json& b : j.at("blocks")) {
      LmiBlock block;
      block.label = b.at("label").get<std::string>();
      block.kind = block_kind_from_string(b.at("kind").get<std::string>());
      block.constant = matrix_from_json(b.at("constant"));
      for (const Json& t : b.at("terms")) block.terms.emplace_back(t.at("index").get<int>(), matrix_from_json(t.at("coeff")));
      p.blocks.push_back(std::move(block));
    }
    if (j.contains("objective") && !j["objective"].is_null()) p.objective = vector_from_json(j["objective"]);
    if (j.contains("metadata")) p.metadata = j["metadata"].get<std::map<std::string, std::string>>();
    return p;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("sdp problem: ") + e.what());
  }
}

}  // namespace iqc

#endif  // IQC_JSON_IO_HPP
