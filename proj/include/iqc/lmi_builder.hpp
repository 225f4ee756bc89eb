#ifndef IQC_LMI_BUILDER_HPP
#define IQC_LMI_BUILDER_HPP

#include <cmath>
#include <optional>
#include <string>

#include "iqc/json_io.hpp"
#include "iqc/multiplier.hpp"
#include "iqc/plant.hpp"
#include "iqc/sdp_solver.hpp"

namespace iqc {

inline constexpr const char* kPerformanceForm = "standard IQC performance extension (supply rate e'e - gamma^2 d'd)";

/// Left-hand side of the main dissipation inequality (required ≺ 0), columns ordered (ξ, x, w[, d]).
///
/// The expression reads X from "X", the middle matrix through `middle`, and γ² from "gamma_sq"
/// when `with_performance` is set.
inline MatrixExpr assemble_main_inequality(const Plant& plant, const StateSpace& psi_outer, MatrixExpr middle,
                                           bool with_performance = false) {
  const auto k = plant.z_dim(), l = plant.w_dim(), n = plant.states();
  if (psi_outer.inputs() != k + l)
    throw Error(ErrorCode::DimensionMismatch, "outer factor input dimension must equal dim z + dim w");
  if (with_performance && !plant.perf) throw Error(ErrorCode::NoPerformanceChannel, "plant has no performance channel");
  const auto nx = psi_outer.states();
  const auto nd = with_performance ? plant.d_dim() : 0;
  const auto ne = with_performance ? plant.e_dim() : 0;
  const auto cols = nx + n + l + nd;
  const Matrix& sa = plant.sys.a();
  const Matrix& sb = plant.sys.b();
  const Matrix& sc = plant.sys.c();
  const Matrix& sd = plant.sys.d();
  const Matrix bz = psi_outer.b().leftCols(k), bw = psi_outer.b().rightCols(l);
  const Matrix dz = psi_outer.d().leftCols(k), dw = psi_outer.d().rightCols(l);

  Matrix state = Matrix::Zero(nx + n, cols);
  state.leftCols(nx + n).setIdentity();
  Matrix deriv = Matrix::Zero(nx + n, cols);
  deriv.block(0, 0, nx, nx) = psi_outer.a();
  deriv.block(0, nx, nx, n) = bz * sc;
  deriv.block(0, nx + n, nx, l) = bz * sd + bw;
  deriv.block(nx, nx, n, n) = sa;
  deriv.block(nx, nx + n, n, l) = sb;
  Matrix out = Matrix::Zero(psi_outer.outputs(), cols);
  out.leftCols(nx) = psi_outer.c();
  out.block(0, nx, out.rows(), n) = dz * sc;
  out.block(0, nx + n, out.rows(), l) = dz * sd + dw;
  Matrix perf_out = Matrix::Zero(ne, cols);
  Matrix perf_in = Matrix::Zero(nd, cols);
  if (with_performance) {
    const PerformanceChannel& p = *plant.perf;
    deriv.block(0, nx + n + l, nx, nd) = bz * p.d12;
    deriv.block(nx, nx + n + l, n, nd) = p.b2;
    out.block(0, nx + n + l, out.rows(), nd) = dz * p.d12;
    perf_out.block(0, nx, ne, n) = p.c2;
    perf_out.block(0, nx + n, ne, l) = p.d21;
    perf_out.block(0, nx + n + l, ne, nd) = p.d22;
    perf_in.rightCols(nd).setIdentity();
  }
  const Matrix supply = perf_out.transpose() * perf_out;
  const Matrix disturbance = perf_in.transpose() * perf_in;

  return [=](const VarValues& v) -> Matrix {
    const Matrix cross = state.transpose() * v.at("X") * deriv;
    Matrix f = cross + cross.transpose() + out.transpose() * middle(v) * out;
    if (with_performance) f += supply - v.at("gamma_sq")(0, 0) * disturbance;
    return f;
  };
}

namespace detail {

inline SdpProblem assemble(const Plant& plant, const MultiplierRecipe& recipe, bool with_performance) {
  const ValueSet& set = recipe.value_set;
  if (set.kind() == ValueSetKind::FullBlock) {
    const auto [k, l] = set.block_dims();
    if (plant.z_dim() != k || plant.w_dim() != l)
      throw Error(ErrorCode::DimensionMismatch, "plant channel dimensions differ from the full-block set");
  } else if (plant.z_dim() != set.rep_dim() || plant.w_dim() != set.rep_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "plant channel dimensions differ from the repetition dimension");
  }
  if (with_performance && !plant.perf) throw Error(ErrorCode::NoPerformanceChannel, "plant has no performance channel");

  const StateSpace psi = effective_outer_factor(recipe);
  const auto n = plant.states(), nx = psi.states();
  ProblemBuilder b;
  b.add_variable("X", VarKind::Symmetric, static_cast<int>(nx + n));
  for (const auto& s : recipe.variable_shapes) b.add_variable(s.name, s.kind, s.dim);
  if (with_performance) b.add_variable("gamma_sq", VarKind::Symmetric, 1);

  for (const auto& c : positivity_constraints(recipe)) b.add_block(c.label, c.kind, c.expr);

  const MultiplierRecipe r = recipe;
  const MatrixExpr main = assemble_main_inequality(plant, psi, [r](const VarValues& v) { return middle_matrix(r, v); },
                                                   with_performance);
  b.add_block("main", BlockKind::Strict, [main](const VarValues& v) { return Matrix(-main(v)); });
  b.add_block("coupling", BlockKind::Strict, [r, n](const VarValues& v) {
    const Matrix t = terminal_cost(r, v);
    Matrix emb = Matrix::Zero(t.rows() + n, t.cols() + n);
    emb.topLeftCorner(t.rows(), t.cols()) = t;
    return Matrix(v.at("X") - emb);
  });

  if (is_static(recipe.test_kind) && set.sign_constraints_hold()) {
    const Eigen::Index l = set.kind() == ValueSetKind::FullBlock ? set.block_dims().second : set.rep_dim();
    b.add_block("sign", BlockKind::Check,
                [r, l](const VarValues& v) { return Matrix(-middle_matrix(r, v).bottomRightCorner(l, l)); });
  }

  if (with_performance) b.set_objective([](const VarValues& v) { return v.at("gamma_sq")(0, 0); });
  b.set_metadata("test_kind", to_string(recipe.test_kind));
  b.set_metadata("recipe", to_json(recipe).dump());
  b.set_metadata("performance", with_performance ? "1" : "0");
  if (with_performance) b.set_metadata("performance_form", kPerformanceForm);
  return b.build();
}

}  // namespace detail

/// Static multiplier test with Ψ = I: X ≻ 0, main inequality with P₀ ⊗ M, Σ Pᵢ ⊗ Mᵢ or P(P₀, M), M ≻ 0.
inline SdpProblem build_static(const Plant& plant, const ValueSet& set) {
  TestKind kind = TestKind::StaticFullBlock;
  switch (set.kind()) {
    case ValueSetKind::RepeatedQuadratic:
    case ValueSetKind::FullBlock:
    case ValueSetKind::Intersection: break;
    case ValueSetKind::LmiRegion: kind = TestKind::LmiRegionStatic; break;
    case ValueSetKind::EquationConstrained:
      throw Error(ErrorCode::UnsupportedSet, "equation-constrained sets need a dynamic recipe");
  }
  return detail::assemble(plant, make_recipe(kind, set), false);
}

inline SdpProblem build_dynamic(const Plant& plant, const MultiplierRecipe& recipe) {
  if (!recipe.filter) throw Error(ErrorCode::StaticKind, "build_dynamic needs a recipe with a filter");
  return detail::assemble(plant, recipe, false);
}

inline MultiplierRecipe recipe_of(const SdpProblem& problem) {
  auto it = problem.metadata.find("recipe");
  if (it == problem.metadata.end()) throw Error(ErrorCode::MissingVariable, "problem carries no recipe metadata");
  return recipe_from_json(Json::parse(it->second));
}

/// Re-assembles the problem with the d → e channel appended and γ² as objective.
inline SdpProblem add_performance(const SdpProblem& problem, const Plant& plant) {
  if (!plant.perf) throw Error(ErrorCode::NoPerformanceChannel, "plant has no performance channel");
  return detail::assemble(plant, recipe_of(problem), true);
}

struct SolverReport {
  SolveStatus status = SolveStatus::Failed;
  ResidualReport residuals;
  double max_primal_residual = 0.0;
  std::optional<double> objective_value;
  int iterations = 0;
  std::string diagnostics;
};

struct Certificate {
  TestKind test_kind = TestKind::DynRepeated;
  VarValues variables;
  std::optional<double> gamma;
  bool certified = false;
  SolverReport solver_report;
  std::map<std::string, std::string> metadata;
};

/// Binds a solution to its problem; certified only if the solver-independent residual check passes.
inline Certificate make_certificate(const SdpProblem& problem, const SdpSolution& solution, double tolerance = 1e-8) {
  Certificate c;
  const MultiplierRecipe recipe = recipe_of(problem);
  c.test_kind = recipe.test_kind;
  c.variables = solution.variables;
  for (const auto& s : recipe.variable_shapes)
    if (!c.variables.count(s.name)) c.variables.emplace(s.name, Matrix::Zero(s.dim, s.dim));
  c.solver_report.status = solution.status;
  c.solver_report.max_primal_residual = solution.max_primal_residual;
  c.solver_report.objective_value = solution.objective_value;
  c.solver_report.iterations = solution.iterations;
  c.solver_report.diagnostics = solution.diagnostics;
  bool complete = true;
  for (const auto& v : problem.variables) complete = complete && solution.variables.count(v.name);
  if (complete) c.solver_report.residuals = check_solution(problem, solution.variables, tolerance);
  c.certified = complete && solution.status == SolveStatus::Feasible && c.solver_report.residuals.passed;
  if (c.variables.count("gamma_sq")) c.gamma = std::sqrt(std::max(0.0, c.variables.at("gamma_sq")(0, 0)));
  c.metadata["recipe"] = problem.metadata.count("recipe") ? problem.metadata.at("recipe") : "";
  if (problem.metadata.count("performance_form")) c.metadata["performance_form"] = problem.metadata.at("performance_form");
  return c;
}

inline Json to_json(const ResidualReport& r) {
  Json blocks = Json::array();
  for (const auto& b : r.blocks)
    blocks.push_back({{"label", b.label},
                      {"kind", to_string(b.kind)},
                      {"min_eig", b.min_eig},
                      {"equality_norm", b.equality_norm},
                      {"required", b.required},
                      {"violation", b.violation},
                      {"passed", b.passed}});
  return Json{{"blocks", blocks}, {"max_violation", r.max_violation}, {"passed", r.passed}};
}

inline ResidualReport residual_report_from_json(const Json& j) {
  ResidualReport r;
  for (const Json& b : j.at("blocks"))
    r.blocks.push_back({b.at("label").get<std::string>(), block_kind_from_string(b.at("kind").get<std::string>()),
                        b.at("min_eig").get<double>(), b.at("equality_norm").get<double>(),
                        b.at("required").get<double>(), b.at("violation").get<double>(), b.at("passed").get<bool>()});
  r.max_violation = j.at("max_violation").get<double>();
  r.passed = j.at("passed").get<bool>();
  return r;
}

inline Json to_json(const Certificate& c) {
  Json report{{"status", to_string(c.solver_report.status)},
              {"residuals", to_json(c.solver_report.residuals)},
              {"max_primal_residual", c.solver_report.max_primal_residual},
              {"iterations", c.solver_report.iterations},
              {"diagnostics", c.solver_report.diagnostics}};
  report["objective_value"] = c.solver_report.objective_value ? Json(*c.solver_report.objective_value) : Json(nullptr);
  Json j{{"test_kind", to_string(c.test_kind)},
         {"variables", to_json(c.variables)},
         {"certified", c.certified},
         {"solver_report", report},
         {"metadata", c.metadata}};
  j["gamma"] = c.gamma ? Json(*c.gamma) : Json(nullptr);
  return j;
}

inline Certificate certificate_from_json(const Json& j) {
  try {
    Certificate c;
    c.test_kind = test_kind_from_string(j.at("test_kind").get<std::string>());
    c.variables = var_values_from_json(j.at("variables"));
    c.certified = j.at("certified").get<bool>();
    if (!j.at("gamma").is_null()) c.gamma = j["gamma"].get<double>();
    const Json& r = j.at("solver_report");
    c.solver_report.status = solve_status_from_string(r.at("status").get<std::string>());
    c.solver_report.residuals = residual_report_from_json(r.at("residuals"));
    c.solver_report.max_primal_residual = r.at("max_primal_residual").get<double>();
    c.solver_report.iterations = r.at("iterations").get<int>();
    c.solver_report.diagnostics = r.at("diagnostics").get<std::string>();
    if (!r.at("objective_value").is_null()) c.solver_report.objective_value = r["objective_value"].get<double>();
    c.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    return c;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("certificate: ") + e.what());
  }
}

}  // namespace iqc

#endif  // IQC_LMI_BUILDER_HPP
