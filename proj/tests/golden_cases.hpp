// Fixed objects whose serialized form is stored under tests/golden.
#ifndef IQC_TESTS_GOLDEN_CASES_HPP
#define IQC_TESTS_GOLDEN_CASES_HPP

#include <cstdlib>
#include <fstream>
#include <string>

#include "iqc/netexample.hpp"
#include "oracles.hpp"

namespace golden {

inline std::string path(const std::string& name) { return std::string(IQC_GOLDEN_DIR) + "/" + name; }

/// Returns the stored text; with IQC_UPDATE_GOLDEN=1 set, rewrites the file first.
inline std::string stored(const std::string& name, const std::string& fresh) {
  if (const char* up = std::getenv("IQC_UPDATE_GOLDEN"); up && std::string(up) == "1") {
    std::ofstream(path(name)) << fresh;
  }
  return oracle::read_file(path(name));
}

inline iqc::Plant plant() { return iqc::network_subsystem(); }
inline iqc::ValueSet value_set() { return iqc::network_value_set(); }
inline iqc::MultiplierRecipe recipe() {
  return iqc::make_recipe(iqc::TestKind::DynIntersection, value_set(),
                          iqc::make_basis_filter(2.0, 1, 2, iqc::FilterFamily::Repeated));
}

/// min x  s.t.  [[x, 1], [1, 1]] ⪰ 0
inline iqc::SdpProblem one_variable_problem() {
  iqc::ProblemBuilder b;
  b.add_variable("x", iqc::VarKind::Symmetric, 1);
  b.add_block("schur", iqc::BlockKind::NonStrict, [](const iqc::VarValues& v) {
    return (iqc::Matrix(2, 2) << v.at("x")(0, 0), 1.0, 1.0, 1.0).finished();
  });
  b.set_objective([](const iqc::VarValues& v) { return v.at("x")(0, 0); });
  return b.build();
}

/// Certificate of the scalar small-gain problem at a hand-picked feasible point.
inline iqc::Certificate certificate() {
  const iqc::Plant p(iqc::StateSpace(iqc::Matrix::Constant(1, 1, -1.0), iqc::Matrix::Ones(1, 1),
                                     iqc::Matrix::Ones(1, 1), iqc::Matrix::Zero(1, 1)));
  const iqc::ValueSet disk = iqc::ValueSet::repeated((iqc::Matrix(2, 2) << 0.25, 0, 0, -1).finished(), 1);
  const iqc::SdpProblem problem = iqc::build_static(p, disk);
  iqc::SdpSolution s;
  s.status = iqc::SolveStatus::Feasible;
  s.variables = {{"X", iqc::Matrix::Constant(1, 1, 1.0)}, {"M", iqc::Matrix::Constant(1, 1, 1.0)}};
  s.iterations = 0;
  s.diagnostics = "hand-picked point";
  return iqc::make_certificate(problem, s);
}

inline std::string dump(const iqc::Json& j) { return j.dump(2) + "\n"; }

}  // namespace golden

#endif  // IQC_TESTS_GOLDEN_CASES_HPP
