#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "iqc/netexample.hpp"

namespace fs = std::filesystem;
using namespace iqc;

namespace {

constexpr int kCertified = 0;
constexpr int kError = 1;
constexpr int kNotCertified = 2;

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path.string());
  out << text;
}

struct ExampleArgs {
  int nu = 1;
  double alpha = 2.0;
  std::string test = "DynIntersection";
  std::string out = "out";
  int samples = 200;
  std::uint64_t seed = 0;
};

int run_example_command(const ExampleArgs& a) {
  ExampleConfig cfg;
  cfg.nu = a.nu;
  cfg.alpha = a.alpha;
  cfg.test_kind = test_kind_from_string(a.test);
  cfg.cloud_samples = a.samples;
  cfg.seed = a.seed;
  const ExampleReport rep = run_example(cfg);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_text(dir / "report.json", to_json(rep).dump(2) + "\n");
  write_text(dir / "eigenvalues.csv", cloud_csv(rep.cloud));
  write_text(dir / "boundary.csv", boundary_csv(rep.boundary));
  write_text(dir / "problem.dat-s", export_sdpa(rep.problem));
  write_text(dir / "certificate.json", to_json(rep.certificate).dump(2) + "\n");

  std::cout << "status: " << to_string(rep.solution.status) << "\n";
  std::cout << "certified: " << (rep.certified() ? "yes" : "no") << "\n";
  if (rep.gamma) std::cout << "gamma: " << *rep.gamma << "\n";
  std::cout << "covering: " << (rep.covering_ok ? "all eigenvalues inside" : "eigenvalues outside the set") << "\n";
  std::cout << "output: " << dir.string() << "\n";
  return rep.certified() ? kCertified : kNotCertified;
}

struct AnalyzeArgs {
  std::string plant, set, recipe, out;
  int fdi_deltas = 10;
  std::uint64_t seed = 0;
};

int run_analyze_command(const AnalyzeArgs& a) {
  const Plant plant = plant_from_json(read_json(a.plant));
  const MultiplierRecipe given = recipe_from_json(read_json(a.recipe));
  const ValueSet set = a.set.empty() ? given.value_set : value_set_from_json(read_json(a.set));
  const MultiplierRecipe recipe = make_recipe(given.test_kind, set, given.filter);

  SdpProblem problem = is_static(recipe.test_kind) ? build_static(plant, recipe.value_set) : build_dynamic(plant, recipe);
  if (plant.perf) problem = add_performance(problem, plant);
  const SdpSolution sol = solve(problem);
  const Certificate cert = make_certificate(problem, sol);

  double fdi = std::numeric_limits<double>::infinity();
  int checked = 0;
  if (cert.certified) {
    for (const StateSpace& d : sample_in_set_deltas(set, a.fdi_deltas, a.seed, default_delta_class(set))) {
      fdi = std::min(fdi, check_fdi(cert, recipe, d).worst_eig);
      ++checked;
    }
  }
  const bool ok = cert.certified && (checked == 0 || fdi >= -kFdiTol);

  Json j;
  j["status"] = to_string(sol.status);
  j["certified"] = ok;
  j["gamma"] = cert.gamma ? Json(*cert.gamma) : Json(nullptr);
  j["fdi"] = {{"deltas_checked", checked}, {"worst_min_eig", checked ? Json(fdi) : Json(nullptr)}};
  j["residuals"] = to_json(cert.solver_report.residuals);
  j["diagnostics"] = sol.diagnostics;
  std::cout << j.dump(2) << "\n";
  if (!a.out.empty()) write_text(a.out, to_json(cert).dump(2) + "\n");
  return ok ? kCertified : kNotCertified;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust stability and performance analysis with dynamic multipliers"};
  app.require_subcommand(1);

  ExampleArgs ex;
  auto* example = app.add_subcommand("example", "Run the cyclic network example and write report and plot data");
  example->add_option("--nu", ex.nu, "Basis filter order")->check(CLI::NonNegativeNumber);
  example->add_option("--alpha", ex.alpha, "Basis filter pole")->check(CLI::PositiveNumber);
  example->add_option("--test", ex.test, "Test kind (DynIntersection, StaticFullBlock, LmiRegionDynamic, ...)");
  example->add_option("--out", ex.out, "Output directory");
  example->add_option("--samples", ex.samples, "Random Laplacian instances")->check(CLI::PositiveNumber);
  example->add_option("--seed", ex.seed, "Random seed");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Analyze a plant against a value set with a multiplier recipe");
  analyze->add_option("--plant", an.plant, "Plant JSON")->required()->check(CLI::ExistingFile);
  analyze->add_option("--set", an.set, "Value set JSON, replaces the recipe's set")->check(CLI::ExistingFile);
  analyze->add_option("--recipe", an.recipe, "Recipe JSON")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", an.out, "Write the certificate JSON here");
  analyze->add_option("--fdi-deltas", an.fdi_deltas, "Sampled uncertainties for the frequency check")->check(CLI::NonNegativeNumber);
  analyze->add_option("--seed", an.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kError;
  }
  try {
    if (*example) return run_example_command(ex);
    return run_analyze_command(an);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
}
