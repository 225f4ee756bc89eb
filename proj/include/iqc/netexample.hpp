#ifndef IQC_NETEXAMPLE_HPP
#define IQC_NETEXAMPLE_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "iqc/sdpa_io.hpp"
#include "iqc/verify.hpp"

namespace iqc {

/// Subsystem of the cyclic network with uncertainty channel w → z and performance channel d → e.
inline Plant network_subsystem() {
  Matrix a(2, 2), b(2, 2), c(2, 2), d(2, 2);
  a << -13, -12, 1, 0;
  b << 10, 0, 0, 0;
  c << -10.1, -11.2, 1, 2;
  d << 10, 1, 0, 0;
  PerformanceChannel p;
  p.b2 = (Matrix(2, 1) << 1, 0).finished();
  p.c2 = (Matrix(1, 2) << 1, 0).finished();
  p.d12 = (Matrix(2, 1) << 0, 1).finished();
  p.d21 = Matrix::Zero(1, 2);
  p.d22 = Matrix::Zero(1, 1);
  return Plant(StateSpace(a, b, c, d), p);
}

/// {v : |v − 1| ≤ 1} ∩ {v : |v − 0.75| ≥ 0.75}, repeated over both channels; flagged parametric.
inline ValueSet network_value_set(int k = 2) {
  Matrix p1(2, 2), p2(2, 2);
  p1 << 0, 1, 1, -1;
  p2 << 0, -0.75, -0.75, 1;
  return equivalent_intersection({p1, p2}, k, true);
}

/// Disk-only covering {|v − 1| ≤ 1}.
inline ValueSet network_disk_set(int k = 2) {
  Matrix p1(2, 2);
  p1 << 0, 1, 1, -1;
  return ValueSet::repeated(p1, k, true);
}

struct CyclicNetwork {
  int n_agents = 20;
  double link_lo = 0.75;
  double link_hi = 1.0;
  Plant subsystem = network_subsystem();
};

/// ℒ(a) with a_{k,k+1} = links[k] (k < N) and a_{N,1} = links[N].
inline Matrix laplacian(const CyclicNetwork& net, const Vector& links) {
  const int n = net.n_agents;
  if (links.size() != n) throw Error(ErrorCode::DimensionMismatch, "laplacian: need one link weight per agent");
  for (Eigen::Index i = 0; i < links.size(); ++i)
    if (links(i) < net.link_lo - 1e-12 || links(i) > net.link_hi + 1e-12)
      throw Error(ErrorCode::LinkOutOfRange, "link " + std::to_string(i + 1) + " outside the admissible interval");
  Matrix l = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const int j = (k + 1) % n;
    l(k, j) -= links(k);
    l(k, k) += links(k);
  }
  return l;
}

struct CloudPoint {
  Complex value;
  int instance_id = 0;
};

/// Spectra of ℒ for the two corner cases (all lower, all upper) followed by `samples` random link vectors.
inline std::vector<CloudPoint> eigenvalue_cloud(const CyclicNetwork& net, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> link(net.link_lo, net.link_hi);
  std::vector<CloudPoint> out;
  auto add = [&](const Vector& links, int id) {
    Eigen::EigenSolver<Matrix> es(laplacian(net, links), false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back({es.eigenvalues()(i), id});
  };
  add(Vector::Constant(net.n_agents, net.link_lo), 0);
  add(Vector::Constant(net.n_agents, net.link_hi), 1);
  for (int s = 0; s < samples; ++s) {
    Vector links(net.n_agents);
    for (Eigen::Index i = 0; i < links.size(); ++i) links(i) = link(rng);
    add(links, s + 2);
  }
  return out;
}

inline Plant auxiliary_plant(const CyclicNetwork& net) { return net.subsystem; }

struct ExampleConfig {
  int nu = 1;
  double alpha = 2.0;
  TestKind test_kind = TestKind::DynIntersection;
  int cloud_samples = 200;
  std::uint64_t seed = 0;
  int fdi_deltas = 10;
  int boundary_points = 400;
};

struct ExampleReport {
  ExampleConfig config;
  MultiplierRecipe recipe;
  SdpProblem problem;
  SdpSolution solution;
  Certificate certificate;
  std::optional<double> gamma;  ///< rounded to three decimals; present only when certified
  std::optional<double> gamma_raw;
  double fdi_worst = std::numeric_limits<double>::infinity();
  int fdi_deltas_checked = 0;
  double wellposedness_min_det = 0.0;
  bool covering_ok = true;
  std::vector<CloudPoint> cloud;
  std::vector<Complex> boundary;
  double solve_seconds = 0.0;
  bool certified() const { return certificate.certified && fdi_worst >= -kFdiTol; }
};

inline double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

/// Builds, solves and verifies the network example for one multiplier configuration.
inline ExampleReport run_example(const ExampleConfig& cfg, const CyclicNetwork& net = {}) {
  ExampleReport rep;
  rep.config = cfg;
  const Plant plant = auxiliary_plant(net);
  const int k = static_cast<int>(plant.z_dim());
  const ValueSet inter = network_value_set(k);
  auto filter = [&] { return make_basis_filter(cfg.alpha, cfg.nu, k, FilterFamily::Repeated); };
  switch (cfg.test_kind) {
    case TestKind::DynIntersection: rep.recipe = make_recipe(cfg.test_kind, inter, filter()); break;
    case TestKind::LmiRegionDynamic:
      rep.recipe = make_recipe(cfg.test_kind, as_diagonal_lmi_region(inter), filter());
      break;
    case TestKind::StaticFullBlock: rep.recipe = make_recipe(cfg.test_kind, inter); break;
    case TestKind::LmiRegionStatic: rep.recipe = make_recipe(cfg.test_kind, as_diagonal_lmi_region(inter)); break;
    case TestKind::DynRepeated: rep.recipe = make_recipe(cfg.test_kind, network_disk_set(k), filter()); break;
    default:
      throw Error(ErrorCode::UnsupportedCombination,
                  std::string(to_string(cfg.test_kind)) + " does not apply to the network example");
  }
  const SdpProblem base = is_static(cfg.test_kind) ? build_static(plant, rep.recipe.value_set)
                                                   : build_dynamic(plant, rep.recipe);
  rep.problem = add_performance(base, plant);
  const auto t0 = std::chrono::steady_clock::now();
  rep.solution = solve(rep.problem);
  rep.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.certificate = make_certificate(rep.problem, rep.solution);

  if (rep.certificate.certified) {
    rep.fdi_worst = std::numeric_limits<double>::infinity();
    for (const StateSpace& delta : sample_in_set_deltas(inter, cfg.fdi_deltas, cfg.seed, DeltaClass::Dynamic)) {
      rep.fdi_worst = std::min(rep.fdi_worst, check_fdi(rep.certificate, rep.recipe, delta).worst_eig);
      ++rep.fdi_deltas_checked;
    }
    if (rep.certified() && rep.certificate.gamma) {
      rep.gamma_raw = rep.certificate.gamma;
      rep.gamma = round3(*rep.certificate.gamma);
    }
  }
  rep.wellposedness_min_det = check_wellposedness(plant, inter, 200, cfg.seed);
  rep.cloud = eigenvalue_cloud(net, cfg.cloud_samples, cfg.seed);
  for (const auto& p : rep.cloud) rep.covering_ok = rep.covering_ok && contains(inter, p.value, 1e-8);
  rep.boundary = boundary_samples(inter, cfg.boundary_points);
  return rep;
}

inline Json to_json(const ExampleReport& r) {
  Json j;
  j["config"] = {{"nu", r.config.nu},
                 {"alpha", r.config.alpha},
                 {"test_kind", to_string(r.config.test_kind)},
                 {"cloud_samples", r.config.cloud_samples},
                 {"seed", r.config.seed}};
  j["status"] = to_string(r.solution.status);
  j["certified"] = r.certified();
  j["gamma"] = r.gamma ? Json(*r.gamma) : Json(nullptr);
  j["gamma_unrounded"] = r.gamma_raw ? Json(*r.gamma_raw) : Json(nullptr);
  j["residuals"] = to_json(r.certificate.solver_report.residuals);
  j["fdi"] = {{"worst_min_eig", r.fdi_deltas_checked ? Json(r.fdi_worst) : Json(nullptr)},
              {"deltas_checked", r.fdi_deltas_checked},
              {"seed", r.config.seed}};
  j["wellposedness_min_abs_det"] = r.wellposedness_min_det;
  j["covering"] = {{"instances", r.config.cloud_samples + 2}, {"eigenvalues", r.cloud.size()}, {"all_inside", r.covering_ok}};
  j["solver"] = {{"diagnostics", r.solution.diagnostics}, {"iterations", r.solution.iterations}, {"seconds", r.solve_seconds}};
  j["recipe"] = to_json(r.recipe);
  return j;
}

inline std::string cloud_csv(const std::vector<CloudPoint>& cloud) {
  std::string out = "re,im,instance_id\n";
  for (const auto& p : cloud)
    out += detail::fmt17(p.value.real()) + "," + detail::fmt17(p.value.imag()) + "," + std::to_string(p.instance_id) + "\n";
  return out;
}

inline std::string boundary_csv(const std::vector<Complex>& pts) {
  std::string out = "re,im\n";
  for (Complex v : pts) out += detail::fmt17(v.real()) + "," + detail::fmt17(v.imag()) + "\n";
  return out;
}

}  // namespace iqc

#endif  // IQC_NETEXAMPLE_HPP
