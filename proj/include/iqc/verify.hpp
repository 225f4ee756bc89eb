#ifndef IQC_VERIFY_HPP
#define IQC_VERIFY_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "iqc/lmi_builder.hpp"

namespace iqc {

/// Absolute tolerance on simulated dissipation margins (unit-energy inputs).
inline constexpr double kDissipationTol = 1e-4;
inline constexpr double kFdiTol = 1e-7;

/// 200 log-spaced frequencies in [1e-3, 1e3] rad/s plus 0 and ∞.
inline std::vector<Frequency> default_fdi_grid(int count = 200, double lo = 1e-3, double hi = 1e3) {
  std::vector<Frequency> out{Frequency::finite(0.0)};
  for (int i = 0; i < count; ++i)
    out.push_back(Frequency::finite(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1))));
  out.push_back(Frequency::infinity());
  return out;
}

namespace detail {

/// Δ as a (k+l)-channel system: δ I_k for scalar sets, the supplied l×k system for full-block sets.
inline StateSpace uncertainty_operator(const ValueSet& set, const StateSpace& delta) {
  if (set.kind() == ValueSetKind::FullBlock) {
    const auto [k, l] = set.block_dims();
    if (delta.inputs() != k || delta.outputs() != l)
      throw Error(ErrorCode::DimensionMismatch, "full-block uncertainty must map k inputs to l outputs");
    return delta;
  }
  if (delta.inputs() != 1 || delta.outputs() != 1) throw Error(ErrorCode::DimensionMismatch, "scalar uncertainty must be SISO");
  return kron_left(set.rep_dim(), delta);
}

inline void require_membership(const ValueSet& set, const StateSpace& delta, const std::vector<Frequency>& grid,
                               double tol) {
  for (const Frequency& w : grid) {
    const CMatrix v = eval_freq(delta, w);
    if (!contains(set, v, tol))
      throw Error(ErrorCode::MembershipViolation,
                  "uncertainty leaves the value set at omega = " + (w.is_infinite() ? std::string("inf") : std::to_string(w.value())));
  }
}

inline Matrix embed_terminal(const Matrix& t, Eigen::Index n) {
  Matrix out = Matrix::Zero(t.rows() + n, t.cols() + n);
  out.topLeftCorner(t.rows(), t.cols()) = t;
  return out;
}

}  // namespace detail

struct FdiReport {
  double worst_eig = std::numeric_limits<double>::infinity();
  Frequency worst_omega = Frequency::finite(0.0);
  int points = 0;
  bool passed(double tol = kFdiTol) const { return worst_eig >= -tol; }
};

/// Smallest eigenvalue over the grid of [I; Δ(iω)]* Ψ(iω)* (middle) Ψ(iω) [I; Δ(iω)].
inline FdiReport check_fdi(const Certificate& cert, const MultiplierRecipe& recipe, const StateSpace& delta,
                           const std::vector<Frequency>& omegas = default_fdi_grid(), double membership_tol = 1e-8) {
  const ValueSet& set = recipe.value_set;
  const StateSpace op = detail::uncertainty_operator(set, delta);
  detail::require_membership(set, delta, omegas, membership_tol);
  const StateSpace psi = effective_outer_factor(recipe);
  const CMatrix mid = middle_matrix(recipe, cert.variables).cast<Complex>();
  const auto k = op.inputs();
  FdiReport rep;
  for (const Frequency& w : omegas) {
    CMatrix io(k + op.outputs(), k);
    io << CMatrix::Identity(k, k), eval_freq(op, w);
    const CMatrix v = eval_freq(psi, w) * io;
    const double e = k ? min_eig(CMatrix(v.adjoint() * mid * v)) : 0.0;
    if (e < rep.worst_eig) {
      rep.worst_eig = e;
      rep.worst_omega = w;
    }
    ++rep.points;
  }
  return rep;
}

struct DissipationReport {
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_time = 0.0;          ///< horizon T at which the worst margin occurred
  std::uint64_t worst_seed = 0;     ///< seed of the input that achieved it
  std::uint64_t seed = 0;           ///< base seed of the run
  std::vector<double> horizons;     ///< horizons T evaluated
  int inputs_tested = 0;
  bool passed(double tol = kDissipationTol) const { return worst_margin >= -tol; }
};

/// Random unit-energy test input: sinusoids plus low-pass noise, switched off at a random time.
inline SampledSignal dissipation_input(Eigen::Index channels, double horizon, double dt, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto samples = static_cast<Eigen::Index>(std::llround(horizon / dt)) + 1;
  SampledSignal s{dt, Matrix::Zero(channels, samples)};
  const double t_off = horizon * (0.3 + 0.6 * unit(rng));
  for (Eigen::Index c = 0; c < channels; ++c) {
    double amp[3], freq[3], phase[3];
    for (int j = 0; j < 3; ++j) {
      amp[j] = gauss(rng);
      freq[j] = 0.05 * std::pow(100.0, unit(rng));
      phase[j] = 2.0 * std::numbers::pi * unit(rng);
    }
    const double pole = 0.5 + 4.5 * unit(rng);
    const double noise_gain = unit(rng);
    double noise = 0.0;
    for (Eigen::Index i = 0; i < samples; ++i) {
      const double t = dt * static_cast<double>(i);
      noise += dt * pole * (-noise) + std::sqrt(dt) * pole * gauss(rng) * 0.3;
      double v = noise_gain * noise;
      for (int j = 0; j < 3; ++j) v += amp[j] * std::sin(freq[j] * t + phase[j]);
      s.values(c, i) = t <= t_off ? v : 0.0;
    }
  }
  const double energy = s.values.squaredNorm() * dt;
  if (energy > 0.0) s.values /= std::sqrt(energy);
  return s;
}

/// Simulates y = Ψ [z; Δ(z)] for random z and evaluates ∫₀ᵀ yᵀ(middle)y dt + ξ(T)ᵀ(terminal)ξ(T)
/// on every `stride`-th sample time T; the filter and uncertainty start at rest.
inline DissipationReport check_dissipation(const Certificate& cert, const MultiplierRecipe& recipe,
                                           const StateSpace& delta, int seeds, double horizon, double dt,
                                           std::uint64_t seed = 0, int stride = 10) {
  const ValueSet& set = recipe.value_set;
  const StateSpace op = detail::uncertainty_operator(set, delta);
  const StateSpace psi = effective_outer_factor(recipe);
  const Matrix mid = middle_matrix(recipe, cert.variables);
  const Matrix term = terminal_cost(recipe, cert.variables);
  const StateSpace chain = compose_series(psi, stack_outputs(StateSpace::identity(op.inputs()), op));
  const auto nx = psi.states();

  DissipationReport rep;
  rep.seed = seed;
  SimulationOptions opts;
  opts.output_weight = mid;
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t input_seed = seed * 1000003ULL + static_cast<std::uint64_t>(s);
    const SampledSignal z = dissipation_input(op.inputs(), horizon, dt, input_seed);
    const Trajectory tr = simulate_trajectory(chain, z, opts);
    for (Eigen::Index i = 0; i < z.samples(); i += stride) {
      const Vector xi = tr.states.col(i).head(nx);
      const double margin = tr.quadratic(i) + xi.dot(term * xi);
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.worst_time = dt * static_cast<double>(i);
        rep.worst_seed = input_seed;
      }
      if (s == 0) rep.horizons.push_back(dt * static_cast<double>(i));
    }
    ++rep.inputs_tested;
  }
  return rep;
}

struct KypWitness {
  Matrix w_matrix;
  double residual = 0.0;   ///< smallest eigenvalue of the witness inequality at W
  double max_eig_w = 0.0;  ///< largest eigenvalue of W (≤ 0 expected)
};

/// Finds W with (•)ᵀ[0 W; W 0][I 0; A_δ B_δ] + (•)ᵀ P₀ [0 I; C_δ D_δ] ⪰ 0 for a SISO δ.
inline KypWitness kyp_witness(const StateSpace& delta, const Matrix& p0, double tol = 1e-8) {
  if (delta.inputs() != 1 || delta.outputs() != 1) throw Error(ErrorCode::DimensionMismatch, "kyp_witness: delta must be SISO");
  if (p0.rows() != 2 || p0.cols() != 2) throw Error(ErrorCode::DimensionMismatch, "kyp_witness: P0 must be 2x2");
  if (!is_hurwitz(delta.a())) throw Error(ErrorCode::InvalidSignature, "kyp_witness: A_delta must be Hurwitz");
  const auto n = delta.states();
  Matrix top(n, n + 1), bottom(n, n + 1), outer(2, n + 1);
  top << Matrix::Identity(n, n), Matrix::Zero(n, 1);
  bottom << delta.a(), delta.b();
  outer << Matrix::Zero(1, n), Matrix::Ones(1, 1), delta.c(), delta.d();
  const Matrix fixed = outer.transpose() * p0 * outer;
  auto form = [=](const Matrix& w) -> Matrix {
    const Matrix cross = top.transpose() * w * bottom;
    return cross + cross.transpose() + fixed;
  };
  ProblemBuilder b;
  b.add_variable("W", VarKind::Symmetric, static_cast<int>(n));
  b.add_block("witness", BlockKind::NonStrict, [form](const VarValues& v) { return form(v.at("W")); });
  const SdpProblem problem = b.build();
  const SdpSolution sol = solve(problem);
  KypWitness wit;
  wit.w_matrix = n ? sol.variables.count("W") ? sol.variables.at("W") : Matrix::Zero(n, n) : Matrix(0, 0);
  wit.residual = min_eig(form(wit.w_matrix));
  wit.max_eig_w = n ? max_eig(wit.w_matrix) : 0.0;
  const bool missing = n > 0 && !sol.variables.count("W");
  if (missing || wit.residual < -tol)
    throw Error(ErrorCode::InfeasibleWitness, "no witness W exists: the frequency-domain inequality fails");
  return wit;
}

struct CommutationReport {
  double sup_error = 0.0;
  double scale = 0.0;  ///< sup-norm of the compared outputs
};

/// sup_t ‖(H ∘ g I_k)(w) − (g I_l ∘ H)(w)‖_∞ under identical ZOH input and step size.
inline CommutationReport check_commutation(const StateSpace& g, const StateSpace& h, const SampledSignal& input) {
  if (g.inputs() != 1 || g.outputs() != 1) throw Error(ErrorCode::DimensionMismatch, "check_commutation: g must be SISO");
  const StateSpace left = compose_series(h, kron_left(h.inputs(), g));
  const StateSpace right = compose_series(kron_left(h.outputs(), g), h);
  const SampledSignal y1 = simulate(left, input);
  const SampledSignal y2 = simulate(right, input);
  CommutationReport rep;
  rep.sup_error = y1.values.size() ? (y1.values - y2.values).cwiseAbs().maxCoeff() : 0.0;
  rep.scale = y1.values.size() ? y1.values.cwiseAbs().maxCoeff() : 0.0;
  return rep;
}

struct EllipsoidReport {
  bool holds = true;
  bool coupling_ok = true;          ///< X − diag(terminal, 0) ⪰ margin·I
  double coupling_min_eig = 0.0;
  double worst_excess = -std::numeric_limits<double>::infinity();  ///< max_t (lhs(t) − rhs) / max(rhs, tiny)
  double rhs = 0.0;
};

/// Simulates plant, uncertainty and filter from (ξ, x, x_δ) = (0, x0, 0) with w = Δ(z) and checks
/// [ξ; x]ᵀ(X − diag(terminal, 0))[ξ; x] ≤ [0; x0]ᵀ X [0; x0] at every sample.
inline EllipsoidReport check_ellipsoid_invariance(const Certificate& cert, const MultiplierRecipe& recipe,
                                                  const Plant& plant, const StateSpace& delta, const Vector& x0,
                                                  double horizon, double dt = 1e-3, double rel_tol = 1e-6) {
  const ValueSet& set = recipe.value_set;
  const StateSpace op = detail::uncertainty_operator(set, delta);
  const StateSpace psi = effective_outer_factor(recipe);
  const Matrix& x = cert.variables.at("X");
  const Matrix term = terminal_cost(recipe, cert.variables);
  const auto nx = psi.states(), n = plant.states(), nd = op.states();
  const auto k = plant.z_dim(), l = plant.w_dim();
  if (x0.size() != n) throw Error(ErrorCode::DimensionMismatch, "x0 must match the plant state");
  if (x.rows() != nx + n) throw Error(ErrorCode::DimensionMismatch, "certificate X does not match plant and filter");

  EllipsoidReport rep;
  const Matrix ell = x - detail::embed_terminal(term, n);
  rep.coupling_min_eig = min_eig(ell);
  rep.coupling_ok = rep.coupling_min_eig >= kStrictMarginScale * (1.0 + term.norm());

  // z = (I − D D_δ)⁻¹ (C x + D C_δ x_δ), w = C_δ x_δ + D_δ z
  const Matrix& sd = plant.sys.d();
  const Eigen::FullPivLU<Matrix> loop(Matrix::Identity(k, k) - sd * op.d());
  Matrix zmap(k, n + nd);
  zmap << loop.solve(plant.sys.c()), loop.solve(Matrix(sd * op.c()));
  Matrix wmap(l, n + nd);
  wmap << op.d() * zmap.leftCols(n), op.c() + op.d() * zmap.rightCols(nd);
  Matrix zw(k + l, n + nd);
  zw << zmap, wmap;
  const auto dim = nx + n + nd;
  Matrix f = Matrix::Zero(dim, dim);
  f.block(0, 0, nx, nx) = psi.a();
  f.block(0, nx, nx, n + nd) = psi.b() * zw;
  f.block(nx, nx, n, n) = plant.sys.a();
  f.block(nx, nx, n, n + nd) += plant.sys.b() * wmap;
  f.block(nx + n, nx + n, nd, nd) = op.a();
  f.block(nx + n, nx, nd, n + nd) += op.b() * zmap;

  const StateSpace closed(f, Matrix::Zero(dim, 1), Matrix::Identity(dim, dim), Matrix::Zero(dim, 1));
  const auto samples = static_cast<Eigen::Index>(std::llround(horizon / dt)) + 1;
  SimulationOptions opts;
  opts.x0 = Vector::Zero(dim);
  opts.x0.segment(nx, n) = x0;
  const Trajectory tr = simulate_trajectory(closed, SampledSignal{dt, Matrix::Zero(1, samples)}, opts);
  Vector start = Vector::Zero(nx + n);
  start.tail(n) = x0;
  rep.rhs = start.dot(x * start);
  const double floor = std::max(std::abs(rep.rhs), 1e-12);
  for (Eigen::Index i = 0; i < samples; ++i) {
    const Vector s = tr.states.col(i).head(nx + n);
    const double excess = (s.dot(ell * s) - rep.rhs) / floor;
    rep.worst_excess = std::max(rep.worst_excess, excess);
  }
  rep.holds = rep.coupling_ok && rep.worst_excess <= rel_tol;
  return rep;
}

/// min |det(I − D V)| over boundary, interior and real-axis samples of the set.
inline double check_wellposedness(const Plant& plant, const ValueSet& set, int samples, std::uint64_t seed = 0) {
  const Matrix& d = plant.sys.d();
  const auto k = plant.z_dim(), l = plant.w_dim();
  double worst = std::numeric_limits<double>::infinity();
  auto eval = [&](const CMatrix& v) {
    const CMatrix m = CMatrix::Identity(k, k) - d.cast<Complex>() * v;
    worst = std::min(worst, std::abs(k ? m.determinant() : Complex(1.0)));
  };
  if (set.kind() == ValueSetKind::FullBlock) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    int found = 0;
    for (int tries = 0; tries < 1000 * samples && found < samples; ++tries) {
      CMatrix v(l, k);
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(g(rng), g(rng));
      v *= std::pow(10.0, 2.0 * (static_cast<double>(tries % 7) / 6.0) - 1.0);
      if (!contains(set, v)) continue;
      eval(v);
      ++found;
    }
    eval(CMatrix::Zero(l, k));
    return worst;
  }
  auto scalar = [&](Complex v) {
    if (contains(set, v, 1e-8)) eval(v * CMatrix::Identity(k, k));
  };
  if (set.kind() != ValueSetKind::EquationConstrained)
    for (Complex v : boundary_samples(set, samples)) scalar(v);
  for (Complex v : interior_samples(set, samples, seed)) scalar(v);
  const auto box = scalar_bounding_box(set);
  for (double r : real_points_in_set(set, box[0], box[1], samples)) scalar(Complex(r, 0.0));
  return worst;
}

enum class DeltaClass { Dynamic, RealConstant };

/// Real constants for equation-constrained sets and for parametric sets whose sign requirement fails.
inline DeltaClass default_delta_class(const ValueSet& set) {
  if (set.kind() == ValueSetKind::EquationConstrained) return DeltaClass::RealConstant;
  if (set.parametric() && !set.sign_constraints_hold()) return DeltaClass::RealConstant;
  return DeltaClass::Dynamic;
}

namespace detail {

/// Stable SISO θ with sup |θ(iω)| = 1: low-pass, all-pass or normalized second-order resonance.
inline StateSpace unit_shape(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int which = static_cast<int>(unit(rng) * 3.0) % 3;
  const double a = std::pow(10.0, -1.0 + 2.0 * unit(rng));
  if (which == 0) return StateSpace(Matrix::Constant(1, 1, -a), Matrix::Constant(1, 1, a), Matrix::Ones(1, 1), Matrix::Zero(1, 1));
  if (which == 1)
    return StateSpace(Matrix::Constant(1, 1, -a), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, -2.0 * a),
                      Matrix::Ones(1, 1));
  const double zeta = 0.2 + 0.5 * unit(rng);
  const double peak = 1.0 / (2.0 * zeta * std::sqrt(1.0 - zeta * zeta));
  Matrix am(2, 2);
  am << 0.0, 1.0, -a * a, -2.0 * zeta * a;
  Matrix bm(2, 1);
  bm << 0.0, 1.0;
  Matrix cm(1, 2);
  cm << a * a / peak, 0.0;
  return StateSpace(am, bm, cm, Matrix::Zero(1, 1));
}

/// Real point of the set with the largest distance to the boundary (scalar sets).
inline std::pair<double, double> inscribed_real_disk(const ValueSet& set) {
  const auto box = scalar_bounding_box(set);
  const std::vector<Complex> edge = boundary_samples(set, 720);
  double best_c = 0.0, best_r = -1.0;
  for (double c : real_points_in_set(set, box[0], box[1], 801)) {
    double r = std::min(box[1] - box[0], box[3] - box[2]);
    for (Complex e : edge) r = std::min(r, std::abs(e - c));
    if (r > best_r) {
      best_r = r;
      best_c = c;
    }
  }
  return {best_c, std::max(best_r, 0.0)};
}

inline bool inside_on_grid(const ValueSet& set, const StateSpace& delta) {
  for (const Frequency& w : default_fdi_grid(400))
    if (!contains(set, eval_freq(delta, w))) return false;
  return true;
}

}  // namespace detail

/// Random uncertainties whose frequency response lies in the set on a dense grid (rejection sampling).
/// Dynamic samples are δ = c + βρθ(s) around the real point c with inscribed radius ρ; full-block
/// samples are V₀ + βθ(s)E around a constant V₀ in the set.
inline std::vector<StateSpace> sample_in_set_deltas(const ValueSet& set, int count, std::uint64_t seed,
                                                    DeltaClass cls) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<StateSpace> out;
  if (set.kind() == ValueSetKind::FullBlock) {
    const auto [k, l] = set.block_dims();
    std::normal_distribution<double> g(0.0, 1.0);
    for (int tries = 0; tries < 2000 * count && static_cast<int>(out.size()) < count; ++tries) {
      Matrix v0(l, k), e(l, k);
      for (Eigen::Index i = 0; i < v0.size(); ++i) {
        v0(i) = g(rng);
        e(i) = g(rng);
      }
      v0 *= unit(rng);
      if (!contains(set, CMatrix(v0.cast<Complex>()))) continue;
      if (cls == DeltaClass::RealConstant) {
        out.push_back(StateSpace::gain(v0));
        continue;
      }
      const StateSpace th = detail::unit_shape(rng);
      const double beta = 0.5 * unit(rng);
      const StateSpace thk = kron_left(k, th);
      const StateSpace dyn(thk.a(), thk.b(), beta * e * thk.c(), v0 + beta * e * thk.d());
      if (detail::inside_on_grid(set, dyn)) out.push_back(dyn);
    }
    return out;
  }
  if (cls == DeltaClass::RealConstant) {
    const auto box = scalar_bounding_box(set);
    const std::vector<double> pts = real_points_in_set(set, box[0], box[1], 2001);
    if (pts.empty()) return out;
    for (int i = 0; i < count; ++i) {
      const double v = pts[static_cast<std::size_t>(unit(rng) * static_cast<double>(pts.size())) % pts.size()];
      out.push_back(StateSpace::gain(Matrix::Constant(1, 1, v)));
    }
    return out;
  }
  const auto [c, rho] = detail::inscribed_real_disk(set);
  for (int tries = 0; tries < 50 * count && static_cast<int>(out.size()) < count; ++tries) {
    const StateSpace th = detail::unit_shape(rng);
    const double scale = (0.3 + 0.65 * unit(rng)) * rho * (unit(rng) < 0.5 ? -1.0 : 1.0);
    const StateSpace dyn(th.a(), th.b(), scale * th.c(), Matrix::Constant(1, 1, c) + scale * th.d());
    if (detail::inside_on_grid(set, dyn)) out.push_back(dyn);
  }
  return out;
}

}  // namespace iqc

#endif  // IQC_VERIFY_HPP
