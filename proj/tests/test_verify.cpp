#include <gtest/gtest.h>

#include "iqc/netexample.hpp"
#include "oracles.hpp"

using namespace iqc;

namespace {

Matrix p2(double q, double s, double r) { return (Matrix(2, 2) << q, s, s, r).finished(); }

const Matrix kUnitDisk = p2(1, 0, -1);

StateSpace gain(double v) { return StateSpace::gain(Matrix::Constant(1, 1, v)); }

StateSpace allpass(double a) {
  return StateSpace(Matrix::Constant(1, 1, -a), Matrix::Ones(1, 1), Matrix::Constant(1, 1, -2.0 * a), Matrix::Ones(1, 1));
}

Certificate hand_certificate(const VarValues& v) {
  Certificate c;
  c.variables = v;
  c.certified = true;
  return c;
}

MultiplierRecipe first_order_recipe(const Matrix& p0) {
  return make_recipe(TestKind::DynRepeated, ValueSet::repeated(p0, 1), make_basis_filter(1.0, 1, 1, FilterFamily::Repeated));
}

SampledSignal filtered_noise(Eigen::Index channels, double horizon, double dt, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(std::llround(horizon / dt)) + 1;
  SampledSignal s{dt, Matrix::Zero(channels, n)};
  Vector state = Vector::Zero(channels);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < channels; ++c) state(c) += dt * (-2.0 * state(c)) + std::sqrt(dt) * 2.0 * g(rng);
    s.values.col(i) = state;
  }
  return s;
}

// Certified DynRepeated test for ẋ = −x + w, z = x with |δ| ≤ 0.9, optionally with Y pinned to zero.
Certificate scalar_certificate(const MultiplierRecipe& r, bool vanishing_terminal) {
  const Plant plant(StateSpace(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1)));
  SdpProblem p = build_dynamic(plant, r);
  if (vanishing_terminal) {
    LmiBlock pin{"vanishing", BlockKind::Equality, Matrix::Zero(1, 1), {{p.offset("Y"), Matrix::Ones(1, 1)}}};
    p.blocks.push_back(pin);
  }
  return make_certificate(p, solve(p));
}

}  // namespace

TEST(CheckFdi, ZeroUncertainty) {
  const MultiplierRecipe r = first_order_recipe(kUnitDisk);
  const Matrix m = (Matrix(2, 2) << 2.0, 0.5, 0.5, 1.0).finished();
  const FdiReport rep = check_fdi(hand_certificate({{"M", m}, {"Y", Matrix::Zero(1, 1)}}), r, gain(0.0));
  EXPECT_GT(rep.worst_eig, 0.0);
  EXPECT_EQ(rep.points, 202);
  // equals ψ*Mψ at ω = 0 with ψ(0) = [1, 1]
  const FdiReport at0 = check_fdi(hand_certificate({{"M", m}, {"Y", Matrix::Zero(1, 1)}}), r, gain(0.0),
                                  {Frequency::finite(0.0)});
  EXPECT_NEAR(at0.worst_eig, 4.0, 1e-12);
}

TEST(CheckFdi, CenterOfDiskIsStrictlyInside) {
  const Matrix disk = p2(0, 1, -1);
  const MultiplierRecipe r = first_order_recipe(disk);
  const Matrix m = Matrix::Identity(2, 2);
  const FdiReport rep = check_fdi(hand_certificate({{"M", m}, {"Y", Matrix::Zero(1, 1)}}), r, gain(1.0));
  // form value 1 times ψ*ψ ≥ 1
  EXPECT_GE(rep.worst_eig, 1.0 - 1e-12);
}

TEST(CheckFdi, AllPassOnBoundary) {
  const MultiplierRecipe r = first_order_recipe(kUnitDisk);
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int i = 0; i < 5; ++i) {
    const FdiReport rep =
        check_fdi(hand_certificate({{"M", Matrix::Identity(2, 2)}, {"Y", Matrix::Zero(1, 1)}}), r, allpass(u(rng)));
    EXPECT_TRUE(rep.passed());
    EXPECT_LT(std::abs(rep.worst_eig), 1e-9);
  }
}

TEST(CheckFdi, MembershipViolation) {
  const MultiplierRecipe r = first_order_recipe(kUnitDisk);
  try {
    check_fdi(hand_certificate({{"M", Matrix::Identity(2, 2)}, {"Y", Matrix::Zero(1, 1)}}), r, gain(2.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MembershipViolation);
  }
}

TEST(CheckDissipation, ZeroUncertaintyNonnegative) {
  const MultiplierRecipe r = first_order_recipe(kUnitDisk);
  const Matrix m = (Matrix(2, 2) << 1.0, 0.2, 0.2, 0.5).finished();
  const DissipationReport rep =
      check_dissipation(hand_certificate({{"M", m}, {"Y", Matrix::Zero(1, 1)}}), r, gain(0.0), 3, 5.0, 1e-3, 7);
  EXPECT_GE(rep.worst_margin, -1e-12);
  EXPECT_EQ(rep.inputs_tested, 3);
  EXPECT_EQ(rep.seed, 7u);
  EXPECT_FALSE(rep.horizons.empty());
}

TEST(CheckDissipation, VanishingTerminalCost) {
  const MultiplierRecipe r = first_order_recipe(p2(0.81, 0, -1));
  const Certificate c = scalar_certificate(r, true);
  ASSERT_TRUE(c.certified);
  EXPECT_LT(c.variables.at("Y").norm(), 1e-8);
  for (const StateSpace& d : sample_in_set_deltas(r.value_set, 4, 41, DeltaClass::Dynamic)) {
    const DissipationReport rep = check_dissipation(c, r, d, 3, 10.0, 1e-3, 41);
    EXPECT_TRUE(rep.passed()) << rep.worst_margin;
  }
}

TEST(CheckDissipation, TerminalCostCertificate) {
  const MultiplierRecipe r = first_order_recipe(p2(0.81, 0, -1));
  const Certificate c = scalar_certificate(r, false);
  ASSERT_TRUE(c.certified);
  const auto deltas = sample_in_set_deltas(r.value_set, 4, 42, DeltaClass::Dynamic);
  ASSERT_EQ(deltas.size(), 4u);
  for (const StateSpace& d : deltas) EXPECT_TRUE(check_dissipation(c, r, d, 3, 10.0, 1e-3, 42).passed());
}

TEST(CheckDissipation, ParsevalConsistency) {
  // sinusoid through Ψ: long-horizon average of yᵀMy approaches ½ ψ(iω)*Mψ(iω) (unit amplitude)
  const double alpha = 1.0, w = 0.8, horizon = 50.0 / alpha * 4.0, dt = 1e-3;
  const MultiplierRecipe r = first_order_recipe(kUnitDisk);
  const Matrix m = (Matrix(2, 2) << 1.0, 0.3, 0.3, 2.0).finished();
  const auto n = static_cast<Eigen::Index>(horizon / dt) + 1;
  SampledSignal z{dt, Matrix::Zero(1, n)};
  for (Eigen::Index i = 0; i < n; ++i) z.values(0, i) = std::sin(w * dt * static_cast<double>(i));
  SimulationOptions opts;
  opts.output_weight = m;
  const Trajectory tr = simulate_trajectory(r.filter->psi, z, opts);
  const CMatrix g = eval_freq(r.filter->psi, w);
  const double freq_value = 0.5 * (g.adjoint() * m.cast<Complex>() * g)(0, 0).real();
  const double time_value = tr.quadratic(n - 1) / horizon;
  EXPECT_NEAR(time_value, freq_value, 1e-2 * freq_value);
}

TEST(KypWitness, StaticZero) {
  const KypWitness w = kyp_witness(gain(0.0), kUnitDisk);
  EXPECT_EQ(w.w_matrix.size(), 0);
  EXPECT_NEAR(w.residual, 1.0, 1e-12);
}

TEST(KypWitness, FirstOrderLowPass) {
  // feasible W for 0.9/(s+1): w² + 2w + 0.81 ≤ 0
  const StateSpace d(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1), Matrix::Constant(1, 1, 0.9), Matrix::Zero(1, 1));
  const KypWitness w = kyp_witness(d, kUnitDisk);
  const double root = std::sqrt(1.0 - 0.81);
  EXPECT_GE(w.residual, -1e-8);
  EXPECT_GE(w.w_matrix(0, 0), -1.0 - root - 1e-8);
  EXPECT_LE(w.w_matrix(0, 0), -1.0 + root + 1e-8);
}

TEST(KypWitness, BoundaryTouchingLowPass) {
  // 1/(s+1) reaches |δ| = 1 at ω = 0; the only witness is W = −1
  const StateSpace d(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1));
  const KypWitness w = kyp_witness(d, kUnitDisk);
  EXPECT_NEAR(w.w_matrix(0, 0), -1.0, 1e-5);
  EXPECT_LE(w.max_eig_w, 0.0);
}

TEST(KypWitness, OutsideSetThrows) {
  try {
    kyp_witness(gain(2.0), kUnitDisk);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InfeasibleWitness);
  }
  const StateSpace big(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1), Matrix::Constant(1, 1, 3.0), Matrix::Zero(1, 1));
  EXPECT_THROW(kyp_witness(big, kUnitDisk), Error);
}

TEST(KypWitness, NegativeSemidefiniteInsideSet) {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 6; ++i) {
    const StateSpace th = detail::unit_shape(rng);
    const StateSpace d(th.a(), th.b(), 0.7 * th.c(), 0.7 * th.d());
    const KypWitness w = kyp_witness(d, kUnitDisk);
    EXPECT_LE(w.max_eig_w, 1e-7) << i;
  }
}

TEST(CheckCommutation, StaticGainExact) {
  std::mt19937_64 rng(44);
  const StateSpace h(oracle::random_stable(3, rng), oracle::random_matrix(3, 3, rng), oracle::random_matrix(2, 3, rng),
                     oracle::random_matrix(2, 3, rng));
  const CommutationReport rep = check_commutation(gain(2.0), h, filtered_noise(3, 2.0, 1e-3, 1));
  EXPECT_EQ(rep.sup_error, 0.0);
}

TEST(CheckCommutation, DynamicPair) {
  std::mt19937_64 rng(45);
  const StateSpace g(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1));
  const StateSpace h(oracle::random_stable(3, rng), oracle::random_matrix(3, 3, rng), oracle::random_matrix(2, 3, rng),
                     oracle::random_matrix(2, 3, rng));
  const CommutationReport rep = check_commutation(g, h, filtered_noise(3, 10.0, 1e-3, 2));
  EXPECT_LE(rep.sup_error, 1e-5);
  EXPECT_GT(rep.scale, 1e-2);
}

TEST(CheckCommutation, StaticOperatorDynamicScalar) {
  std::mt19937_64 rng(46);
  const StateSpace g(Matrix::Constant(1, 1, -3.0), Matrix::Ones(1, 1), Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 0.5));
  const StateSpace h = StateSpace::gain(oracle::random_matrix(2, 3, rng));
  EXPECT_LE(check_commutation(g, h, filtered_noise(3, 10.0, 1e-3, 3)).sup_error, 1e-5);
}

TEST(CheckCommutation, ConvergesUnderRefinement) {
  std::mt19937_64 rng(47);
  const StateSpace g(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1));
  const StateSpace h(oracle::random_stable(2, rng), oracle::random_matrix(2, 1, rng), oracle::random_matrix(1, 2, rng),
                     Matrix::Zero(1, 1));
  const StateSpace left = compose_series(h, g), right = compose_series(g, h);
  const SampledSignal base = filtered_noise(1, 10.0, 0.04, 4);
  double prev_left = 0.0, prev_right = 0.0;
  for (int factor : {1, 2, 4}) {
    const SampledSignal in = hold(base, factor);
    const CommutationReport rep = check_commutation(g, h, in);
    // both orderings share Markov parameters, so RK4 reproduces the identity to rounding
    EXPECT_LE(rep.sup_error, 1e-12 * rep.scale);
    const double el = (simulate(left, in).values - oracle::zoh_response(left.a(), left.b(), left.c(), left.d(), in.values, in.dt))
                          .cwiseAbs().maxCoeff();
    const double er = (simulate(right, in).values - oracle::zoh_response(right.a(), right.b(), right.c(), right.d(), in.values, in.dt))
                          .cwiseAbs().maxCoeff();
    if (factor > 1) {
      EXPECT_GE(std::log2(prev_left / el), 3.0);
      EXPECT_GE(std::log2(prev_right / er), 3.0);
    }
    prev_left = el;
    prev_right = er;
  }
}

TEST(Ellipsoid, ZeroInitialState) {
  const MultiplierRecipe r = first_order_recipe(p2(0.81, 0, -1));
  const Certificate c = scalar_certificate(r, false);
  ASSERT_TRUE(c.certified);
  const Plant plant(StateSpace(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1)));
  const EllipsoidReport rep = check_ellipsoid_invariance(c, r, plant, gain(0.5), Vector::Zero(1), 5.0);
  EXPECT_TRUE(rep.holds);
  EXPECT_EQ(rep.rhs, 0.0);
  EXPECT_LE(rep.worst_excess, 0.0);
}

TEST(Ellipsoid, CertifiedScalarLoop) {
  const MultiplierRecipe r = first_order_recipe(p2(0.81, 0, -1));
  const Certificate c = scalar_certificate(r, false);
  const Plant plant(StateSpace(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1)));
  for (const StateSpace& d : sample_in_set_deltas(r.value_set, 3, 48, DeltaClass::Dynamic))
    EXPECT_TRUE(check_ellipsoid_invariance(c, r, plant, d, Vector::Ones(1), 10.0).holds);
  Certificate bad = c;
  const Matrix& x = c.variables.at("X");
  const Matrix emb = detail::embed_terminal(terminal_cost(r, c.variables), 1);
  bad.variables["X"] -= (min_eig(Matrix(x - emb)) + 0.5) * Matrix::Identity(x.rows(), x.cols());
  EXPECT_FALSE(check_ellipsoid_invariance(bad, r, plant, gain(0.5), Vector::Ones(1), 10.0).holds);
}

TEST(Wellposedness, Examples) {
  const Plant zero_d(StateSpace(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1)));
  EXPECT_DOUBLE_EQ(check_wellposedness(zero_d, ValueSet::repeated(kUnitDisk, 1), 50), 1.0);
  EXPECT_GT(check_wellposedness(network_subsystem(), network_value_set(), 200), 1e-3);
  const Plant unit_d(StateSpace(Matrix::Constant(2, 2, 0.0) - Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                                Matrix::Identity(2, 2), Matrix::Identity(2, 2)));
  EXPECT_LT(check_wellposedness(unit_d, ValueSet::repeated(p2(0, 1, -1), 2), 400), 1e-4);
}

TEST(SampleDeltas, InsideSetAndDeterministic) {
  const ValueSet set = network_value_set();
  const auto a = sample_in_set_deltas(set, 10, 5, DeltaClass::Dynamic);
  const auto b = sample_in_set_deltas(set, 10, 5, DeltaClass::Dynamic);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_TRUE(is_hurwitz(a[i].a()));
    for (const Frequency& w : default_fdi_grid()) EXPECT_TRUE(contains(set, eval_freq(a[i], w)));
  }
  EXPECT_EQ(default_delta_class(set), DeltaClass::RealConstant);
  for (const StateSpace& d : sample_in_set_deltas(set, 20, 6, DeltaClass::RealConstant)) {
    EXPECT_EQ(d.states(), 0);
    EXPECT_TRUE(contains(set, Complex(d.d()(0, 0), 0.0)));
  }
}
