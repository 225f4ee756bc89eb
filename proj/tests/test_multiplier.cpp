#include <gtest/gtest.h>

#include "iqc/multiplier.hpp"
#include "iqc/sdp_solver.hpp"
#include "oracles.hpp"

using namespace iqc;

namespace {

Matrix p2(double q, double s, double r) { return (Matrix(2, 2) << q, s, s, r).finished(); }

const Matrix kDisk = p2(0, 1, -1);

std::vector<double> log_grid(int n, double lo = -3.0, double hi = 3.0) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(std::pow(10.0, lo + (hi - lo) * i / (n - 1)));
  return out;
}

SdpProblem positivity_problem(const MultiplierRecipe& r) {
  ProblemBuilder b;
  for (const auto& v : r.variable_shapes) b.add_variable(v.name, v.kind, v.dim);
  for (const auto& c : positivity_constraints(r)) b.add_block(c.label, c.kind, c.expr);
  return b.build();
}

}  // namespace

TEST(MakeBasisFilter, StaticWhenOrderZero) {
  const BasisFilter f = make_basis_filter(2.0, 0, 3, FilterFamily::Repeated);
  EXPECT_EQ(f.states(), 0);
  EXPECT_EQ(f.psi.d(), Matrix::Identity(3, 3));
}

TEST(MakeBasisFilter, FirstOrderScalar) {
  const BasisFilter f = make_basis_filter(2.0, 1, 1, FilterFamily::Repeated);
  EXPECT_EQ(f.psi.a(), Matrix::Constant(1, 1, -2.0));
  EXPECT_EQ(f.psi.b(), Matrix::Ones(1, 1));
  EXPECT_EQ(f.psi.c(), (Matrix(2, 1) << 0, 1).finished());
  EXPECT_EQ(f.psi.d(), (Matrix(2, 1) << 1, 0).finished());
  const CMatrix g = eval_freq(f.psi, 0.0);
  EXPECT_NEAR(std::abs(g(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(g(1, 0) - 0.5), 0.0, 1e-15);
}

TEST(MakeBasisFilter, RepeatedTwoChannels) {
  const BasisFilter f = make_basis_filter(2.0, 1, 2, FilterFamily::Repeated);
  EXPECT_EQ(f.states(), 2);
  EXPECT_EQ(f.outputs(), 4);
  EXPECT_TRUE(is_hurwitz(f.psi.a()));
}

TEST(MakeBasisFilter, TransferMatchesPowers) {
  const double alpha = 1.5;
  const BasisFilter f = make_basis_filter(alpha, 3, 1, FilterFamily::SisoColumn);
  EXPECT_EQ(f.states(), 3);
  for (double w : {0.0, 0.4, 3.0}) {
    const CMatrix g = eval_freq(f.psi, w);
    for (int j = 0; j <= 3; ++j)
      EXPECT_LT(std::abs(g(j, 0) - std::pow(1.0 / Complex(alpha, w), j)), 1e-12);
  }
  EXPECT_THROW(make_basis_filter(0.0, 1, 1, FilterFamily::Repeated), Error);
}

TEST(OuterFactor, StateDimensions) {
  const MultiplierRecipe rep = make_recipe(TestKind::DynRepeated, ValueSet::repeated(kDisk, 2),
                                           make_basis_filter(2.0, 1, 2, FilterFamily::Repeated));
  EXPECT_EQ(outer_factor(rep).states(), 4);

  Matrix p0 = Matrix::Identity(3, 3);
  p0(2, 2) = -1.0;
  const MultiplierRecipe full = make_recipe(TestKind::DynFullBlock, ValueSet::full_block(p0, 2, 1),
                                            make_basis_filter(2.0, 1, 1, FilterFamily::SisoColumn));
  EXPECT_EQ(outer_factor(full).states(), 3);

  const MultiplierRecipe stat = make_recipe(TestKind::DynRepeated, ValueSet::repeated(kDisk, 1),
                                            make_basis_filter(2.0, 0, 1, FilterFamily::Repeated));
  const StateSpace psi = outer_factor(stat);
  EXPECT_EQ(psi.states(), 0);
  EXPECT_EQ(psi.d(), Matrix::Identity(2, 2));
}

TEST(OuterFactor, StaticKindThrows) {
  const MultiplierRecipe r = make_recipe(TestKind::StaticFullBlock, ValueSet::repeated(kDisk, 1));
  try {
    outer_factor(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StaticKind);
  }
  EXPECT_EQ(effective_outer_factor(r).d(), Matrix::Identity(2, 2));
}

TEST(OuterFactor, CommutationIdentity) {
  std::mt19937_64 rng(12);
  for (int k : {1, 2}) {
    const MultiplierRecipe r = make_recipe(TestKind::DynRepeated, ValueSet::repeated(kDisk, k),
                                           make_basis_filter(2.0, 2, k, FilterFamily::Repeated));
    const StateSpace big = outer_factor(r);
    const StateSpace& psi = r.filter->psi;
    for (int trial = 0; trial < 3; ++trial) {
      const StateSpace delta(oracle::random_stable(2, rng), oracle::random_matrix(2, 1, rng),
                             oracle::random_matrix(1, 2, rng), oracle::random_matrix(1, 1, rng));
      for (double w : log_grid(50)) {
        const Complex d = eval_freq(delta, w)(0, 0);
        CMatrix stack(2 * k, k);
        stack << CMatrix::Identity(k, k), d * CMatrix::Identity(k, k);
        const CMatrix lhs = eval_freq(big, w) * stack;
        const CMatrix p = eval_freq(psi, w);
        CMatrix rhs(2 * p.rows(), k);
        rhs << p, d * p;
        EXPECT_LT((lhs - rhs).norm(), 1e-10);
      }
    }
  }
}

TEST(LmiRegionMiddle, SingleRegionIsKronecker) {
  std::mt19937_64 rng(13);
  const Matrix p0 = oracle::random_symmetric(2, rng), m = oracle::random_symmetric(3, rng);
  EXPECT_LT((lmi_region_middle(p0, m) - kron(p0, m)).norm(), 1e-14);
}

TEST(LmiRegionMiddle, IdentityData) {
  EXPECT_EQ(lmi_region_middle(Matrix::Identity(4, 4), Matrix::Identity(2, 2)), 2.0 * Matrix::Identity(2, 2));
}

TEST(LmiRegionMiddle, DiagonalDataGivesSumOfKroneckers) {
  std::mt19937_64 rng(14);
  const int nu = 3, k = 2;
  Matrix p0 = Matrix::Zero(2 * nu, 2 * nu);
  std::vector<Matrix> ps, ms;
  Matrix m = Matrix::Zero(nu * k, nu * k);
  Matrix expected = Matrix::Zero(2 * k, 2 * k);
  for (int i = 0; i < nu; ++i) {
    const Matrix pi = oracle::random_symmetric(2, rng), mi = oracle::random_symmetric(k, rng);
    p0(i, i) = pi(0, 0);
    p0(i, nu + i) = p0(nu + i, i) = pi(0, 1);
    p0(nu + i, nu + i) = pi(1, 1);
    m.block(i * k, i * k, k, k) = mi;
    expected += kron(pi, mi);
  }
  EXPECT_LT((lmi_region_middle(p0, m) - expected).norm(), 1e-13);
}

TEST(LmiRegionMiddle, LinearInM) {
  std::mt19937_64 rng(15);
  const Matrix p0 = oracle::random_symmetric(4, rng);
  const Matrix a = oracle::random_symmetric(4, rng), b = oracle::random_symmetric(4, rng);
  EXPECT_LT((lmi_region_middle(p0, 2.0 * a - 3.0 * b) - 2.0 * lmi_region_middle(p0, a) + 3.0 * lmi_region_middle(p0, b)).norm(),
            1e-12);
  EXPECT_THROW(lmi_region_middle(p0, Matrix::Identity(3, 3)), Error);
}

TEST(Positivity, StaticFilterReducesToM) {
  const MultiplierRecipe r = make_recipe(TestKind::DynRepeated, ValueSet::repeated(kDisk, 2),
                                         make_basis_filter(2.0, 0, 2, FilterFamily::Repeated));
  const auto cs = positivity_constraints(r);
  ASSERT_EQ(cs.size(), 1u);
  std::mt19937_64 rng(16);
  const Matrix m = oracle::random_symmetric(2, rng);
  EXPECT_LT((cs[0].expr({{"M", m}, {"Y", Matrix(0, 0)}}) - m).norm(), 1e-15);
}

TEST(Positivity, FirstOrderFeasibleWithIdentityM) {
  const BasisFilter f = make_basis_filter(2.0, 1, 1, FilterFamily::Repeated);
  ProblemBuilder b;
  b.add_variable("Y", VarKind::Symmetric, 1);
  b.add_block("positivity", BlockKind::Strict,
              [&](const VarValues& v) { return positivity_form(f.psi, Matrix::Identity(2, 2), v.at("Y")); });
  const SdpProblem p = b.build();
  const SdpSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Feasible);
  EXPECT_TRUE(check_solution(p, s.variables).passed);
  const double y = s.variables.at("Y")(0, 0);
  // [[1 − 4y, y], [y, 1]] ≻ 0
  EXPECT_GT(1.0 - 4.0 * y - y * y, 0.0);
}

TEST(Positivity, KypImpliesFrequencyInequality) {
  // pin an indefinite M entry; the KYP certificate must still give ψ*Mψ > 0
  const MultiplierRecipe r = make_recipe(TestKind::DynRepeated, ValueSet::repeated(kDisk, 1),
                                         make_basis_filter(2.0, 2, 1, FilterFamily::Repeated));
  ProblemBuilder b;
  for (const auto& v : r.variable_shapes) b.add_variable(v.name, v.kind, v.dim);
  for (const auto& c : positivity_constraints(r)) b.add_block(c.label, c.kind, c.expr);
  b.add_block("pin", BlockKind::Equality, [](const VarValues& v) {
    return Matrix::Constant(1, 1, v.at("M")(2, 2) + 0.1);
  });
  const SdpProblem p = b.build();
  const SdpSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Feasible);
  const Matrix& m = s.variables.at("M");
  EXPECT_LT(min_eig(m), 0.0);
  std::vector<double> grid = log_grid(200);
  grid.push_back(0.0);
  for (double w : grid) {
    const CMatrix g = eval_freq(r.filter->psi, w);
    EXPECT_GT((g.adjoint() * m.cast<Complex>() * g)(0, 0).real(), 0.0);
  }
  EXPECT_GT(m(0, 0), 0.0);
}

TEST(Positivity, SolvedBlockMeetsMargin) {
  const MultiplierRecipe r = make_recipe(TestKind::DynIntersection,
                                         ValueSet::intersection({kDisk, p2(0, -0.75, 1)}, 2, true),
                                         make_basis_filter(2.0, 1, 2, FilterFamily::Repeated));
  const SdpProblem p = positivity_problem(r);
  ASSERT_EQ(p.blocks.size(), 2u);
  const SdpSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Feasible);
  const Vector y = p.pack(s.variables);
  for (const auto& blk : p.blocks) EXPECT_GE(min_eig(blk.evaluate(y)), blk.margin());
}

TEST(Positivity, LmiRegionUsesKroneckerFilter) {
  const MultiplierRecipe r = make_recipe(TestKind::LmiRegionDynamic, ValueSet::lmi_region(Vector((Vector(4) << 1, 1, -1, -1).finished()).asDiagonal(), 2, 1),
                                         make_basis_filter(2.0, 1, 1, FilterFamily::Repeated));
  EXPECT_EQ(positivity_filter(r).states(), 2);
  EXPECT_EQ(positivity_filter(r).outputs(), 4);
  EXPECT_EQ(r.variable_shapes[0].dim, 4);
  EXPECT_EQ(r.variable_shapes[1].dim, 2);
}

TEST(Positivity, EquationConstraintEquality) {
  const MultiplierRecipe r = make_recipe(TestKind::EquationConstrained, ValueSet::equation_constrained(kDisk, 1),
                                         make_basis_filter(2.0, 1, 1, FilterFamily::Repeated));
  const auto cs = positivity_constraints(r);
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_EQ(cs[1].label, "equation");
  EXPECT_EQ(cs[1].kind, BlockKind::Equality);
  VarValues v{{"M", Matrix::Identity(2, 2)}, {"Y", Matrix::Zero(1, 1)}, {"Z", Matrix::Zero(1, 1)},
              {"N", (Matrix(2, 2) << 0, 1, -1, 0).finished()}};
  EXPECT_TRUE(cs[1].expr(v).isZero(0.0));
  v["N"] = Matrix::Identity(2, 2);
  const Matrix expect = 2.0 * Matrix::Identity(2, 2);  // (Nᵀ + N) through [C D] = antidiagonal permutation
  EXPECT_LT((cs[1].expr(v) - expect).norm(), 1e-15);
}

TEST(TerminalCost, Examples) {
  const BasisFilter f = make_basis_filter(2.0, 1, 1, FilterFamily::Repeated);
  const MultiplierRecipe rep = make_recipe(TestKind::DynRepeated, ValueSet::repeated(kDisk, 1), f);
  EXPECT_TRUE(terminal_cost(rep, {{"M", Matrix::Identity(2, 2)}, {"Y", Matrix::Zero(1, 1)}}).isZero(0.0));

  const Matrix p1 = p2(0, -0.75, 1);
  const MultiplierRecipe inter = make_recipe(TestKind::DynIntersection, ValueSet::intersection({p1}, 1, true), f);
  const Matrix y1 = Matrix::Constant(1, 1, 0.3);
  EXPECT_EQ(terminal_cost(inter, {{"Y1", y1}}), kron(p1, y1));

  const MultiplierRecipe eq = make_recipe(TestKind::EquationConstrained, ValueSet::equation_constrained(kDisk, 1), f);
  const Matrix y = Matrix::Constant(1, 1, -0.7);
  EXPECT_EQ(terminal_cost(eq, {{"Y", y}, {"Z", Matrix::Zero(1, 1)}}), kron(kDisk, y));
  const Matrix tz = terminal_cost(eq, {{"Y", y}, {"Z", Matrix::Constant(1, 1, 2.0)}});
  EXPECT_DOUBLE_EQ(tz(0, 1), kDisk(0, 1) * -0.7 + 1.0);
  EXPECT_DOUBLE_EQ(tz(1, 0), tz(0, 1));
}

TEST(TerminalCost, MissingVariable) {
  const MultiplierRecipe rep = make_recipe(TestKind::DynRepeated, ValueSet::repeated(kDisk, 1),
                                           make_basis_filter(2.0, 1, 1, FilterFamily::Repeated));
  try {
    terminal_cost(rep, {{"M", Matrix::Identity(2, 2)}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingVariable);
  }
  EXPECT_THROW(middle_matrix(rep, {{"Y", Matrix::Zero(1, 1)}}), Error);
}

TEST(MakeRecipe, ShapesPerKind) {
  const BasisFilter f = make_basis_filter(2.0, 2, 1, FilterFamily::Repeated);
  const MultiplierRecipe inter =
      make_recipe(TestKind::DynIntersection, ValueSet::intersection({kDisk, kDisk, kDisk}, 1), f);
  ASSERT_EQ(inter.variable_shapes.size(), 6u);
  EXPECT_EQ(inter.variable_shapes[0].name, "M1");
  EXPECT_EQ(inter.variable_shapes[0].dim, 3);
  EXPECT_EQ(inter.variable_shapes[5].name, "Y3");
  EXPECT_EQ(inter.variable_shapes[5].dim, 2);
  const MultiplierRecipe eq = make_recipe(TestKind::EquationConstrained, ValueSet::equation_constrained(kDisk, 1), f);
  EXPECT_EQ(eq.variable_shapes[2].kind, VarKind::General);
  EXPECT_EQ(eq.terminal_shapes.size(), 2u);
}

TEST(MakeRecipe, RejectsMismatches) {
  const BasisFilter f = make_basis_filter(2.0, 1, 1, FilterFamily::Repeated);
  try {
    make_recipe(TestKind::DynIntersection, ValueSet::repeated(kDisk, 1), f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedCombination);
  }
  EXPECT_THROW(make_recipe(TestKind::DynRepeated, ValueSet::repeated(kDisk, 2), f), Error);
  try {
    make_recipe(TestKind::DynRepeated, ValueSet::repeated(kDisk, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StaticKind);
  }
}
