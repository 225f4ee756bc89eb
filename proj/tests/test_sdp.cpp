#include <gtest/gtest.h>

#include "iqc/sdp_solver.hpp"
#include "oracles.hpp"

using namespace iqc;

namespace {

// X ≻ 0, −(AᵀX + XA) ≻ 0
SdpProblem lyapunov(const Matrix& a, const Vector& scale = Vector()) {
  const Matrix d = scale.size() ? Matrix(scale.asDiagonal()) : Matrix::Identity(a.rows(), a.rows());
  ProblemBuilder b;
  b.add_variable("X", VarKind::Symmetric, static_cast<int>(a.rows()));
  b.add_block("pos", BlockKind::Strict, [](const VarValues& v) { return v.at("X"); });
  b.add_block("lyap", BlockKind::Strict, [a, d](const VarValues& v) {
    const Matrix& x = v.at("X");
    return Matrix(-d * (a.transpose() * x + x * a) * d);
  });
  return b.build();
}

}  // namespace

TEST(Solve, LyapunovStable) {
  const SdpProblem p = lyapunov(Matrix::Constant(1, 1, -1.0));
  const SdpSolution s = solve(p);
  EXPECT_EQ(s.status, SolveStatus::Feasible);
  EXPECT_TRUE(check_solution(p, s.variables).passed);
}

TEST(Solve, LyapunovUnstable) {
  const SdpSolution s = solve(lyapunov(Matrix::Constant(1, 1, 1.0)));
  EXPECT_EQ(s.status, SolveStatus::Infeasible);
}

TEST(Solve, LyapunovRandomMatchesHurwitz) {
  std::mt19937_64 rng(20);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 2 + trial % 3;
    Matrix a = oracle::random_matrix(n, n, rng);
    Eigen::EigenSolver<Matrix> es(a, false);
    const double top = es.eigenvalues().real().maxCoeff();
    a -= (top + (trial % 2 ? 0.3 : -0.3)) * Matrix::Identity(n, n);
    const SdpSolution s = solve(lyapunov(a));
    EXPECT_EQ(s.status, trial % 2 ? SolveStatus::Feasible : SolveStatus::Infeasible) << "trial " << trial;
  }
}

TEST(Solve, MinimizesScalarObjective) {
  // min t s.t. [[t, 1], [1, 4]] ⪰ 0  ⇒  t* = 1/4
  ProblemBuilder b;
  b.add_variable("t", VarKind::Symmetric, 1);
  b.add_block("schur", BlockKind::NonStrict, [](const VarValues& v) {
    return (Matrix(2, 2) << v.at("t")(0, 0), 1, 1, 4).finished();
  });
  b.set_objective([](const VarValues& v) { return v.at("t")(0, 0); });
  const SdpSolution s = solve(b.build());
  ASSERT_EQ(s.status, SolveStatus::Feasible);
  ASSERT_TRUE(s.objective_value.has_value());
  EXPECT_NEAR(*s.objective_value, 0.25, 1e-6);
}

TEST(Solve, EqualityConstraint) {
  // min X₁₂ s.t. X ⪰ 0, tr X = 1  ⇒  −1/2
  ProblemBuilder b;
  b.add_variable("X", VarKind::Symmetric, 2);
  b.add_block("psd", BlockKind::NonStrict, [](const VarValues& v) { return v.at("X"); });
  b.add_block("trace", BlockKind::Equality,
              [](const VarValues& v) { return Matrix::Constant(1, 1, v.at("X").trace() - 1.0); });
  b.set_objective([](const VarValues& v) { return v.at("X")(0, 1); });
  const SdpProblem p = b.build();
  const SdpSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Feasible);
  EXPECT_NEAR(*s.objective_value, -0.5, 1e-6);
  EXPECT_NEAR(s.variables.at("X").trace(), 1.0, 1e-8);
  EXPECT_TRUE(check_solution(p, s.variables).passed);
}

TEST(Solve, GeneralVariable) {
  // N + Nᵀ = 0 with N₁₂ = 1 pinned
  ProblemBuilder b;
  b.add_variable("N", VarKind::General, 2);
  b.add_block("skew", BlockKind::Equality, [](const VarValues& v) {
    const Matrix& n = v.at("N");
    return Matrix(n + n.transpose());
  });
  b.add_block("pin", BlockKind::Equality, [](const VarValues& v) { return Matrix::Constant(1, 1, v.at("N")(0, 1) - 1.0); });
  const SdpProblem p = b.build();
  EXPECT_EQ(p.scalar_count(), 4);
  const SdpSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Feasible);
  EXPECT_NEAR(s.variables.at("N")(1, 0), -1.0, 1e-8);
}

TEST(CheckSolution, ExactLyapunovPair) {
  const SdpProblem p = lyapunov(Matrix::Constant(1, 1, -1.0));
  const ResidualReport r = check_solution(p, {{"X", Matrix::Ones(1, 1)}});
  EXPECT_TRUE(r.passed);
  EXPECT_LE(r.max_violation, 1e-12);
  EXPECT_NEAR(r.blocks[1].min_eig, 2.0, 1e-15);
}

TEST(CheckSolution, PerturbedBelowMarginIsFlagged) {
  const SdpProblem p = lyapunov(Matrix::Constant(1, 1, -1.0));
  const double margin = p.blocks[0].margin();
  EXPECT_TRUE(check_solution(p, {{"X", Matrix::Constant(1, 1, margin)}}).passed);
  const ResidualReport r = check_solution(p, {{"X", Matrix::Constant(1, 1, margin - 2.0 * margin)}});
  EXPECT_FALSE(r.passed);
  EXPECT_FALSE(r.blocks[0].passed);
  EXPECT_NEAR(r.blocks[0].violation, 2.0 * margin, 1e-20);
}

TEST(CheckSolution, MissingVariable) {
  const SdpProblem p = lyapunov(Matrix::Constant(1, 1, -1.0));
  try {
    check_solution(p, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingVariable);
  }
}

TEST(CheckSolution, NeverWorseThanSolverReport) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 6; ++trial) {
    const SdpProblem p = lyapunov(oracle::random_stable(3, rng, 0.2));
    const SdpSolution s = solve(p);
    ASSERT_EQ(s.status, SolveStatus::Feasible);
    EXPECT_LE(check_solution(p, s.variables).max_violation, s.max_primal_residual + 1e-10);
  }
}

TEST(SolveInvariant, CongruenceScaling) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int trial = 0; trial < 8; ++trial) {
    Matrix a = oracle::random_matrix(3, 3, rng);
    Eigen::EigenSolver<Matrix> es(a, false);
    a -= (es.eigenvalues().real().maxCoeff() + (trial % 2 ? 0.4 : -0.4)) * Matrix::Identity(3, 3);
    const Vector scale = Vector::NullaryExpr(3, [&](Eigen::Index) { return u(rng); });
    const SolveStatus plain = solve(lyapunov(a)).status;
    const SolveStatus scaled = solve(lyapunov(a, scale)).status;
    EXPECT_EQ(plain, scaled);
    EXPECT_NE(plain, SolveStatus::Failed);
  }
}

TEST(Problem, PackUnpackRoundTrip) {
  ProblemBuilder b;
  b.add_variable("S", VarKind::Symmetric, 3);
  b.add_variable("E", VarKind::Symmetric, 0);
  b.add_variable("G", VarKind::General, 2);
  const SdpProblem p = b.build();
  EXPECT_EQ(p.variables.size(), 2u);
  EXPECT_EQ(p.scalar_count(), 6 + 4);
  EXPECT_EQ(p.offset("G"), 6);
  std::mt19937_64 rng(23);
  const VarValues v{{"S", oracle::random_symmetric(3, rng)}, {"G", oracle::random_matrix(2, 2, rng)}};
  const VarValues back = p.unpack(p.pack(v));
  EXPECT_EQ(back.at("S"), v.at("S"));
  EXPECT_EQ(back.at("G"), v.at("G"));
  // column-major upper triangle
  Matrix s = Matrix::Zero(3, 3);
  s(0, 1) = s(1, 0) = 7.0;
  EXPECT_EQ(p.pack({{"S", s}, {"G", Matrix::Zero(2, 2)}})(1), 7.0);
}

TEST(Problem, BuilderProbesAffineTerms) {
  ProblemBuilder b;
  b.add_variable("x", VarKind::Symmetric, 1);
  b.add_block("affine", BlockKind::NonStrict, [](const VarValues& v) {
    return (Matrix(2, 2) << 1.0 + 2.0 * v.at("x")(0, 0), 3.0, 3.0, -v.at("x")(0, 0)).finished();
  });
  const SdpProblem p = b.build();
  const LmiBlock& blk = p.block("affine");
  EXPECT_EQ(blk.constant, (Matrix(2, 2) << 1, 3, 3, 0).finished());
  ASSERT_EQ(blk.terms.size(), 1u);
  EXPECT_EQ(blk.terms[0].second, (Matrix(2, 2) << 2, 0, 0, -1).finished());
  EXPECT_THROW(b.add_variable("x", VarKind::Symmetric, 1), Error);
}
