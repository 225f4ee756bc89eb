#ifndef IQC_LTI_HPP
#define IQC_LTI_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "iqc/error.hpp"

namespace iqc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Strictness margin on eigenvalue real parts used by is_hurwitz.
inline constexpr double kHurwitzMargin = 1e-9;

/// Kronecker product a ⊗ b.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

inline Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline double min_eig(const Matrix& m) {
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline double max_eig(const Matrix& m) {
  if (m.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(m.rows() - 1);
}

inline double min_eig(const CMatrix& m) {
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// A frequency on the extended imaginary axis. Infinity is a tag, never an IEEE inf.
class Frequency {
 public:
  static Frequency finite(double omega) { return Frequency(omega, false); }
  static Frequency infinity() { return Frequency(0.0, true); }

  bool is_infinite() const { return infinite_; }
  double value() const { return omega_; }

 private:
  Frequency(double omega, bool infinite) : omega_(omega), infinite_(infinite) {}
  double omega_;
  bool infinite_;
};

/// Continuous-time LTI realization x' = Ax + Bu, y = Cx + Du.
class StateSpace {
 public:
  StateSpace() : StateSpace(Matrix(0, 0), Matrix(0, 0), Matrix(0, 0), Matrix(0, 0)) {}

  StateSpace(Matrix a, Matrix b, Matrix c, Matrix d)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
    if (a_.rows() != a_.cols()) throw Error(ErrorCode::DimensionMismatch, "state matrix must be square");
    if (b_.rows() != a_.rows()) throw Error(ErrorCode::DimensionMismatch, "B rows must equal state dimension");
    if (c_.cols() != a_.cols()) throw Error(ErrorCode::DimensionMismatch, "C cols must equal state dimension");
    if (d_.rows() != c_.rows() || d_.cols() != b_.cols())
      throw Error(ErrorCode::DimensionMismatch, "D must be outputs x inputs");
  }

  /// Static system y = d u.
  static StateSpace gain(const Matrix& d) {
    return StateSpace(Matrix(0, 0), Matrix(0, d.cols()), Matrix(d.rows(), 0), d);
  }

  static StateSpace identity(Eigen::Index dim) { return gain(Matrix::Identity(dim, dim)); }

  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  const Matrix& c() const { return c_; }
  const Matrix& d() const { return d_; }

  Eigen::Index states() const { return a_.rows(); }
  Eigen::Index inputs() const { return d_.cols(); }
  Eigen::Index outputs() const { return d_.rows(); }

  bool operator==(const StateSpace& o) const {
    return a_ == o.a_ && b_ == o.b_ && c_ == o.c_ && d_ == o.d_;
  }

 private:
  Matrix a_, b_, c_, d_;
};

/// D + C(iωI − A)⁻¹B, or D at ω = ∞.
inline CMatrix eval_freq(const StateSpace& sys, Frequency omega) {
  CMatrix d = sys.d().cast<Complex>();
  if (omega.is_infinite() || sys.states() == 0) return d;
  const Eigen::Index n = sys.states();
  CMatrix resolvent = Complex(0.0, omega.value()) * CMatrix::Identity(n, n) - sys.a().cast<Complex>();
  Eigen::PartialPivLU<CMatrix> lu(resolvent);
  if (!(lu.rcond() > 1e-13))
    throw Error(ErrorCode::SingularResolvent, "i*omega is numerically an eigenvalue of A at omega = " +
                                                  std::to_string(omega.value()));
  return d + sys.c().cast<Complex>() * lu.solve(sys.b().cast<Complex>());
}

inline CMatrix eval_freq(const StateSpace& sys, double omega) { return eval_freq(sys, Frequency::finite(omega)); }

inline bool is_hurwitz(const Matrix& a, double eps = kHurwitzMargin) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "is_hurwitz needs a square matrix");
  if (a.rows() == 0) return true;
  Eigen::EigenSolver<Matrix> es(a, false);
  return (es.eigenvalues().real().array() < -eps).all();
}

/// g1 ∘ g2 (g2 acts first). State ordering is (ξ₁ of g1, ξ₂ of g2).
inline StateSpace compose_series(const StateSpace& g1, const StateSpace& g2) {
  if (g1.inputs() != g2.outputs())
    throw Error(ErrorCode::DimensionMismatch, "compose_series: g1 inputs != g2 outputs");
  const auto n1 = g1.states(), n2 = g2.states();
  Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = g1.a();
  a.topRightCorner(n1, n2) = g1.b() * g2.c();
  a.bottomRightCorner(n2, n2) = g2.a();
  Matrix b(n1 + n2, g2.inputs());
  b << g1.b() * g2.d(), g2.b();
  Matrix c(g1.outputs(), n1 + n2);
  c << g1.c(), g1.d() * g2.c();
  return StateSpace(a, b, c, g1.d() * g2.d());
}

/// I_r ⊗ sys, realized as (I_r⊗A, I_r⊗B, I_r⊗C, I_r⊗D).
inline StateSpace kron_left(Eigen::Index r, const StateSpace& sys) {
  const Matrix eye = Matrix::Identity(r, r);
  return StateSpace(kron(eye, sys.a()), kron(eye, sys.b()), kron(eye, sys.c()), kron(eye, sys.d()));
}

inline StateSpace diag_join(const StateSpace& s1, const StateSpace& s2) {
  return StateSpace(block_diag(s1.a(), s2.a()), block_diag(s1.b(), s2.b()), block_diag(s1.c(), s2.c()),
                    block_diag(s1.d(), s2.d()));
}

/// Stacks the outputs of two systems driven by the same input: u ↦ [g1 u; g2 u].
inline StateSpace stack_outputs(const StateSpace& g1, const StateSpace& g2) {
  if (g1.inputs() != g2.inputs()) throw Error(ErrorCode::DimensionMismatch, "stack_outputs: input dims differ");
  Matrix b(g1.states() + g2.states(), g1.inputs());
  b << g1.b(), g2.b();
  Matrix d(g1.outputs() + g2.outputs(), g1.inputs());
  d << g1.d(), g2.d();
  return StateSpace(block_diag(g1.a(), g2.a()), b, block_diag(g1.c(), g2.c()), d);
}

/// Realization (−Aᵀ, Cᵀ, −Bᵀ, Dᵀ) of G*(s) = G(−s)ᵀ.
inline StateSpace adjoint(const StateSpace& sys) {
  return StateSpace(-sys.a().transpose(), sys.c().transpose(), -sys.b().transpose(), sys.d().transpose());
}

/// Uniformly sampled signal; one column per sample, one row per channel.
struct SampledSignal {
  double dt = 0.0;
  Matrix values;

  Eigen::Index channels() const { return values.rows(); }
  Eigen::Index samples() const { return values.cols(); }
  double duration() const { return dt * static_cast<double>(samples() - 1); }
};

/// Repeats every sample `factor` times; the held signal is unchanged in continuous time.
inline SampledSignal hold(const SampledSignal& s, int factor) {
  if (factor < 1) throw Error(ErrorCode::DimensionMismatch, "hold factor must be positive");
  SampledSignal out;
  out.dt = s.dt / factor;
  out.values.resize(s.channels(), (s.samples() - 1) * factor + 1);
  for (Eigen::Index j = 0; j + 1 < s.samples(); ++j)
    for (int r = 0; r < factor; ++r) out.values.col(j * factor + r) = s.values.col(j);
  out.values.col(out.values.cols() - 1) = s.values.col(s.samples() - 1);
  return out;
}

struct SimulationOptions {
  Vector x0;                            ///< empty means zero initial state
  std::optional<Matrix> output_weight;  ///< when set, also integrates yᵀQy
  double blowup_guard = 1e12;
};

struct Trajectory {
  Matrix states;      ///< n × samples
  Matrix outputs;     ///< m_out × samples
  Vector quadratic;   ///< running ∫₀ᵗ yᵀQy, empty without output_weight
};

/// Fixed-step RK4 with zero-order-hold input; one integration step per input sample.
inline Trajectory simulate_trajectory(const StateSpace& sys, const SampledSignal& input,
                                      const SimulationOptions& opts = {}) {
  if (!(input.dt > 0.0)) throw Error(ErrorCode::DimensionMismatch, "simulate: dt must be positive");
  if (input.samples() < 2) throw Error(ErrorCode::DimensionMismatch, "simulate: need at least two samples");
  if (input.channels() != sys.inputs()) throw Error(ErrorCode::DimensionMismatch, "simulate: input channel count");
  const Eigen::Index n = sys.states(), count = input.samples();
  const double h = input.dt;
  Vector x = opts.x0.size() ? opts.x0 : Vector::Zero(n);
  if (x.size() != n) throw Error(ErrorCode::DimensionMismatch, "simulate: x0 size");

  const bool weighted = opts.output_weight.has_value();
  Matrix q;
  if (weighted) {
    q = sym(*opts.output_weight);
    if (q.rows() != sys.outputs()) throw Error(ErrorCode::DimensionMismatch, "simulate: output weight size");
  }

  Trajectory tr;
  tr.states.resize(n, count);
  tr.outputs.resize(sys.outputs(), count);
  if (weighted) tr.quadratic = Vector::Zero(count);

  const Matrix& A = sys.a();
  const Matrix& B = sys.b();
  const Matrix& C = sys.c();
  const Matrix& D = sys.d();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < count; ++j) {
    const Vector u = input.values.col(j);
    tr.states.col(j) = x;
    tr.outputs.col(j) = C * x + D * u;
    if (weighted) tr.quadratic(j) = acc;
    if (j + 1 == count) break;
    const Vector bu = B * u;
    const Vector du = D * u;
    auto f = [&](const Vector& s) -> Vector { return A * s + bu; };
    auto g = [&](const Vector& s) -> double {
      const Vector y = C * s + du;
      return y.dot(q * y);
    };
    const Vector k1 = f(x);
    const Vector x2 = x + 0.5 * h * k1;
    const Vector k2 = f(x2);
    const Vector x3 = x + 0.5 * h * k2;
    const Vector k3 = f(x3);
    const Vector x4 = x + h * k3;
    const Vector k4 = f(x4);
    if (weighted) acc += h / 6.0 * (g(x) + 2.0 * g(x2) + 2.0 * g(x3) + g(x4));
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!(x.norm() < opts.blowup_guard))
      throw Error(ErrorCode::UnstableBlowup, "state norm exceeded guard at t = " + std::to_string(h * (j + 1)));
  }
  return tr;
}

inline SampledSignal simulate(const StateSpace& sys, const SampledSignal& input, const Vector& x0 = Vector()) {
  SimulationOptions opts;
  opts.x0 = x0;
  return SampledSignal{input.dt, simulate_trajectory(sys, input, opts).outputs};
}

/// Closed-loop state matrix of ẋ = Ax + Bw, z = Cx + Dw, w = Vz for a constant real V.
inline Matrix close_loop_static(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d,
                                const Matrix& v) {
  const Matrix lhs = Matrix::Identity(d.rows(), d.rows()) - d * v;
  return a + b * v * lhs.fullPivLu().solve(c);
}

}  // namespace iqc

#endif  // IQC_LTI_HPP
