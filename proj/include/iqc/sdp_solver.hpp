#ifndef IQC_SDP_SOLVER_HPP
#define IQC_SDP_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "iqc/sdp.hpp"

namespace iqc {

enum class SolveStatus { Feasible, Infeasible, Inaccurate, Failed };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Feasible: return "Feasible";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Inaccurate: return "Inaccurate";
    case SolveStatus::Failed: return "Failed";
  }
  return "?";
}

inline SolveStatus solve_status_from_string(const std::string& s) {
  for (auto k : {SolveStatus::Feasible, SolveStatus::Infeasible, SolveStatus::Inaccurate, SolveStatus::Failed})
    if (s == to_string(k)) return k;
  throw Error(ErrorCode::ParseError, "unknown solve status '" + s + "'");
}

struct SolverOptions {
  double tolerance = 1e-8;      ///< absolute residual tolerance for nonstrict and equality blocks
  double gap = 1e-7;            ///< relative duality gap
  double variable_bound = 1e4;  ///< box |yᵢ| ≤ bound keeping the search region compact
  double margin_factor = 2.0;   ///< strict blocks are solved against margin_factor·margin
  int max_iterations = 300;
};

struct BlockResidual {
  std::string label;
  BlockKind kind = BlockKind::Strict;
  double min_eig = 0.0;        ///< smallest eigenvalue (inequality kinds)
  double equality_norm = 0.0;  ///< max |entry| (equality kind)
  double required = 0.0;       ///< margin for strict blocks, 0 otherwise
  double violation = 0.0;
  bool passed = true;
};

struct ResidualReport {
  std::vector<BlockResidual> blocks;
  double max_violation = 0.0;
  bool passed = true;
};

/// Evaluates every block at the candidate; uses no solver state.
inline ResidualReport check_solution(const SdpProblem& problem, const VarValues& candidate,
                                     double tolerance = 1e-8) {
  const Vector y = problem.pack(candidate);
  ResidualReport report;
  for (const auto& block : problem.blocks) {
    const Matrix f = block.evaluate(y);
    BlockResidual r;
    r.label = block.label;
    r.kind = block.kind;
    if (block.kind == BlockKind::Equality) {
      r.equality_norm = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
      r.violation = std::max(0.0, r.equality_norm - tolerance);
      r.min_eig = min_eig(f);
    } else {
      r.min_eig = min_eig(f);
      if (block.kind == BlockKind::Strict) {
        r.required = block.margin();
        r.violation = std::max(0.0, r.required - r.min_eig);
      } else {
        r.violation = std::max(0.0, -r.min_eig - tolerance);
      }
    }
    r.passed = r.violation == 0.0;
    report.max_violation = std::max(report.max_violation, r.violation);
    report.passed = report.passed && r.passed;
    report.blocks.push_back(std::move(r));
  }
  return report;
}

struct SdpSolution {
  SolveStatus status = SolveStatus::Failed;
  VarValues variables;
  std::optional<double> objective_value;
  double max_primal_residual = 0.0;
  std::vector<double> min_block_eig;
  double best_margin = 0.0;  ///< optimal shift from the feasibility phase
  bool bound_active = false;
  int iterations = 0;
  std::string diagnostics;
};

namespace detail {

/// maximize bᵀy  s.t.  Zⱼ = Cⱼ − Σᵢ yᵢ Aⱼᵢ ⪰ 0,  lp_c − lp_a·y ≥ 0.
struct ConicProgram {
  int m = 0;
  Vector b;
  std::vector<Matrix> c;
  std::vector<std::vector<std::pair<int, Matrix>>> a;
  Matrix lp_a;
  Vector lp_c;
};

struct IpmResult {
  Vector y;
  bool converged = false;
  int iterations = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_infeasibility = 0.0;
  std::string message;
};

inline std::optional<Eigen::LLT<Matrix>> cholesky(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  // LLT accepts some indefinite inputs; reject non-positive pivots explicitly
  if (!(llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all()) return std::nullopt;
  return llt;
}

/// Largest α with M + α·D ⪰ 0 given the Cholesky factor of M (∞ if unbounded).
inline double max_step(const Eigen::LLT<Matrix>& chol, const Matrix& d) {
  if (d.rows() == 0) return std::numeric_limits<double>::infinity();
  const Matrix l = chol.matrixL();
  Matrix t = l.triangularView<Eigen::Lower>().solve(d);
  t = l.triangularView<Eigen::Lower>().solve(t.transpose()).transpose();
  const double lam = min_eig(t);
  return lam >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lam;
}

inline double max_step_lp(const Vector& x, const Vector& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (dx(i) < 0.0) a = std::min(a, -x(i) / dx(i));
  return a;
}

/// Primal-dual path following (HKM direction, Mehrotra predictor-corrector) that keeps
/// the dual slack exactly feasible; y0 must be strictly feasible.
inline IpmResult maximize(const ConicProgram& p, const Vector& y0, double tol, double gap_tol, int max_iter) {
  const int m = p.m;
  const std::size_t nb = p.c.size();
  const Eigen::Index nlp = p.lp_c.size();

  auto slack = [&](const Vector& y, std::vector<Matrix>& z, Vector& zl) {
    z.resize(nb);
    for (std::size_t j = 0; j < nb; ++j) {
      z[j] = p.c[j];
      for (const auto& [i, aji] : p.a[j]) z[j] -= y(i) * aji;
      z[j] = sym(z[j]);
    }
    zl = nlp ? Vector(p.lp_c - p.lp_a * y) : Vector();
  };
  auto a_op = [&](const std::vector<Matrix>& x, const Vector& xl) {
    Vector out = Vector::Zero(m);
    for (std::size_t j = 0; j < nb; ++j)
      for (const auto& [i, aji] : p.a[j]) out(i) += aji.cwiseProduct(x[j]).sum();
    if (nlp) out += p.lp_a.transpose() * xl;
    return out;
  };

  IpmResult res;
  Vector y = y0;
  std::vector<Matrix> z;
  Vector zl;
  slack(y, z, zl);

  double ntot = static_cast<double>(nlp);
  for (const auto& cj : p.c) ntot += static_cast<double>(cj.rows());
  std::vector<Matrix> x(nb), zinv(nb);
  std::vector<Eigen::LLT<Matrix>> zchol(nb);
  for (std::size_t j = 0; j < nb; ++j) {
    auto ch = cholesky(z[j]);
    if (!ch) {
      res.y = y;
      res.message = "initial point is not strictly feasible";
      return res;
    }
    x[j] = ch->solve(Matrix::Identity(z[j].rows(), z[j].rows()));
  }
  Vector xl = nlp ? Vector(zl.cwiseInverse()) : Vector();
  constexpr double stall_tol = 1e-6;
  double best_mu = std::numeric_limits<double>::infinity();
  int stalled = 0;

  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it;
    for (std::size_t j = 0; j < nb; ++j) {
      auto ch = cholesky(z[j]);
      if (!ch) {
        res.y = y;
        res.message = "lost dual feasibility";
        return res;
      }
      zchol[j] = *ch;
      zinv[j] = sym(ch->solve(Matrix::Identity(z[j].rows(), z[j].rows())));
    }
    double xz = 0.0, pobj = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      xz += x[j].cwiseProduct(z[j]).sum();
      pobj += x[j].cwiseProduct(p.c[j]).sum();
    }
    if (nlp) {
      xz += xl.dot(zl);
      pobj += xl.dot(p.lp_c);
    }
    const double mu = xz / ntot;
    const double dobj = p.b.dot(y);
    const Vector rp = p.b - a_op(x, xl);
    const double pinf = rp.norm() / (1.0 + p.b.norm());
    res.y = y;
    res.primal_objective = pobj;
    res.dual_objective = dobj;
    res.primal_infeasibility = pinf;
    const double rel_gap = xz / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (pinf < tol && rel_gap < gap_tol) {
      res.converged = true;
      res.message = "converged";
      return res;
    }
    // ill-conditioned Schur systems can stall the primal iterate; y stays exactly feasible
    if (rel_gap > 1e-4 || mu < 0.9 * best_mu) {
      best_mu = mu;
      stalled = 0;
    } else if (++stalled >= 8) {
      res.converged = pinf < stall_tol && std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj)) < gap_tol;
      std::ostringstream msg;
      msg << (res.converged ? "converged (stalled at primal infeasibility " : "stalled (primal infeasibility ") << pinf
          << ")";
      res.message = msg.str();
      return res;
    }

    // Schur complement
    Matrix schur = Matrix::Zero(m, m);
    for (std::size_t j = 0; j < nb; ++j) {
      const auto& terms = p.a[j];
      std::vector<Matrix> g(terms.size());
      for (std::size_t s = 0; s < terms.size(); ++s) g[s] = x[j] * terms[s].second * zinv[j];
      for (std::size_t s = 0; s < terms.size(); ++s)
        for (std::size_t t = s; t < terms.size(); ++t) {
          const double v = g[s].cwiseProduct(terms[t].second).sum();
          schur(terms[s].first, terms[t].first) += v;
          if (t != s) schur(terms[t].first, terms[s].first) += v;
        }
    }
    if (nlp) schur += p.lp_a.transpose() * (xl.cwiseQuotient(zl)).asDiagonal() * p.lp_a;
    schur = sym(schur);
    Eigen::LDLT<Matrix> fact(schur);
    if (fact.info() != Eigen::Success) {
      schur.diagonal().array() += 1e-14 * (1.0 + schur.diagonal().cwiseAbs().maxCoeff());
      fact.compute(schur);
    }

    auto directions = [&](const Vector& rhs, double sigma_mu, const std::vector<Matrix>* corr, const Vector* corr_lp,
                          Vector& dy, std::vector<Matrix>& dx, std::vector<Matrix>& dz, Vector& dxl, Vector& dzl) {
      dy = fact.solve(rhs);
      dx.resize(nb);
      dz.resize(nb);
      for (std::size_t j = 0; j < nb; ++j) {
        dz[j] = Matrix::Zero(z[j].rows(), z[j].cols());
        for (const auto& [i, aji] : p.a[j]) dz[j] -= dy(i) * aji;
        Matrix d = sigma_mu * zinv[j] - x[j] - sym(x[j] * dz[j] * zinv[j]);
        if (corr) d -= (*corr)[j];
        dx[j] = sym(d);
      }
      if (nlp) {
        dzl = -p.lp_a * dy;
        dxl = sigma_mu * zl.cwiseInverse() - xl - xl.cwiseProduct(dzl).cwiseQuotient(zl);
        if (corr_lp) dxl -= *corr_lp;
      }
    };
    auto steps = [&](const std::vector<Matrix>& dx, const std::vector<Matrix>& dz, const Vector& dxl,
                     const Vector& dzl, double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = ap;
      for (std::size_t j = 0; j < nb; ++j) {
        auto xc = cholesky(x[j]);
        ap = std::min(ap, xc ? max_step(*xc, dx[j]) : 0.0);
        ad = std::min(ad, max_step(zchol[j], dz[j]));
      }
      if (nlp) {
        ap = std::min(ap, max_step_lp(xl, dxl));
        ad = std::min(ad, max_step_lp(zl, dzl));
      }
    };

    Vector dy, dxl, dzl;
    std::vector<Matrix> dx, dz;
    directions(p.b, 0.0, nullptr, nullptr, dy, dx, dz, dxl, dzl);
    double ap = 0.0, ad = 0.0;
    steps(dx, dz, dxl, dzl, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double xz_aff = 0.0;
    for (std::size_t j = 0; j < nb; ++j) xz_aff += (x[j] + ap * dx[j]).cwiseProduct(z[j] + ad * dz[j]).sum();
    if (nlp) xz_aff += (xl + ap * dxl).dot(zl + ad * dzl);
    const double sigma = std::clamp(std::pow(std::max(0.0, xz_aff) / xz, 3.0), 0.0, 1.0);

    std::vector<Matrix> corr(nb);
    for (std::size_t j = 0; j < nb; ++j) corr[j] = sym(dx[j] * dz[j] * zinv[j]);
    Vector corr_lp = nlp ? Vector(dxl.cwiseProduct(dzl).cwiseQuotient(zl)) : Vector();
    std::vector<Matrix> zinv_scaled(nb);
    for (std::size_t j = 0; j < nb; ++j) zinv_scaled[j] = sigma * mu * zinv[j] - corr[j];
    Vector lp_term = nlp ? Vector(sigma * mu * zl.cwiseInverse() - corr_lp) : Vector();
    const Vector rhs = p.b - a_op(zinv_scaled, lp_term);
    directions(rhs, sigma * mu, &corr, nlp ? &corr_lp : nullptr, dy, dx, dz, dxl, dzl);
    steps(dx, dz, dxl, dzl, ap, ad);
    const double tau = mu < 1e-6 ? 0.98 : 0.95;
    ap = std::min(1.0, tau * ap);
    ad = std::min(1.0, tau * ad);

    for (std::size_t j = 0; j < nb; ++j) x[j] = sym(x[j] + ap * dx[j]);
    if (nlp) xl += ap * dxl;
    Vector ynew = y + ad * dy;
    for (int shrink = 0; shrink < 30; ++shrink) {
      std::vector<Matrix> zt;
      Vector zlt;
      slack(ynew, zt, zlt);
      bool ok = !nlp || (zlt.array() > 0.0).all();
      for (std::size_t j = 0; j < nb && ok; ++j) ok = cholesky(zt[j]).has_value();
      if (ok) {
        y = ynew;
        z = std::move(zt);
        zl = std::move(zlt);
        break;
      }
      ad *= 0.5;
      ynew = y + ad * dy;
    }
  }
  res.message = "iteration limit reached";
  return res;
}

/// Equality blocks E(y) = 0 rewritten as y = particular + basis·t.
struct AffineReduction {
  Vector particular;
  Matrix basis;
  bool consistent = true;
};

inline AffineReduction reduce_equalities(const SdpProblem& problem) {
  const int m = problem.scalar_count();
  std::vector<Vector> rows;
  std::vector<double> rhs;
  for (const auto& block : problem.blocks) {
    if (block.kind != BlockKind::Equality) continue;
    const Eigen::Index n = block.size();
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i <= j; ++i) {
        Vector row = Vector::Zero(m);
        for (const auto& [idx, f] : block.terms) row(idx) = f(i, j);
        rows.push_back(row);
        rhs.push_back(-block.constant(i, j));
      }
  }
  AffineReduction red;
  if (rows.empty()) {
    red.particular = Vector::Zero(m);
    red.basis = Matrix::Identity(m, m);
    return red;
  }
  Matrix e(rows.size(), m);
  Vector r(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    e.row(i) = rows[i].transpose();
    r(i) = rhs[i];
  }
  Eigen::JacobiSVD<Matrix> svd(e, Eigen::ComputeFullV | Eigen::ComputeThinU);
  const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  svd.setThreshold(1e-10);
  const auto rank = svd.rank();
  red.particular = svd.solve(r);
  red.consistent = (e * red.particular - r).norm() <= 1e-9 * (1.0 + r.norm() + smax);
  red.basis = svd.matrixV().rightCols(m - rank);
  return red;
}

/// Directions of the equality-reduced space that move some inequality block or the objective;
/// exactly redundant directions would make the Schur complement singular.
inline Matrix range_basis(const SdpProblem& problem, const AffineReduction& red) {
  const int m_full = problem.scalar_count();
  Eigen::Index rows = problem.objective ? 1 : 0;
  for (const auto& b : problem.blocks)
    if (b.kind == BlockKind::Strict || b.kind == BlockKind::NonStrict) rows += b.size() * b.size();
  Matrix op = Matrix::Zero(rows, m_full);
  Eigen::Index at = 0;
  if (problem.objective) op.row(at++) = problem.objective->transpose();
  for (const auto& b : problem.blocks) {
    if (b.kind != BlockKind::Strict && b.kind != BlockKind::NonStrict) continue;
    for (const auto& [i, f] : b.terms) op.block(at, i, f.size(), 1) = Eigen::Map<const Vector>(f.data(), f.size());
    at += b.size() * b.size();
  }
  const Matrix reduced = op * red.basis;
  if (reduced.cols() == 0) return red.basis;
  Eigen::SelfAdjointEigenSolver<Matrix> es(reduced.transpose() * reduced);
  const Vector ev = es.eigenvalues();
  const double cut = 1e-22 * std::max(1.0, ev.maxCoeff());
  Eigen::Index keep = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) keep += ev(i) > cut ? 1 : 0;
  return red.basis * es.eigenvectors().rightCols(keep);
}

}  // namespace detail

/// Solves the problem in two phases: maximize a common shift of all inequality blocks
/// (feasibility), then minimize the objective from the strictly feasible point found.
inline SdpSolution solve(const SdpProblem& problem, const SolverOptions& opts = {}) {
  SdpSolution sol;
  const int m_full = problem.scalar_count();
  const detail::AffineReduction red = detail::reduce_equalities(problem);
  if (!red.consistent) {
    sol.status = SolveStatus::Infeasible;
    sol.diagnostics = "equality constraints are inconsistent";
    return sol;
  }
  const Matrix basis = detail::range_basis(problem, red);
  const int m = static_cast<int>(basis.cols());

  // reduced blocks F(t) = F₀' + Σ tₗ F'ₗ
  struct Reduced {
    Matrix f0;
    std::vector<std::pair<int, Matrix>> terms;
    double shift;
  };
  std::vector<Reduced> blocks;
  bool homogeneous = true;
  for (const auto& block : problem.blocks) {
    if (block.kind == BlockKind::Equality || block.kind == BlockKind::Check || block.size() == 0) continue;
    Reduced r;
    r.f0 = block.evaluate(red.particular);
    std::vector<Matrix> dense(m);
    for (int l = 0; l < m; ++l) dense[l] = Matrix::Zero(block.size(), block.size());
    for (const auto& [i, f] : block.terms)
      for (int l = 0; l < m; ++l)
        if (basis(i, l) != 0.0) dense[l] += basis(i, l) * f;
    for (int l = 0; l < m; ++l)
      if (dense[l].cwiseAbs().maxCoeff() > 1e-15) r.terms.emplace_back(l, std::move(dense[l]));
    r.shift = block.kind == BlockKind::Strict ? opts.margin_factor * block.margin() : 0.0;
    if (r.f0.cwiseAbs().maxCoeff() > 0.0) homogeneous = false;
    blocks.push_back(std::move(r));
  }

  auto make_program = [&](bool with_shift_var) {
    detail::ConicProgram p;
    p.m = m + (with_shift_var ? 1 : 0);
    for (const auto& r : blocks) {
      const Eigen::Index n = r.f0.rows();
      p.c.push_back(r.f0 - r.shift * Matrix::Identity(n, n));
      std::vector<std::pair<int, Matrix>> a;
      for (const auto& [l, f] : r.terms) a.emplace_back(l, -f);
      if (with_shift_var) a.emplace_back(m, Matrix::Identity(n, n));
      p.a.push_back(std::move(a));
    }
    p.lp_a = Matrix::Zero(2 * m, p.m);
    p.lp_c = Vector::Constant(2 * m, opts.variable_bound);
    for (int l = 0; l < m; ++l) {
      p.lp_a(2 * l, l) = 1.0;
      p.lp_a(2 * l + 1, l) = -1.0;
    }
    return p;
  };

  // phase 1: maximize s subject to F(t) − shift·I ⪰ s·I
  detail::ConicProgram p1 = make_program(true);
  p1.b = Vector::Zero(m + 1);
  p1.b(m) = 1.0;
  // cap the shift so homogeneous problems keep a bounded optimal face
  p1.lp_a.conservativeResize(2 * m + 1, Eigen::NoChange);
  p1.lp_a.row(2 * m).setZero();
  p1.lp_a(2 * m, m) = 1.0;
  p1.lp_c.conservativeResize(2 * m + 1);
  p1.lp_c(2 * m) = 1.0;
  double s0 = 0.0;
  for (const auto& cj : p1.c) s0 = std::min(s0, min_eig(cj));
  Vector y0 = Vector::Zero(m + 1);
  y0(m) = s0 - 1.0;
  detail::IpmResult r1 = detail::maximize(p1, y0, opts.tolerance * 1e-2, opts.gap * 1e-2, opts.max_iterations);
  sol.iterations = r1.iterations;
  const double s_star = r1.y(m);
  sol.best_margin = s_star;
  Vector t = r1.y.head(m);
  sol.bound_active = m > 0 && t.cwiseAbs().maxCoeff() >= 0.999 * opts.variable_bound;

  std::ostringstream diag;
  diag << "phase1: " << r1.message << ", shift " << s_star << ", iterations " << r1.iterations;
  if (!(s_star > 0.0)) {
    const bool proven = r1.converged && (homogeneous || !sol.bound_active);
    sol.status = proven ? SolveStatus::Infeasible : SolveStatus::Inaccurate;
    sol.variables = problem.unpack(red.particular + basis * t);
    diag << (proven ? "; no strictly feasible point exists" : "; feasibility undecided");
    sol.diagnostics = diag.str();
    return sol;
  }

  if (problem.objective) {
    detail::ConicProgram p2 = make_program(false);
    p2.b = -(basis.transpose() * *problem.objective);
    detail::IpmResult r2 = detail::maximize(p2, t, opts.tolerance, opts.gap, opts.max_iterations);
    sol.iterations += r2.iterations;
    diag << "; phase2: " << r2.message << ", iterations " << r2.iterations;
    t = r2.y;
    sol.bound_active = m > 0 && t.cwiseAbs().maxCoeff() >= 0.999 * opts.variable_bound;
    sol.max_primal_residual = r2.primal_infeasibility;
    if (!r2.converged) sol.status = SolveStatus::Inaccurate;
  }

  const Vector y = red.particular + basis * t;
  sol.variables = problem.unpack(y);
  if (problem.objective) sol.objective_value = problem.objective->dot(y);
  const ResidualReport report = check_solution(problem, sol.variables, opts.tolerance);
  for (const auto& b : report.blocks) sol.min_block_eig.push_back(b.min_eig);
  for (const auto& b : report.blocks)
    if (b.kind == BlockKind::Equality) sol.max_primal_residual = std::max(sol.max_primal_residual, b.equality_norm);
  if (sol.status != SolveStatus::Inaccurate) sol.status = report.passed ? SolveStatus::Feasible : SolveStatus::Inaccurate;
  if (!report.passed) diag << "; residual check failed (max violation " << report.max_violation << ")";
  if (sol.bound_active && problem.objective) diag << "; variable bound active";
  sol.diagnostics = diag.str();
  (void)m_full;
  return sol;
}

}  // namespace iqc

#endif  // IQC_SDP_SOLVER_HPP
