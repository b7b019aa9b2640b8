#include "phif/krylov.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "phif/factorization.hpp"
#include "phif/sparse.hpp"

namespace phif {

PcgResult pcg(const LinearOperator& A, const Vector& b, const LinearOperator& precond, const PcgOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  PcgResult out;
  out.x = Vector::Zero(b.size());
  SolveReport& rep = out.report;

  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    rep.history.push_back(0.0);
    return out;
  }
  auto M = [&](const Vector& r) -> Vector { return precond ? precond(r) : r; };

  Vector r = b;
  Vector z = M(r);
  Vector p = z;
  double rz = r.dot(z);
  double rel = 1.0;
  rep.history.push_back(rel);

  int k = 0;
  while (rel > opts.tol) {
    if (k >= opts.maxit) {
      rep.hit_maxit = true;
      break;
    }
    const Vector Ap = A(p);
    const double pAp = p.dot(Ap);
    if (!std::isfinite(pAp) || !std::isfinite(rz) || pAp <= 0.0)
      throw NumericalBreakdown("CG breakdown: non-positive or non-finite curvature");
    const double alpha = rz / pAp;
    out.x.noalias() += alpha * p;
    ++k;
    if (opts.refresh_every > 0 && k % opts.refresh_every == 0) r = b - A(out.x);
    else r.noalias() -= alpha * Ap;

    rel = r.norm() / bnorm;
    if (!std::isfinite(rel)) throw NumericalBreakdown("CG breakdown: non-finite residual");
    rep.history.push_back(rel);
    if (opts.on_iterate) opts.on_iterate(k, out.x);
    if (rel <= opts.tol) break;

    z = M(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  rep.iterations = k;
  rep.relative_residual = rel;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

PcgResult pcg(const SymSparseMatrix& A, const Vector& b, const Factorization* F, const PcgOptions& opts) {
  LinearOperator op = [&](const Vector& x) { return A.multiply(x); };
  LinearOperator pre;
  if (F) pre = [F](const Vector& r) { return F->apply_inverse(r); };
  return pcg(op, b, pre, opts);
}

void write_history_csv(std::ostream& out, const SolveReport& report) {
  out << "iteration,relative_residual\n" << std::setprecision(17);
  for (std::size_t k = 0; k < report.history.size(); ++k) out << k << ',' << report.history[k] << '\n';
}

}  // namespace phif
