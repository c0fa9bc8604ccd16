#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rum/errors.hpp"
#include "rum/operators.hpp"

namespace rum {

template <typename Scalar>
struct SolveReport {
  Vector<Scalar> solution;
  std::size_t iterations = 0;
  /// ||A x_k - b||_2 for k = 0..iterations.
  std::vector<double> residual_history;
  bool converged = false;

  double final_residual() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
};

/// z = r; the unpreconditioned baseline.
struct IdentityPreconditioner {
  template <typename Derived>
  Vector<typename Derived::Scalar> operator()(const Eigen::MatrixBase<Derived>& r) const {
    return r;
  }
};

/// Residuals are recomputed as b - A x every this many iterations and before
/// convergence is accepted.
inline constexpr std::size_t kTrueResidualPeriod = 50;

/// Preconditioned conjugate gradients for SPD `apply_A` with SPD
/// `apply_Minv`. Stops when ||A x - b|| <= rel_tol ||b|| or after max_iter
/// iterations (0 selects 10 * dim). Non-convergence is reported, not thrown.
template <typename Scalar, typename ApplyA, typename ApplyMinv>
SolveReport<Scalar> pcg_solve(ApplyA&& apply_A, ApplyMinv&& apply_Minv, const Vector<Scalar>& rhs,
                              const Vector<Scalar>& x0, double rel_tol, std::size_t max_iter = 0) {
  if (!(rel_tol > 0)) throw ConfigError("CG relative tolerance must be positive");
  if (x0.size() != rhs.size()) throw ConfigError("CG warm start has the wrong length");
  const auto dim = static_cast<std::size_t>(rhs.size());
  if (max_iter == 0) max_iter = 10 * (dim == 0 ? 1 : dim);

  SolveReport<Scalar> report;
  const double bnorm = static_cast<double>(rhs.norm());
  if (dim == 0 || bnorm == 0.0) {
    report.solution = Vector<Scalar>::Zero(rhs.size());
    report.residual_history.push_back(0.0);
    report.converged = true;
    return report;
  }
  const double target = rel_tol * bnorm;

  Vector<Scalar> x = x0;
  Vector<Scalar> r = rhs - apply_A(x);
  double rnorm = static_cast<double>(r.norm());
  if (!std::isfinite(rnorm)) throw NumericalBreakdown("non-finite initial residual in CG", 0);
  report.residual_history.push_back(rnorm);
  if (rnorm <= target) {
    report.solution = std::move(x);
    report.converged = true;
    return report;
  }

  Vector<Scalar> z = apply_Minv(r);
  Vector<Scalar> p = z;
  Scalar rz = r.dot(z);
  if (rz < Scalar(0)) throw OperatorContractError("preconditioner is not positive definite", 0);

  std::size_t k = 0;
  while (k < max_iter) {
    const Vector<Scalar> ap = apply_A(p);
    const Scalar pap = p.dot(ap);
    if (!std::isfinite(static_cast<double>(pap))) throw NumericalBreakdown("non-finite curvature in CG", k + 1);
    if (pap < Scalar(0)) throw OperatorContractError("operator is not positive definite (p^T A p < 0)", k + 1);
    if (pap == Scalar(0)) break;
    const Scalar alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    ++k;
    if (k % kTrueResidualPeriod == 0) r = rhs - apply_A(x);
    rnorm = static_cast<double>(r.norm());
    if (!std::isfinite(rnorm)) throw NumericalBreakdown("non-finite residual in CG", k);
    report.residual_history.push_back(rnorm);

    bool restart = false;
    if (rnorm <= target) {
      r = rhs - apply_A(x);
      rnorm = static_cast<double>(r.norm());
      report.residual_history.back() = rnorm;
      if (rnorm <= target) {
        report.converged = true;
        break;
      }
      restart = true;
    }

    z = apply_Minv(r);
    const Scalar rz_next = r.dot(z);
    if (rz_next < Scalar(0)) throw OperatorContractError("preconditioner is not positive definite", k);
    if (restart) {
      p = z;
    } else {
      p = z + (rz_next / rz) * p;
    }
    rz = rz_next;
  }
  report.iterations = k;
  report.solution = std::move(x);
  return report;
}

}  // namespace rum
