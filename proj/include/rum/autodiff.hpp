#pragma once

// Backward pass of the projection layer. With c = B^T P_M (rho_hat - u) and
// d xi*/d c = H^-1 at the converged barrier, the gradient with respect to
// rho_hat is P_M B w where H w = B^T (dJ/d rho*).

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rum/lattice.hpp"
#include "rum/operators.hpp"
#include "rum/projection.hpp"

namespace rum {

struct BackwardOptions {
  double rel_tol = 1e-10;
  /// 0 selects 10 * |B|.
  std::size_t max_iter = 0;
};

struct BackwardReport {
  Vector<double> grad_rho_hat;
  std::size_t cg_iterations = 0;
  double residual = 0.0;
};

/// Throws ConfigError on a non-converged result and NonConvergenceError when
/// the adjoint solve misses its tolerance.
BackwardReport backward_with_report(const Lattice& lat, const ProjectionResult& result,
                                    const Vector<double>& grad_rho_star, const ObservationMask& mask,
                                    const BackwardOptions& opts = {});

inline Vector<double> backward(const Lattice& lat, const ProjectionResult& result, const Vector<double>& grad_rho_star,
                               const ObservationMask& mask, const BackwardOptions& opts = {}) {
  return backward_with_report(lat, result, grad_rho_star, mask, opts).grad_rho_hat;
}

/// Solves H w = g with H assembled from the result's clamped barrier.
Vector<double> solve_converged_hessian(const Lattice& lat, const ProjectionResult& result, const Vector<double>& g,
                                       const ObservationMask& mask, const BackwardOptions& opts = {});

/// xi on the face of the feasible set where exactly the pairs flagged in
/// `active` are tight: the dense KKT solve of the equality-constrained QP.
/// Used to strip the barrier bias from a converged IPM iterate. Dense, so it
/// is limited to n <= 8.
Vector<double> active_face_solution(const Lattice& lat, const Vector<double>& c, const ObservationMask& mask,
                                    const std::vector<bool>& active);

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Instances with min_i max(s_i, lambda_i) at or below this are degenerate.
  double margin_guard = 1e-4;
  /// Relative errors use max(|a_i|, |f_i|, floor_fraction * ||a||_inf).
  double floor_fraction = 1e-3;
  IpmOptions ipm;
  BackwardOptions backward;
  unsigned threads = 0;
};

struct GradCheckReport {
  Vector<double> adjoint;
  Vector<double> finite_difference;
  double max_rel_error = 0.0;
  std::size_t worst_coordinate = 0;
  double margin = 0.0;
  std::size_t active_pairs = 0;
  bool degenerate = false;
  bool passed = false;
};

/// Compares backward() for J = <g, rho*> against central differences that
/// re-solve the projection at rho_hat +- h e_i for every observed coordinate.
/// Each re-solve is refined onto its own active face so the differences see
/// the solution map itself rather than the barrier-smoothed one.
GradCheckReport gradient_check(const Lattice& lat, const Vector<double>& rho_hat, const Vector<double>& g,
                               const ObservationMask& mask, const GradCheckOptions& opts = {});

struct SeededGradCheck {
  GradCheckReport report;
  std::uint64_t seed = 0;
  /// Draws rejected as degenerate before this one.
  int rejected = 0;
};

/// Random row-normalized rho_hat and Gaussian g on the full mask, redrawn up
/// to `attempts` times until the instance clears the margin guard. If every
/// draw is degenerate the last one is returned with degenerate = true.
SeededGradCheck seeded_gradient_check(int n, std::uint64_t seed, const GradCheckOptions& opts = {}, int attempts = 10);

/// The squared distance J* as a model-theory conflict score.
inline double conflict_measure(const ProjectionResult& result) noexcept { return result.distance_sq; }

}  // namespace rum
