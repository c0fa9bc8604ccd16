#pragma once

// Predictor-corrector interior point method for the reduced projection QP
//
//   min 1/2 xi^T Q_M xi - c^T xi   s.t.   KB xi + b >= 0,
//
// with every Newton system reduced to the SPD Schur complement
// H = Q_M + (KB)^T S^-1 Lambda (KB) and solved by tree-preconditioned CG.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>

#include "rum/krylov.hpp"
#include "rum/lattice.hpp"
#include "rum/operators.hpp"
#include "rum/tree_precond.hpp"

namespace rum {

struct IpmOptions {
  double tau = 0.995;
  double mu_tol = 1e-9;
  double residual_tol = 1e-8;
  int max_iter = 100;
  /// Inner CG tolerance: clamp(factor * min(1, mu/mu0), floor, ceiling).
  double cg_rel_tol_factor = 0.1;
  double cg_floor = 1e-12;
  double cg_ceiling = 1e-2;
  /// 0 selects 10 * |B|.
  std::size_t cg_max_iter = 0;
  double rebuild_log10_threshold = 1.0;
  std::size_t rebuild_cg_iter_threshold = 200;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

enum class IpmStatus { kRunning, kConverged, kMaxIterations, kStalled, kBreakdown };

const char* to_string(IpmStatus status);

struct IpmState {
  Vector<double> xi;
  Vector<double> s;
  Vector<double> lambda;
  double mu = 0.0;
  int iteration = 0;

  // Preconditioner snapshot: the tree and the barrier it was built from.
  std::shared_ptr<const SpanningTree> tree;
  Vector<double> d_at_build;
  std::size_t last_cg_iters = 0;

  IpmStatus status = IpmStatus::kRunning;
  double mu0 = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::size_t total_cg_iterations = 0;
  std::size_t tree_builds = 0;
  std::size_t cg_failures = 0;
  std::string message;

  bool converged() const noexcept { return status == IpmStatus::kConverged; }
};

/// The reduced Newton operator H together with its tree preconditioner. The
/// forward IPM steps and the backward adjoint solve both go through this type;
/// the scalar parameter lets the adjoint solve run in extended precision.
template <typename Scalar>
class BasicNewtonSystem {
 public:
  using VectorS = Vector<Scalar>;

  BasicNewtonSystem(const Lattice& lat, const ObservationMask& mask, VectorS d,
                    std::shared_ptr<const SpanningTree> tree)
      : lat_(&lat), mask_(&mask), d_(std::move(d)), tree_(std::move(tree)) {
    check_barrier(lat, d_);
    if (!tree_ || tree_->alternatives() != lat.alternatives()) throw ConfigError("Newton system needs a matching tree");
  }

  VectorS apply(const VectorS& x) const {
    VectorS kb = apply_KB(*lat_, x);
    kb.array() *= d_.array();
    return apply_Q(*lat_, *mask_, x) + apply_KB_T(*lat_, kb);
  }

  VectorS precondition(const VectorS& r) const { return apply_M_inv(*lat_, *tree_, d_, r); }

  SolveReport<Scalar> solve(const VectorS& rhs, const VectorS& x0, double rel_tol, std::size_t max_iter = 0) const {
    return pcg_solve<Scalar>([this](const VectorS& x) { return apply(x); },
                             [this](const VectorS& r) { return precondition(r); }, rhs, x0, rel_tol, max_iter);
  }

  const VectorS& barrier() const noexcept { return d_; }
  const SpanningTree& tree() const noexcept { return *tree_; }

 private:
  const Lattice* lat_;
  const ObservationMask* mask_;
  VectorS d_;
  std::shared_ptr<const SpanningTree> tree_;
};

using NewtonSystem = BasicNewtonSystem<double>;

struct NewtonStep {
  Vector<double> dxi;
  Vector<double> ds;
  Vector<double> dlambda;
  SolveReport<double> cg;
  double rhs_norm = 0.0;
};

/// Solves the 3x3 block system
///   [Q 0 -(KB)^T; KB -I 0; 0 Lambda S] (dxi, ds, dlambda) = (b1, b2, b3)
/// by CG on H dxi = b1 + (KB)^T S^-1 (b3 + Lambda b2), then back-substitution.
NewtonStep newton_reduce(const Lattice& lat, const NewtonSystem& system, const IpmState& state,
                         const Vector<double>& b1, const Vector<double>& b2, const Vector<double>& b3,
                         const Vector<double>& dxi_guess, double cg_rel_tol, std::size_t cg_max_iter = 0);

/// xi0 = R(rho_int - u), s0 = max(KB xi0 + b, 1e-2), lambda0 = 1.
IpmState initialize_state(const Lattice& lat, const ObservationMask& mask);

struct KktResiduals {
  double stationarity = 0.0;     // ||Q xi - c - (KB)^T lambda||_inf
  double primal = 0.0;           // ||KB xi + b - s||_inf
  double complementarity = 0.0;  // max_i s_i lambda_i
};

KktResiduals kkt_residuals(const Lattice& lat, const IpmState& state, const Vector<double>& c,
                           const ObservationMask& mask);

/// Runs the predictor-corrector method from `warm` (or the default start).
/// Non-convergence is reported through the returned state's status.
IpmState solve_qp(const Lattice& lat, const Vector<double>& c, const ObservationMask& mask,
                  const IpmOptions& opts = {}, const std::optional<IpmState>& warm = std::nullopt);

}  // namespace rum
