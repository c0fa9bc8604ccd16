#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rum/ipm.hpp"
#include "rum/lattice.hpp"
#include "rum/operators.hpp"

namespace rum {

/// Bounds applied to lambda*/s* before the barrier is reused for gradients.
inline constexpr double kBarrierClampLow = 1e-8;
inline constexpr double kBarrierClampHigh = 1e8;
/// Tolerance on the nonnegativity of the Block-Marschak values of rho*.
inline constexpr double kFeasibilityTol = 1e-8;

struct ProjectionResult {
  Vector<double> rho_star;
  Vector<double> xi_star;
  /// ||P_M (rho* - rho_hat)||^2.
  double distance_sq = 0.0;
  Vector<double> lambda_star;
  Vector<double> s_star;
  /// clamp(lambda*/s*, 1e-8, 1e8).
  Vector<double> d_star;

  bool converged = false;
  IpmStatus status = IpmStatus::kRunning;
  int ipm_iterations = 0;
  std::size_t total_cg_iterations = 0;
  std::size_t tree_builds = 0;

  // Certificate values recomputed from rho*.
  double min_bm = 0.0;
  double max_row_sum_error = 0.0;
  KktResiduals kkt;
  std::string message;
};

/// Nearest RUM-consistent choice vector to rho_hat on the observed sets.
/// Unobserved coordinates of rho_hat are never read.
ProjectionResult project(const Lattice& lat, const Vector<double>& rho_hat, const ObservationMask& mask,
                         const IpmOptions& opts = {});

/// Independent projections in input order. Failures are reported per item
/// (converged = false with a message) and never abort the batch.
std::vector<ProjectionResult> project_batch(const Lattice& lat, const std::vector<Vector<double>>& inputs,
                                            const ObservationMask& mask, const IpmOptions& opts = {},
                                            unsigned threads = 0);

/// min over pairs of K rho.
double min_block_marschak(const Lattice& lat, const Vector<double>& rho);
/// max over sets D of |sum_{x in D} rho(D,x) - 1|.
double max_row_sum_error(const Lattice& lat, const Vector<double>& rho);
/// min_i max(s_i, lambda_i); zero-ish values flag weak strict complementarity.
double complementarity_margin(const ProjectionResult& result);

}  // namespace rum
