#include "rum/projection.hpp"

#include <cmath>

#include "rum/parallel.hpp"

namespace rum {

double min_block_marschak(const Lattice& lat, const Vector<double>& rho) { return apply_K(lat, rho).minCoeff(); }

double max_row_sum_error(const Lattice& lat, const Vector<double>& rho) {
  double worst = 0.0;
  for (std::uint32_t d = 1; d < lat.vertex_count(); ++d) {
    const double sum = rho.segment(static_cast<Eigen::Index>(lat.offset({d})), std::popcount(d)).sum();
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

double complementarity_margin(const ProjectionResult& result) {
  return result.s_star.cwiseMax(result.lambda_star).minCoeff();
}

ProjectionResult project(const Lattice& lat, const Vector<double>& rho_hat, const ObservationMask& mask,
                         const IpmOptions& opts) {
  detail::check_pair_length(lat, rho_hat);
  if (mask.alternatives() != lat.alternatives()) throw ConfigError("mask and lattice disagree on n");
  for (Subset d : mask.sets()) {
    const auto off = static_cast<Eigen::Index>(lat.offset(d));
    if (!rho_hat.segment(off, d.size()).allFinite()) {
      throw ValidationError("observed coordinates of set " + to_hex(d) + " are not finite");
    }
  }

  const Vector<double> c = masked_linear_term(lat, rho_hat, mask);
  const IpmState state = solve_qp(lat, c, mask, opts);

  ProjectionResult out;
  out.xi_star = state.xi;
  out.rho_star = apply_B(lat, state.xi) + unit_choice(lat);
  out.lambda_star = state.lambda;
  out.s_star = state.s;
  // At the returned mu > 0 an active pair only has lambda/s ~ lambda^2/mu. The
  // Jacobian lives at mu -> 0, where lambda/s is 0 off the active set and
  // infinite on it, so the clamp sends each pair to one of its bounds.
  out.d_star = (state.s.array() < state.lambda.array()).select(kBarrierClampHigh, Vector<double>::Constant(state.s.size(), kBarrierClampLow));
  out.converged = state.converged();
  out.status = state.status;
  out.ipm_iterations = state.iteration;
  out.total_cg_iterations = state.total_cg_iterations;
  out.tree_builds = state.tree_builds;
  out.message = state.message;

  Vector<double> masked_rho_hat = Vector<double>::Zero(rho_hat.size());
  for (Subset d : mask.sets()) {
    const auto off = static_cast<Eigen::Index>(lat.offset(d));
    masked_rho_hat.segment(off, d.size()) = rho_hat.segment(off, d.size());
  }
  out.distance_sq = apply_mask(lat, mask, out.rho_star - masked_rho_hat).squaredNorm();
  out.min_bm = min_block_marschak(lat, out.rho_star);
  out.max_row_sum_error = max_row_sum_error(lat, out.rho_star);
  out.kkt = kkt_residuals(lat, state, c, mask);
  return out;
}

std::vector<ProjectionResult> project_batch(const Lattice& lat, const std::vector<Vector<double>>& inputs,
                                            const ObservationMask& mask, const IpmOptions& opts, unsigned threads) {
  std::vector<ProjectionResult> results(inputs.size());
  parallel_for(
      inputs.size(),
      [&](std::size_t i) {
        try {
          results[i] = project(lat, inputs[i], mask, opts);
        } catch (const std::exception& e) {
          results[i] = ProjectionResult{};
          results[i].message = e.what();
        }
      },
      threads);
  return results;
}

}  // namespace rum
