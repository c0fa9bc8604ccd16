#include "rum/autodiff.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>

#include "rum/ipm.hpp"
#include "rum/parallel.hpp"
#include "rum/random.hpp"
#include "rum/tree_precond.hpp"

namespace rum {

namespace {

using VectorL = Vector<long double>;

std::string format_residual(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", value);
  return buf;
}

// The clamped barrier spans sixteen decades, which puts the double-precision
// residual floor of this solve near 1e-8; extended precision clears 1e-10.
SolveReport<long double> hessian_solve(const Lattice& lat, const ProjectionResult& result, const Vector<double>& g,
                                       const ObservationMask& mask, const BackwardOptions& opts) {
  if (!result.converged) throw ConfigError("backward pass requires a converged projection");
  detail::check_reduced_length(lat, g);
  if (!g.allFinite()) throw ValidationError("upstream gradient is not finite");
  auto tree = std::make_shared<const SpanningTree>(build_tree(lat, result.d_star));
  const BasicNewtonSystem<long double> system(lat, mask, result.d_star.cast<long double>(), std::move(tree));
  const VectorL rhs = g.cast<long double>();
  SolveReport<long double> report = system.solve(rhs, VectorL::Zero(rhs.size()), opts.rel_tol, opts.max_iter);
  if (!report.converged) {
    throw NonConvergenceError("adjoint CG solve stopped at relative residual " +
                                  format_residual(report.final_residual() / static_cast<double>(rhs.norm())) +
                                  " after " + std::to_string(report.iterations) + " iterations",
                              report.final_residual());
  }
  return report;
}

constexpr int kMaxDenseAlternatives = 8;

Eigen::MatrixXd dense_columns(Eigen::Index rows, Eigen::Index cols, auto&& apply) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) out.col(j) = apply(Vector<double>::Unit(cols, j));
  return out;
}

std::vector<bool> active_pairs(const ProjectionResult& r) {
  std::vector<bool> active(static_cast<std::size_t>(r.s_star.size()));
  for (Eigen::Index i = 0; i < r.s_star.size(); ++i) active[static_cast<std::size_t>(i)] = r.s_star[i] < r.lambda_star[i];
  return active;
}

}  // namespace

Vector<double> active_face_solution(const Lattice& lat, const Vector<double>& c, const ObservationMask& mask,
                                    const std::vector<bool>& active) {
  if (lat.alternatives() > kMaxDenseAlternatives) throw ConfigError("dense active-face solve is limited to n <= 8");
  detail::check_reduced_length(lat, c);
  if (active.size() != lat.pair_count()) throw ConfigError("active flags must cover every pair");
  const auto r = static_cast<Eigen::Index>(lat.reduced_count());
  const auto pairs = static_cast<Eigen::Index>(lat.pair_count());
  const Eigen::MatrixXd g = dense_columns(pairs, r, [&](const Vector<double>& e) { return apply_KB(lat, e); });
  const Eigen::MatrixXd q = dense_columns(r, r, [&](const Vector<double>& e) { return apply_Q(lat, mask, e); });
  const Vector<double> b = unit_flow(lat);

  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < pairs; ++i) {
    if (active[static_cast<std::size_t>(i)]) rows.push_back(i);
  }
  const auto a = static_cast<Eigen::Index>(rows.size());
  // [Q G_A^T; G_A 0] (xi, -lambda_A) = (c, -b_A); the face may hold more
  // tight pairs than |B|, so the minimum-norm solution is taken.
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(r + a, r + a);
  Vector<double> rhs(r + a);
  kkt.topLeftCorner(r, r) = q;
  rhs.head(r) = c;
  for (Eigen::Index k = 0; k < a; ++k) {
    kkt.block(r + k, 0, 1, r) = g.row(rows[static_cast<std::size_t>(k)]);
    kkt.block(0, r + k, r, 1) = g.row(rows[static_cast<std::size_t>(k)]).transpose();
    rhs[r + k] = -b[rows[static_cast<std::size_t>(k)]];
  }
  return kkt.completeOrthogonalDecomposition().solve(rhs).head(r);
}

GradCheckReport gradient_check(const Lattice& lat, const Vector<double>& rho_hat, const Vector<double>& g,
                               const ObservationMask& mask, const GradCheckOptions& opts) {
  detail::check_pair_length(lat, rho_hat);
  detail::check_pair_length(lat, g);
  if (!(opts.step > 0) || !(opts.tolerance >= 0) || !(opts.floor_fraction >= 0)) {
    throw ConfigError("gradient check needs step > 0, tolerance >= 0 and floor >= 0");
  }
  const ProjectionResult base = project(lat, rho_hat, mask, opts.ipm);
  if (!base.converged) throw NonConvergenceError("gradient check base projection: " + base.message, 0.0);

  GradCheckReport out;
  out.margin = complementarity_margin(base);
  out.degenerate = !(out.margin > opts.margin_guard);
  const std::vector<bool> active = active_pairs(base);
  out.active_pairs = static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
  out.adjoint = backward(lat, base, g, mask, opts.backward);
  out.finite_difference = Vector<double>::Zero(rho_hat.size());

  auto objective = [&](const Vector<double>& x) {
    const ProjectionResult r = project(lat, x, mask, opts.ipm);
    if (!r.converged) throw NonConvergenceError("gradient check re-solve: " + r.message, 0.0);
    if (lat.reduced_count() == 0) return g.dot(r.rho_star);
    const Vector<double> xi = active_face_solution(lat, masked_linear_term(lat, x, mask), mask, active_pairs(r));
    return g.dot(apply_B(lat, xi) + unit_choice(lat));
  };

  std::vector<Eigen::Index> coords;
  for (Subset d : mask.sets()) {
    for (int k = 0; k < std::popcount(d.bits); ++k) coords.push_back(static_cast<Eigen::Index>(lat.offset(d)) + k);
  }
  parallel_for(
      coords.size(),
      [&](std::size_t k) {
        const Eigen::Index i = coords[k];
        Vector<double> plus = rho_hat, minus = rho_hat;
        plus[i] += opts.step;
        minus[i] -= opts.step;
        out.finite_difference[i] = (objective(plus) - objective(minus)) / (2 * opts.step);
      },
      opts.threads);

  const double floor = opts.floor_fraction * (out.adjoint.size() ? out.adjoint.cwiseAbs().maxCoeff() : 0.0);
  for (Eigen::Index i = 0; i < rho_hat.size(); ++i) {
    const double a = out.adjoint[i], f = out.finite_difference[i];
    const double scale = std::max({std::abs(a), std::abs(f), floor});
    const double err = scale > 0 ? std::abs(a - f) / scale : 0.0;
    if (err > out.max_rel_error) {
      out.max_rel_error = err;
      out.worst_coordinate = static_cast<std::size_t>(i);
    }
  }
  out.passed = out.max_rel_error < opts.tolerance;
  return out;
}

SeededGradCheck seeded_gradient_check(int n, std::uint64_t seed, const GradCheckOptions& opts, int attempts) {
  if (attempts < 1) throw ConfigError("gradient check needs at least one attempt");
  const Lattice lat(n);
  const ObservationMask mask = ObservationMask::full(n);
  SeededGradCheck out;
  out.seed = seed;
  for (int k = 0; k < attempts; ++k) {
    auto rng = seeded_stream(seed, static_cast<std::uint64_t>(k));
    const Vector<double> rho_hat = random_choice_vector(lat, rng);
    const Vector<double> g = gaussian_vector(static_cast<Eigen::Index>(lat.pair_count()), rng);
    out.report = gradient_check(lat, rho_hat, g, mask, opts);
    if (!out.report.degenerate) return out;
    ++out.rejected;
  }
  return out;
}

Vector<double> solve_converged_hessian(const Lattice& lat, const ProjectionResult& result, const Vector<double>& g,
                                       const ObservationMask& mask, const BackwardOptions& opts) {
  if (lat.reduced_count() == 0) return Vector<double>::Zero(0);
  return hessian_solve(lat, result, g, mask, opts).solution.cast<double>();
}

BackwardReport backward_with_report(const Lattice& lat, const ProjectionResult& result,
                                    const Vector<double>& grad_rho_star, const ObservationMask& mask,
                                    const BackwardOptions& opts) {
  detail::check_pair_length(lat, grad_rho_star);
  BackwardReport out;
  if (lat.reduced_count() == 0) {
    if (!result.converged) throw ConfigError("backward pass requires a converged projection");
    out.grad_rho_hat = Vector<double>::Zero(static_cast<Eigen::Index>(lat.pair_count()));
    return out;
  }
  const Vector<double> g_xi = apply_B_T(lat, grad_rho_star);
  const auto report = hessian_solve(lat, result, g_xi, mask, opts);
  out.grad_rho_hat = apply_mask(lat, mask, apply_B(lat, report.solution)).cast<double>();
  out.cg_iterations = report.iterations;
  out.residual = report.final_residual();
  return out;
}

}  // namespace rum
