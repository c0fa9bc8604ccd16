#include "rum/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rum {

namespace {

constexpr double kInitialSlackFloor = 1e-2;
constexpr double kStallStep = 1e-10;
constexpr int kStallLimit = 5;

double inf_norm(const Vector<double>& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Largest alpha in (0, 1] with v + alpha dv >= (1 - fraction) v.
double step_to_boundary(const Vector<double>& v, const Vector<double>& dv, double fraction) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0) alpha = std::min(alpha, -fraction * v[i] / dv[i]);
  }
  return alpha;
}

double max_log10_drift(const Vector<double>& d, const Vector<double>& built) {
  double drift = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    drift = std::max(drift, std::abs(std::log10(d[i]) - std::log10(built[i])));
  }
  return drift;
}

}  // namespace

void IpmOptions::validate() const {
  if (!(tau > 0 && tau < 1)) throw ConfigError("tau must lie in (0, 1)");
  if (!(mu_tol > 0) || !(residual_tol > 0)) throw ConfigError("IPM tolerances must be positive");
  if (max_iter < 1) throw ConfigError("IPM max_iter must be at least 1");
  if (!(cg_floor > 0) || !(cg_ceiling >= cg_floor) || !(cg_rel_tol_factor > 0)) {
    throw ConfigError("CG tolerance schedule must satisfy 0 < floor <= ceiling and factor > 0");
  }
  if (!(rebuild_log10_threshold > 0)) throw ConfigError("rebuild log10 threshold must be positive");
}

const char* to_string(IpmStatus status) {
  switch (status) {
    case IpmStatus::kRunning:
      return "running";
    case IpmStatus::kConverged:
      return "converged";
    case IpmStatus::kMaxIterations:
      return "max-iterations";
    case IpmStatus::kStalled:
      return "stalled";
    case IpmStatus::kBreakdown:
      return "numerical-breakdown";
  }
  return "unknown";
}

NewtonStep newton_reduce(const Lattice& lat, const NewtonSystem& system, const IpmState& state,
                         const Vector<double>& b1, const Vector<double>& b2, const Vector<double>& b3,
                         const Vector<double>& dxi_guess, double cg_rel_tol, std::size_t cg_max_iter) {
  const Vector<double> scaled = (b3.array() + state.lambda.array() * b2.array()) / state.s.array();
  const Vector<double> rhs = b1 + apply_KB_T(lat, scaled);

  NewtonStep step;
  step.rhs_norm = rhs.norm();
  step.cg = system.solve(rhs, dxi_guess, cg_rel_tol, cg_max_iter);
  step.dxi = step.cg.solution;
  step.ds = apply_KB(lat, step.dxi) - b2;
  step.dlambda = (b3.array() - state.lambda.array() * step.ds.array()) / state.s.array();
  return step;
}

IpmState initialize_state(const Lattice& lat, const ObservationMask& mask) {
  (void)mask;
  IpmState state;
  state.xi = apply_R(lat, uniform_choice(lat) - unit_choice(lat));
  state.s = (apply_KB(lat, state.xi) + unit_flow(lat)).cwiseMax(kInitialSlackFloor);
  state.lambda = Vector<double>::Ones(static_cast<Eigen::Index>(lat.pair_count()));
  state.mu = state.s.dot(state.lambda) / static_cast<double>(lat.pair_count());
  state.mu0 = state.mu;
  return state;
}

KktResiduals kkt_residuals(const Lattice& lat, const IpmState& state, const Vector<double>& c,
                           const ObservationMask& mask) {
  KktResiduals k;
  if (lat.reduced_count() > 0) {
    k.stationarity = inf_norm(apply_Q(lat, mask, state.xi) - c - apply_KB_T(lat, state.lambda));
    k.primal = inf_norm(apply_KB(lat, state.xi) + unit_flow(lat) - state.s);
  } else {
    k.primal = inf_norm(unit_flow(lat) - state.s);
  }
  k.complementarity = (state.s.array() * state.lambda.array()).maxCoeff();
  return k;
}

IpmState solve_qp(const Lattice& lat, const Vector<double>& c, const ObservationMask& mask, const IpmOptions& opts,
                  const std::optional<IpmState>& warm) {
  opts.validate();
  detail::check_reduced_length(lat, c);
  if (!c.allFinite()) throw ValidationError("QP linear term is not finite");
  const auto pairs = static_cast<double>(lat.pair_count());

  if (lat.reduced_count() == 0) {
    IpmState state;
    state.xi = Vector<double>::Zero(0);
    state.s = unit_flow(lat);
    state.lambda = Vector<double>::Zero(static_cast<Eigen::Index>(lat.pair_count()));
    state.status = IpmStatus::kConverged;
    return state;
  }

  IpmState state = warm ? *warm : initialize_state(lat, mask);
  if (state.xi.size() != c.size() || state.s.size() != static_cast<Eigen::Index>(lat.pair_count()) ||
      state.lambda.size() != state.s.size()) {
    throw ConfigError("warm start has mismatched dimensions");
  }
  if (state.s.minCoeff() <= 0 || state.lambda.minCoeff() <= 0) throw ConfigError("warm start is not strictly interior");
  state.status = IpmStatus::kRunning;
  state.iteration = 0;
  state.message.clear();
  state.mu = state.s.dot(state.lambda) / pairs;
  state.mu0 = state.mu;

  const Vector<double> b = unit_flow(lat);
  const double c_scale = 1.0 + inf_norm(c);
  const double mu_target = opts.mu_tol * std::max(1.0, state.mu0);
  Vector<double> prev_dxi = Vector<double>::Zero(c.size());
  int stalled_steps = 0;

  for (;;) {
    const Vector<double> kb_xi = apply_KB(lat, state.xi);
    const Vector<double> rd = apply_Q(lat, mask, state.xi) - c - apply_KB_T(lat, state.lambda);
    const Vector<double> rp = kb_xi + b - state.s;
    state.mu = state.s.dot(state.lambda) / pairs;
    state.primal_residual = inf_norm(rp);
    state.dual_residual = inf_norm(rd);

    if (state.mu <= mu_target && state.primal_residual <= opts.residual_tol &&
        state.dual_residual <= opts.residual_tol * c_scale) {
      state.status = IpmStatus::kConverged;
      break;
    }
    if (state.iteration >= opts.max_iter) {
      state.status = IpmStatus::kMaxIterations;
      state.message = "IPM iteration limit reached with mu=" + std::to_string(state.mu);
      break;
    }

    const Vector<double> d = state.lambda.cwiseQuotient(state.s);
    NewtonStep step;
    std::string failure;
    try {
      bool fresh = false;
      auto rebuild = [&] {
        state.tree = std::make_shared<const SpanningTree>(build_tree(lat, d));
        state.d_at_build = d;
        ++state.tree_builds;
        fresh = true;
      };
      if (!state.tree || state.d_at_build.size() != d.size() ||
          max_log10_drift(d, state.d_at_build) > opts.rebuild_log10_threshold ||
          state.last_cg_iters > opts.rebuild_cg_iter_threshold) {
        rebuild();
      }

      const double cg_tol =
          std::clamp(opts.cg_rel_tol_factor * std::min(1.0, state.mu / state.mu0), opts.cg_floor, opts.cg_ceiling);

      // A stale tree that fails to bring CG to tolerance is rebuilt once.
      auto solve = [&](const Vector<double>& b3, const Vector<double>& guess) {
        NewtonStep out = newton_reduce(lat, NewtonSystem(lat, mask, d, state.tree), state, -rd, -rp, b3, guess, cg_tol,
                                       opts.cg_max_iter);
        state.total_cg_iterations += out.cg.iterations;
        if (!out.cg.converged && !fresh) {
          rebuild();
          out = newton_reduce(lat, NewtonSystem(lat, mask, d, state.tree), state, -rd, -rp, b3, guess, cg_tol,
                              opts.cg_max_iter);
          state.total_cg_iterations += out.cg.iterations;
        }
        if (!out.cg.converged) ++state.cg_failures;
        return out;
      };

      const Vector<double> ls = state.lambda.cwiseProduct(state.s);
      const NewtonStep aff = solve(-ls, prev_dxi);

      const double alpha_aff =
          std::min(step_to_boundary(state.s, aff.ds, 1.0), step_to_boundary(state.lambda, aff.dlambda, 1.0));
      const double mu_aff =
          (state.s + alpha_aff * aff.ds).dot(state.lambda + alpha_aff * aff.dlambda) / pairs;
      const double sigma = std::pow(mu_aff / state.mu, 3);

      const Vector<double> b3 =
          (-ls.array() - aff.dlambda.array() * aff.ds.array() + sigma * state.mu).matrix();
      step = solve(b3, aff.dxi);
      state.last_cg_iters = std::max(aff.cg.iterations, step.cg.iterations);
      if (!step.dxi.allFinite() || !step.ds.allFinite() || !step.dlambda.allFinite()) {
        failure = "Newton direction is not finite";
      } else if (!step.cg.converged && step.cg.final_residual() > opts.cg_ceiling * step.rhs_norm) {
        failure = "Newton direction unresolved: CG relative residual " +
                  std::to_string(step.cg.final_residual() / step.rhs_norm);
      }
    } catch (const NumericalBreakdown& e) {
      failure = e.what();
    } catch (const InvalidBarrierError& e) {
      failure = e.what();
    } catch (const OperatorContractError& e) {
      failure = e.what();
    }
    // The current iterate is kept: it is the best certified point the method has.
    if (!failure.empty()) {
      state.status = IpmStatus::kBreakdown;
      state.message = "IPM numerical breakdown at mu=" + std::to_string(state.mu) + ": " + failure;
      break;
    }

    const double alpha = std::min(step_to_boundary(state.s, step.ds, opts.tau),
                                  step_to_boundary(state.lambda, step.dlambda, opts.tau));
    state.xi += alpha * step.dxi;
    state.s += alpha * step.ds;
    state.lambda += alpha * step.dlambda;
    prev_dxi = step.dxi;
    ++state.iteration;

    stalled_steps = alpha < kStallStep ? stalled_steps + 1 : 0;
    if (stalled_steps >= kStallLimit) {
      state.mu = state.s.dot(state.lambda) / pairs;
      state.status = IpmStatus::kStalled;
      state.message = "IPM step length collapsed below 1e-10 for 5 consecutive iterations";
      break;
    }
  }
  return state;
}

}  // namespace rum
