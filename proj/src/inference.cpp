#include "rum/inference.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rum/parallel.hpp"
#include "rum/projection.hpp"
#include "rum/random.hpp"

namespace rum {

namespace {

constexpr double kRowSumTol = 1e-9;
constexpr double kMaxExcludedFraction = 0.01;

double weighted_statistic(const Lattice& lat, const ObservationMask& mask, const Vector<double>& target,
                          const Vector<double>& rho, const TestConfig& cfg) {
  Vector<double> r = apply_mask(lat, mask, (target - rho).eval());
  double dist = cfg.omega ? r.cwiseProduct(*cfg.omega).dot(r) : r.squaredNorm();
  if (dist <= kFeasibleDistance) dist = 0.0;
  return static_cast<double>(cfg.sample_size) * dist;
}

// Unobserved coordinates are never read by the projection; zeroing them keeps
// NaN placeholders in the input from leaking into arithmetic.
Vector<double> observed_part(const Lattice& lat, const ObservationMask& mask, const Vector<double>& v) {
  Vector<double> out = Vector<double>::Zero(v.size());
  for (Subset d : mask.sets()) {
    const auto off = static_cast<Eigen::Index>(lat.offset(d));
    out.segment(off, d.size()) = v.segment(off, d.size());
  }
  return out;
}

}  // namespace

void TestConfig::validate() const {
  if (sample_size < 1) throw ConfigError("sample size must be positive");
  if (replications < 1) throw ConfigError("replications must be positive");
  if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(tighten_c > 0) || !std::isfinite(tighten_c)) throw ConfigError("tightening constant c must be positive");
  if (!(tighten_a > 0 && tighten_a < 0.5)) throw ConfigError("tightening exponent a must lie in (0, 0.5)");
  if (omega && (!omega->allFinite() || omega->minCoeff() <= 0)) throw ConfigError("omega weights must be positive");
  ipm.validate();
}

Vector<double> resample_frequencies(const Vector<double>& p, std::size_t sample_size, std::mt19937_64& rng) {
  Vector<double> freq = Vector<double>::Zero(p.size());
  auto remaining = static_cast<long long>(sample_size);
  double mass = 1.0;
  for (Eigen::Index k = 0; k + 1 < p.size() && remaining > 0; ++k) {
    const double q = mass > 0 ? std::clamp(p[k] / mass, 0.0, 1.0) : 0.0;
    const long long draw = std::binomial_distribution<long long>(remaining, q)(rng);
    freq[k] = static_cast<double>(draw);
    remaining -= draw;
    mass -= p[k];
  }
  if (p.size() > 0) freq[p.size() - 1] += static_cast<double>(remaining);
  return freq / static_cast<double>(sample_size);
}

TestReport bootstrap_test(const Lattice& lat, const Vector<double>& pi_hat, const ObservationMask& mask,
                          const TestConfig& cfg) {
  cfg.validate();
  detail::check_pair_length(lat, pi_hat);
  if (mask.alternatives() != lat.alternatives()) throw ConfigError("mask and lattice disagree on n");
  if (cfg.omega && cfg.omega->size() != pi_hat.size()) throw ConfigError("omega must have one weight per pair");
  for (Subset d : mask.sets()) {
    const auto block = pi_hat.segment(static_cast<Eigen::Index>(lat.offset(d)), d.size());
    if (!block.allFinite() || block.minCoeff() < 0 || std::abs(block.sum() - 1.0) > kRowSumTol) {
      throw ValidationError("choice frequencies of set " + to_hex(d) + " are not a probability vector");
    }
  }
  const Vector<double> pi = observed_part(lat, mask, pi_hat);

  TestReport report;
  const ProjectionResult base = project(lat, pi, mask, cfg.ipm);
  if (!base.converged) throw NonConvergenceError("base projection did not converge: " + base.message, 0.0);
  report.statistic = weighted_statistic(lat, mask, pi, base.rho_star, cfg);

  // eta = (1 - tau) P((pi - s) / (1 - tau)) + s with s = tau rho_int: the
  // scaled argument stays row-normalized and eta is a strict convex
  // combination with the interior point rho_int.
  const Vector<double> rho_int = uniform_choice(lat);
  double tau = cfg.tighten_c * std::pow(static_cast<double>(cfg.sample_size), -cfg.tighten_a);
  for (int attempt = 0;; ++attempt) {
    if (!(tau < 1)) throw ConfigError("tightening tau_N must be below 1; increase the sample size or lower c");
    const ProjectionResult inner = project(lat, ((pi - tau * rho_int) / (1 - tau)).eval(), mask, cfg.ipm);
    if (inner.converged) {
      report.centering_point = (1 - tau) * inner.rho_star + tau * rho_int;
      report.centering_margin = apply_K(lat, report.centering_point).minCoeff();
      if (report.centering_margin > 0) break;
    }
    if (attempt == 1) {
      throw DegenerateError("centering point is not strictly interior after doubling tau_N (margin " +
                               std::to_string(report.centering_margin) + ", tau " + std::to_string(tau) + ")");
    }
    tau *= 2;
  }
  report.tightening = tau;

  const Vector<double> shift = observed_part(lat, mask, (report.centering_point - pi).eval());
  const std::vector<Subset> sets = mask.sets();
  report.bootstrap_stats.assign(cfg.replications, std::numeric_limits<double>::quiet_NaN());
  parallel_for(
      cfg.replications,
      [&](std::size_t m) {
        auto rng = seeded_stream(cfg.seed, m + 1);
        Vector<double> sample = Vector<double>::Zero(pi.size());
        for (Subset d : sets) {
          const auto off = static_cast<Eigen::Index>(lat.offset(d));
          sample.segment(off, d.size()) = resample_frequencies(pi.segment(off, d.size()), cfg.sample_size, rng);
        }
        const Vector<double> recentered = sample + shift;
        const ProjectionResult r = project(lat, recentered, mask, cfg.ipm);
        if (r.converged) report.bootstrap_stats[m] = weighted_statistic(lat, mask, recentered, r.rho_star, cfg);
      },
      cfg.threads);

  std::size_t tail = 0;
  for (double j : report.bootstrap_stats) {
    if (std::isnan(j)) {
      ++report.excluded;
    } else if (j >= report.statistic) {
      ++tail;
    }
  }
  if (static_cast<double>(report.excluded) > kMaxExcludedFraction * static_cast<double>(cfg.replications)) {
    throw NonConvergenceError(std::to_string(report.excluded) + " of " + std::to_string(cfg.replications) +
                                  " bootstrap replications failed to converge",
                              0.0);
  }
  report.p_value = static_cast<double>(tail) / static_cast<double>(cfg.replications - report.excluded);
  report.reject = report.p_value < cfg.alpha;
  return report;
}

}  // namespace rum
