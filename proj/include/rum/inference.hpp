#pragma once

// Bootstrap test of RUM consistency for estimated choice probabilities. The
// null distribution is simulated around a centering point pulled strictly
// inside the polytope, which keeps the bootstrap valid at the boundary.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "rum/ipm.hpp"
#include "rum/lattice.hpp"
#include "rum/operators.hpp"

namespace rum {

struct TestConfig {
  std::size_t sample_size = 500;
  std::size_t replications = 200;
  double alpha = 0.05;
  /// Diagonal weights of the statistic, one per pair; identity when empty.
  std::optional<Vector<double>> omega;
  /// Tightening rate tau_N = c * N^-a.
  double tighten_c = 0.1;
  double tighten_a = 0.25;
  std::uint64_t seed = 0;
  IpmOptions ipm;
  unsigned threads = 0;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct TestReport {
  /// J_N = N (pi_hat - rho*)^T Omega (pi_hat - rho*) over observed pairs.
  double statistic = 0.0;
  /// One entry per replication; NaN marks an excluded replication.
  std::vector<double> bootstrap_stats;
  double p_value = 1.0;
  bool reject = false;
  Vector<double> centering_point;
  /// tau_N actually used (doubled once if the first centering point was not interior).
  double tightening = 0.0;
  /// min over pairs of K eta_center.
  double centering_margin = 0.0;
  std::size_t excluded = 0;
};

/// Squared distances at or below this count as exactly feasible.
inline constexpr double kFeasibleDistance = 1e-8;

/// Row-normalized pi_hat on the observed sets of `mask`. Throws
/// ValidationError on malformed input and NonConvergenceError when the base
/// projection fails or more than 1% of replications are excluded.
TestReport bootstrap_test(const Lattice& lat, const Vector<double>& pi_hat, const ObservationMask& mask,
                          const TestConfig& cfg);

/// Counts ~ Multinomial(sample_size, p) / sample_size for one choice set.
Vector<double> resample_frequencies(const Vector<double>& p, std::size_t sample_size, std::mt19937_64& rng);

}  // namespace rum
