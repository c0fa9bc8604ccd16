#pragma once

// Benchmark harnesses: the frozen-barrier rank sweep and the
// ill-conditioning stress test comparing three preconditioners.

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rum/operators.hpp"

namespace rum {

struct SweepPoint {
  double eta = 0.0;
  std::size_t observed_sets = 0;
  std::size_t rank = 0;
  std::size_t iterations = 0;
  bool converged = false;
  double seconds = 0.0;
  std::vector<double> residual_history;
};

struct FrozenReport {
  int n = 0;
  std::uint64_t seed = 0;
  std::size_t active_pairs = 0;
  std::vector<SweepPoint> points;
  /// Least-squares fit iterations ~ slope * rank + intercept.
  double slope = 0.0;
  double intercept = 0.0;
  double correlation = 0.0;
};

struct StressCurve {
  std::string method;
  std::size_t iterations = 0;
  bool converged = false;
  double seconds = 0.0;
  std::vector<double> residual_history;
  Vector<double> solution;

  /// log10(r_0 / r_k) at iteration k, clamped to the recorded history.
  double orders_at(std::size_t k) const;
};

struct StressReport {
  int n = 0;
  std::uint64_t seed = 0;
  std::size_t max_iter = 0;
  std::vector<StressCurve> curves;  // identity, jacobi, tree
};

/// Ten points 0.1, 0.2, ..., 1.
std::vector<double> default_sparsity_points();

/// D = 1e6 on a random 80% of pairs and 1 elsewhere, tree built once, then
/// for each eta a random mask of round(eta * (2^n - 1)) sets and a PCG solve
/// of (H_bar + Q_M) x = b, b = (H_bar + Q_M) x_true with Gaussian x_true, to
/// relative residual 1e-10.
FrozenReport frozen_barrier_run(int n, std::span<const double> sparsity_points, std::uint64_t seed,
                                unsigned threads = 1);

/// D = 1e6 on a random 80% of pairs and 1e-2 elsewhere, full mask. Solves
/// H x = b with b = H x_true under identity, exact Jacobi and tree
/// preconditioning, each with a 500-iteration budget unless overridden.
StressReport stress_test_run(int n, std::uint64_t seed, std::size_t max_iter = 500, double rel_tol = 1e-10);

/// Pearson correlation and least-squares line of y on x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double correlation = 0.0;
};
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// One key=value record per line.
void write_records(std::ostream& out, const FrozenReport& report);
void write_records(std::ostream& out, const StressReport& report);

}  // namespace rum
