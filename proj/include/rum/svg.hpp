#pragma once

// Minimal SVG charts for the benchmark and test reports.

#include <iosfwd>

#include "rum/bench.hpp"
#include "rum/inference.hpp"

namespace rum {

/// Residual norm against iteration on a log scale, one polyline per method.
void write_stress_svg(std::ostream& out, const StressReport& report);

/// Iterations against effective rank, with the fitted line and r + 1.
void write_frozen_svg(std::ostream& out, const FrozenReport& report);

/// Histogram of the bootstrap statistics with J_N marked.
void write_bootstrap_svg(std::ostream& out, const TestReport& report);

}  // namespace rum
