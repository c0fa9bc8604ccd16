#include "rum/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "rum/krylov.hpp"
#include "rum/parallel.hpp"
#include "rum/random.hpp"
#include "rum/tree_precond.hpp"

namespace rum {

namespace {

constexpr double kHeavy = 1e6;
constexpr double kActiveFraction = 0.8;
constexpr double kFrozenTol = 1e-10;

Vector<double> two_level_barrier(const Lattice& lat, double low, std::mt19937_64& rng, std::size_t& active) {
  std::vector<std::size_t> order(lat.pair_count());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  active = static_cast<std::size_t>(std::llround(kActiveFraction * static_cast<double>(lat.pair_count())));
  Vector<double> d = Vector<double>::Constant(static_cast<Eigen::Index>(lat.pair_count()), low);
  for (std::size_t i = 0; i < active; ++i) d[static_cast<Eigen::Index>(order[i])] = kHeavy;
  return d;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_history(std::ostream& out, const std::vector<double>& history) {
  out << " residuals=";
  char buf[32];
  for (std::size_t i = 0; i < history.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6e", history[i]);
    out << (i ? "," : "") << buf;
  }
}

}  // namespace

double StressCurve::orders_at(std::size_t k) const {
  if (residual_history.empty()) return 0.0;
  const double last = residual_history[std::min(k, residual_history.size() - 1)];
  if (last <= 0.0) return std::numeric_limits<double>::infinity();
  return std::log10(residual_history.front() / last);
}

std::vector<double> default_sparsity_points() {
  std::vector<double> eta;
  for (int i = 1; i <= 10; ++i) eta.push_back(i / 10.0);
  return eta;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  LinearFit fit;
  const std::size_t m = std::min(x.size(), y.size());
  if (m < 2) return fit;
  const double mx = std::accumulate(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m), 0.0) / static_cast<double>(m);
  const double my = std::accumulate(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(m), 0.0) / static_cast<double>(m);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx > 0) fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (sxx > 0 && syy > 0) fit.correlation = sxy / std::sqrt(sxx * syy);
  return fit;
}

FrozenReport frozen_barrier_run(int n, std::span<const double> sparsity_points, std::uint64_t seed, unsigned threads) {
  const Lattice lat(n);
  for (double eta : sparsity_points) {
    if (!(eta >= 0 && eta <= 1)) throw ConfigError("sparsity points must lie in [0, 1]");
  }
  FrozenReport report;
  report.n = n;
  report.seed = seed;
  auto rng = seeded_stream(seed, 0);
  const Vector<double> d = two_level_barrier(lat, 1.0, rng, report.active_pairs);
  const SpanningTree tree = build_tree(lat, d);
  const std::size_t set_count = lat.vertex_count() - 1;

  report.points.resize(sparsity_points.size());
  parallel_for(
      sparsity_points.size(),
      [&](std::size_t p) {
        auto local = seeded_stream(seed, p + 1);
        SweepPoint& point = report.points[p];
        point.eta = sparsity_points[p];
        std::vector<Subset> all(set_count);
        for (std::size_t i = 0; i < set_count; ++i) all[i] = Subset{static_cast<std::uint32_t>(i + 1)};
        std::shuffle(all.begin(), all.end(), local);
        point.observed_sets = static_cast<std::size_t>(std::llround(point.eta * static_cast<double>(set_count)));
        all.resize(point.observed_sets);
        const ObservationMask mask = ObservationMask::from_sets(n, all);
        point.rank = effective_rank(mask);

        // The target is the image of a Gaussian vector, as in the stress test.
        const Vector<double> b = apply_H(lat, gaussian_vector(static_cast<Eigen::Index>(lat.reduced_count()), local), d, mask);
        const auto start = std::chrono::steady_clock::now();
        const auto solve = pcg_solve<double>([&](const Vector<double>& x) { return apply_H(lat, x, d, mask); },
                                             [&](const Vector<double>& r) { return apply_M_inv(lat, tree, d, r); }, b,
                                             Vector<double>::Zero(b.size()), kFrozenTol);
        point.seconds = seconds_since(start);
        point.iterations = solve.iterations;
        point.converged = solve.converged;
        point.residual_history = solve.residual_history;
      },
      threads);

  std::vector<double> x, y;
  for (const auto& point : report.points) {
    x.push_back(static_cast<double>(point.rank));
    y.push_back(static_cast<double>(point.iterations));
  }
  const LinearFit fit = fit_line(x, y);
  report.slope = fit.slope;
  report.intercept = fit.intercept;
  report.correlation = fit.correlation;
  return report;
}

StressReport stress_test_run(int n, std::uint64_t seed, std::size_t max_iter, double rel_tol) {
  const Lattice lat(n);
  StressReport report;
  report.n = n;
  report.seed = seed;
  report.max_iter = max_iter;
  auto rng = seeded_stream(seed, 0);
  std::size_t active = 0;
  const Vector<double> d = two_level_barrier(lat, 1e-2, rng, active);
  const ObservationMask mask = ObservationMask::full(n);
  const Vector<double> x_true = gaussian_vector(static_cast<Eigen::Index>(lat.reduced_count()), rng);
  auto apply = [&](const Vector<double>& x) { return apply_H(lat, x, d, mask); };
  const Vector<double> b = apply(x_true);
  const Vector<double> x0 = Vector<double>::Zero(b.size());

  auto run = [&](const std::string& method, auto&& precondition) {
    const auto start = std::chrono::steady_clock::now();
    const auto solve = pcg_solve<double>(apply, precondition, b, x0, rel_tol, max_iter);
    StressCurve curve;
    curve.method = method;
    curve.seconds = seconds_since(start);
    curve.iterations = solve.iterations;
    curve.converged = solve.converged;
    curve.residual_history = solve.residual_history;
    curve.solution = solve.solution;
    report.curves.push_back(std::move(curve));
  };

  run("identity", IdentityPreconditioner{});
  const Vector<double> diag = newton_diagonal(lat, d, mask);
  run("jacobi", [&](const Vector<double>& r) -> Vector<double> { return r.cwiseQuotient(diag); });
  const SpanningTree tree = build_tree(lat, d);
  run("tree", [&](const Vector<double>& r) { return apply_M_inv(lat, tree, d, r); });
  return report;
}

void write_records(std::ostream& out, const FrozenReport& report) {
  char buf[256];
  for (const auto& p : report.points) {
    std::snprintf(buf, sizeof buf,
                  "record=frozen_point n=%d seed=%llu eta=%.4f sets=%zu rank=%zu iterations=%zu converged=%d "
                  "seconds=%.4f",
                  report.n, static_cast<unsigned long long>(report.seed), p.eta, p.observed_sets, p.rank,
                  p.iterations, p.converged ? 1 : 0, p.seconds);
    out << buf;
    write_history(out, p.residual_history);
    out << '\n';
  }
  std::snprintf(buf, sizeof buf,
                "record=frozen_fit n=%d seed=%llu active=%zu points=%zu slope=%.6g intercept=%.6g correlation=%.6g\n",
                report.n, static_cast<unsigned long long>(report.seed), report.active_pairs, report.points.size(),
                report.slope, report.intercept, report.correlation);
  out << buf;
}

void write_records(std::ostream& out, const StressReport& report) {
  char buf[256];
  for (const auto& c : report.curves) {
    std::snprintf(buf, sizeof buf,
                  "record=stress_curve n=%d seed=%llu method=%s iterations=%zu converged=%d orders_at_25=%.4f "
                  "orders_at_end=%.4f seconds=%.4f",
                  report.n, static_cast<unsigned long long>(report.seed), c.method.c_str(), c.iterations,
                  c.converged ? 1 : 0, c.orders_at(25), c.orders_at(c.iterations), c.seconds);
    out << buf;
    write_history(out, c.residual_history);
    out << '\n';
  }
}

}  // namespace rum
