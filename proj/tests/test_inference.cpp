#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rum/inference.hpp"
#include "rum/projection.hpp"

using namespace rum;
using Eigen::VectorXd;

TEST_CASE("configuration is validated") {
  TestConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.alpha = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.tighten_a = 0.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.replications = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.omega = VectorXd::Zero(12);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("input must be row-normalized on observed sets") {
  const Lattice lat(3);
  VectorXd pi = uniform_choice(lat);
  pi[4] += 0.1;
  CHECK_THROWS_AS(bootstrap_test(lat, pi, ObservationMask::full(3), {}), ValidationError);
  pi = uniform_choice(lat);
  pi[0] = std::nan("");
  CHECK_THROWS_AS(bootstrap_test(lat, pi, ObservationMask::full(3), {}), ValidationError);
  TestConfig cfg;
  cfg.replications = 5;
  const auto mask = ObservationMask::from_sets(3, {{0b011}, {0b111}});
  const TestReport r = bootstrap_test(lat, pi, mask, cfg);
  CHECK(r.statistic == 0.0);
}

TEST_CASE("multinomial resampling") {
  std::mt19937_64 rng(1);
  VectorXd p(4);
  p << 0.1, 0.0, 0.6, 0.3;
  VectorXd mean = VectorXd::Zero(4);
  const int draws = 4000;
  for (int k = 0; k < draws; ++k) {
    const VectorXd f = resample_frequencies(p, 500, rng);
    CHECK(f.sum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f[1] == 0.0);
    CHECK(f.minCoeff() >= 0.0);
    mean += f / draws;
  }
  // Standard error of each mean entry is sqrt(p(1-p) / (500 draws)) < 4e-4.
  CHECK((mean - p).cwiseAbs().maxCoeff() < 2e-3);
}

TEST_CASE("feasible uniform data is not rejected") {
  const Lattice lat(3);
  TestConfig cfg;
  int rejections = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.seed = seed;
    const TestReport r = bootstrap_test(lat, uniform_choice(lat), ObservationMask::full(3), cfg);
    CHECK(r.statistic == 0.0);
    CHECK(r.excluded == 0);
    rejections += r.reject;
  }
  CHECK(rejections == 0);
}

TEST_CASE("anti-transitive data is rejected") {
  const Lattice lat(3);
  TestConfig cfg;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.seed = seed;
    const TestReport r = bootstrap_test(lat, oracle::anti_transitive_n3(lat), ObservationMask::full(3), cfg);
    CHECK(r.statistic > 10.0);
    CHECK(r.reject);
    CHECK(r.p_value == 0.0);
  }
}

TEST_CASE("p-value is the exact tail fraction") {
  std::mt19937_64 rng(2);
  const Lattice lat(3);
  TestConfig cfg;
  cfg.replications = 50;
  // A mild violation so that the statistic falls inside the bootstrap range.
  const VectorXd pi = 0.9 * uniform_choice(lat) + 0.1 * oracle::anti_transitive_n3(lat);
  const TestReport r = bootstrap_test(lat, pi, ObservationMask::full(3), cfg);
  std::size_t tail = 0;
  for (double j : r.bootstrap_stats) tail += j >= r.statistic;
  CHECK(r.bootstrap_stats.size() == 50);
  CHECK(r.p_value == static_cast<double>(tail) / 50.0);
  CHECK(r.reject == (r.p_value < cfg.alpha));
  CHECK(r.p_value >= 0.0);
  CHECK(r.p_value <= 1.0);
}

TEST_CASE("single replication on feasible data gives p = 1") {
  const Lattice lat(3);
  TestConfig cfg;
  cfg.replications = 1;
  const TestReport r = bootstrap_test(lat, uniform_choice(lat), ObservationMask::full(3), cfg);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);
  CHECK_FALSE(r.reject);
}

TEST_CASE("centering point is a strictly interior choice vector") {
  std::mt19937_64 rng(3);
  for (int n : {3, 4}) {
    const Lattice lat(n);
    TestConfig cfg;
    cfg.replications = 3;
    const TestReport r = bootstrap_test(lat, oracle::random_choice_vector(lat, rng), ObservationMask::full(n), cfg);
    CHECK(r.centering_margin > 0.0);
    CHECK(apply_K(lat, r.centering_point).minCoeff() == r.centering_margin);
    CHECK(max_row_sum_error(lat, r.centering_point) <= 1e-10);
    CHECK(r.tightening == doctest::Approx(0.1 * std::pow(500.0, -0.25)));
  }
}

TEST_CASE("weights scale the statistic only") {
  const Lattice lat(3);
  TestConfig cfg;
  cfg.replications = 20;
  const VectorXd pi = oracle::anti_transitive_n3(lat);
  const TestReport plain = bootstrap_test(lat, pi, ObservationMask::full(3), cfg);
  cfg.omega = VectorXd::Constant(12, 2.0);
  const TestReport weighted = bootstrap_test(lat, pi, ObservationMask::full(3), cfg);
  CHECK(weighted.statistic == 2 * plain.statistic);
  CHECK(weighted.centering_point == plain.centering_point);
}

TEST_CASE("fixed seed is reproducible across thread counts") {
  std::mt19937_64 rng(4);
  const Lattice lat(4);
  const VectorXd pi = oracle::random_choice_vector(lat, rng);
  TestConfig cfg;
  cfg.replications = 40;
  cfg.seed = 99;
  cfg.threads = 1;
  const TestReport a = bootstrap_test(lat, pi, ObservationMask::full(4), cfg);
  cfg.threads = 4;
  const TestReport b = bootstrap_test(lat, pi, ObservationMask::full(4), cfg);
  CHECK(a.statistic == b.statistic);
  CHECK(a.bootstrap_stats == b.bootstrap_stats);
  CHECK(a.p_value == b.p_value);
  cfg.seed = 100;
  CHECK(bootstrap_test(lat, pi, ObservationMask::full(4), cfg).bootstrap_stats != a.bootstrap_stats);
}
