#include <Eigen/Dense>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rum/operators.hpp"

using namespace rum;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double conservation_defect(const Lattice& lat, const VectorXd& kappa, double total_flow) {
  double worst = 0.0;
  const std::uint32_t top = lat.ground_set().bits;
  for (std::uint32_t v = 0; v < lat.vertex_count(); ++v) {
    double net = 0.0;
    for (const auto& ie : lat.incident_edges({v})) net += ie.sign * kappa[static_cast<Eigen::Index>(ie.edge)];
    const double expected = v == top ? total_flow : (v == 0 ? -total_flow : 0.0);
    worst = std::max(worst, std::abs(net - expected));
  }
  return worst;
}

}  // namespace

TEST_CASE("K on small lattices") {
  const Lattice one(1);
  VectorXd rho(1);
  rho << 0.3;
  CHECK(apply_K(one, rho)[0] == doctest::Approx(0.3));

  const Lattice two(2);
  const VectorXd kappa = apply_K(two, uniform_choice(two));
  const VectorXd dense = oracle::dense_K(two) * uniform_choice(two);
  // pairs: ({0},0), ({1},1), ({0,1},0), ({0,1},1)
  for (int i = 0; i < 4; ++i) {
    CHECK(kappa[i] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(dense[i] == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("K u = b and K^-1 b = u") {
  for (int n = 1; n <= 8; ++n) {
    const Lattice lat(n);
    const VectorXd u = unit_choice(lat);
    const VectorXd b = unit_flow(lat);
    CHECK((apply_K(lat, u) - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK((apply_K_inv(lat, b) - u).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("zeta of a unit mass") {
  const Lattice lat(2);
  VectorXd kappa = VectorXd::Zero(4);
  kappa[static_cast<Eigen::Index>(lat.dense_index({{0b11}, 0}))] = 1.0;
  const VectorXd rho = apply_K_inv(lat, kappa);
  CHECK(rho[static_cast<Eigen::Index>(lat.dense_index({{0b11}, 0}))] == 1.0);
  CHECK(rho[static_cast<Eigen::Index>(lat.dense_index({{0b01}, 0}))] == 1.0);
  CHECK(rho[static_cast<Eigen::Index>(lat.dense_index({{0b11}, 1}))] == 0.0);
  CHECK(rho[static_cast<Eigen::Index>(lat.dense_index({{0b10}, 1}))] == 0.0);
}

TEST_CASE("transforms match the dense definition") {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 5; ++n) {
    const Lattice lat(n);
    const MatrixXd k = oracle::dense_K(lat);
    const VectorXd x = oracle::random_vector(k.rows(), rng);
    CHECK((apply_K(lat, x) - k * x).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((apply_K_T(lat, x) - k.transpose() * x).cwiseAbs().maxCoeff() < 1e-12);
    const MatrixXd kinv = k.inverse();
    CHECK((apply_K_inv(lat, x) - kinv * x).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((apply_K_inv_T(lat, x) - kinv.transpose() * x).cwiseAbs().maxCoeff() < 1e-9);
    if (lat.reduced_count() > 0) {
      const VectorXd xi = oracle::random_vector(static_cast<Eigen::Index>(lat.reduced_count()), rng);
      CHECK((apply_B(lat, xi) - oracle::dense_B(lat) * xi).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("K and K^-1 are mutually inverse") {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 8; ++n) {
    const Lattice lat(n);
    const VectorXd rho = oracle::random_vector(static_cast<Eigen::Index>(lat.pair_count()), rng);
    CHECK((apply_K_inv(lat, apply_K(lat, rho)) - rho).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((apply_K(lat, apply_K_inv(lat, rho)) - rho).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("adjoint identities") {
  std::mt19937_64 rng(5);
  for (int n = 2; n <= 8; ++n) {
    const Lattice lat(n);
    const auto np = static_cast<Eigen::Index>(lat.pair_count());
    const auto nr = static_cast<Eigen::Index>(lat.reduced_count());
    const VectorXd x = oracle::random_vector(np, rng), y = oracle::random_vector(np, rng);
    const VectorXd xi = oracle::random_vector(nr, rng);
    const double scale = static_cast<double>(np);
    CHECK(std::abs(apply_K(lat, x).dot(y) - x.dot(apply_K_T(lat, y))) < 1e-12 * scale);
    CHECK(std::abs(apply_K_inv(lat, x).dot(y) - x.dot(apply_K_inv_T(lat, y))) < 1e-12 * scale);
    CHECK(std::abs(apply_B(lat, xi).dot(y) - xi.dot(apply_B_T(lat, y))) < 1e-12 * scale);
    CHECK(std::abs(apply_R(lat, x).dot(xi) - x.dot(apply_R_T(lat, xi))) < 1e-12 * scale);
    CHECK(std::abs(apply_KB(lat, xi).dot(y) - xi.dot(apply_KB_T(lat, y))) < 1e-12 * scale);
  }
}

TEST_CASE("reduced parameterization identities") {
  std::mt19937_64 rng(8);
  for (int n = 1; n <= 6; ++n) {
    const Lattice lat(n);
    const VectorXd u = unit_choice(lat);
    CHECK((apply_B_T(lat, u) + VectorXd::Ones(static_cast<Eigen::Index>(lat.reduced_count()))).cwiseAbs().sum() == 0.0);
    const VectorXd xi = oracle::random_vector(static_cast<Eigen::Index>(lat.reduced_count()), rng);
    const VectorXd bxi = apply_B(lat, xi);
    for (std::uint32_t d = 1; d < lat.vertex_count(); ++d) {
      CHECK(std::abs(bxi.segment(static_cast<Eigen::Index>(lat.offset({d})), std::popcount(d)).sum()) < 1e-14);
    }
    CHECK((apply_R(lat, bxi) - xi).cwiseAbs().sum() == 0.0);
    const VectorXd rho = oracle::random_choice_vector(lat, rng);
    CHECK((apply_B(lat, apply_R(lat, rho)) + u - rho).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("flow theorems") {
  std::mt19937_64 rng(9);
  for (int n = 2; n <= 8; ++n) {
    const Lattice lat(n);
    const VectorXd rho = oracle::random_choice_vector(lat, rng);
    CHECK(conservation_defect(lat, apply_K(lat, rho), 1.0) < 1e-12);
    const VectorXd xi = oracle::random_vector(static_cast<Eigen::Index>(lat.reduced_count()), rng);
    CHECK(conservation_defect(lat, apply_KB(lat, xi), 0.0) < 1e-12);
  }
}

TEST_CASE("H matches its dense assembly") {
  std::mt19937_64 rng(21);
  const Lattice lat(3);
  const auto np = static_cast<Eigen::Index>(lat.pair_count());
  const auto nr = static_cast<Eigen::Index>(lat.reduced_count());
  const VectorXd d = oracle::random_vector(np, rng, 0.1, 10.0);
  for (const auto& mask : {ObservationMask::full(3), ObservationMask::from_sets(3, {{0b011}, {0b111}})}) {
    const MatrixXd h = oracle::assemble([&](const VectorXd& e) { return apply_H(lat, e, d, mask); }, nr);
    const MatrixXd kb = oracle::dense_K(lat) * oracle::dense_B(lat);
    const MatrixXd b = oracle::dense_B(lat);
    const MatrixXd expected = b.transpose() * oracle::dense_mask(lat, mask) * b + kb.transpose() * d.asDiagonal() * kb;
    CHECK((h - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    const VectorXd xi = oracle::random_vector(nr, rng);
    CHECK((apply_H(lat, xi, d, mask) - h * xi).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((newton_diagonal(lat, d, mask) - expected.diagonal()).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(apply_H(lat, VectorXd::Zero(nr), VectorXd::Ones(np), ObservationMask::full(3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exact Newton diagonal at n = 5 with a sparse mask") {
  std::mt19937_64 rng(4);
  const Lattice lat(5);
  const auto mask = ObservationMask::from_sets(5, {{0b00011}, {0b10110}, {0b11111}, {0b00100}});
  const VectorXd d = oracle::random_vector(static_cast<Eigen::Index>(lat.pair_count()), rng, 1e-2, 1e3);
  const VectorXd diag = newton_diagonal(lat, d, mask);
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(lat.reduced_count()); ++j) {
    const VectorXd e = VectorXd::Unit(diag.size(), j);
    CHECK(diag[j] == doctest::Approx(e.dot(apply_H(lat, e, d, mask))).epsilon(1e-13));
  }
}

TEST_CASE("empty mask leaves the barrier quadratic form") {
  std::mt19937_64 rng(2);
  const Lattice lat(4);
  const VectorXd xi = oracle::random_vector(static_cast<Eigen::Index>(lat.reduced_count()), rng);
  const VectorXd ones = VectorXd::Ones(static_cast<Eigen::Index>(lat.pair_count()));
  const double form = xi.dot(apply_H(lat, xi, ones, ObservationMask::none(4)));
  CHECK(form == doctest::Approx(apply_KB(lat, xi).squaredNorm()).epsilon(1e-13));
}

TEST_CASE("H is positive definite for the full mask") {
  std::mt19937_64 rng(6);
  for (int n = 2; n <= 7; ++n) {
    const Lattice lat(n);
    const VectorXd d = oracle::random_vector(static_cast<Eigen::Index>(lat.pair_count()), rng, 1e-6, 1e6);
    for (int trial = 0; trial < 5; ++trial) {
      const VectorXd xi = oracle::random_vector(static_cast<Eigen::Index>(lat.reduced_count()), rng);
      CHECK(xi.dot(apply_H(lat, xi, d, ObservationMask::full(n))) > 0.0);
    }
  }
}

TEST_CASE("invalid barrier is rejected") {
  const Lattice lat(3);
  VectorXd d = VectorXd::Ones(12);
  d[4] = 0.0;
  CHECK_THROWS_AS(apply_H(lat, VectorXd::Zero(5), d, ObservationMask::full(3)), InvalidBarrierError);
  d[4] = std::nan("");
  CHECK_THROWS_AS(apply_H(lat, VectorXd::Zero(5), d, ObservationMask::full(3)), InvalidBarrierError);
}

TEST_CASE("masked linear term") {
  std::mt19937_64 rng(13);
  const Lattice lat(3);
  const auto full = ObservationMask::full(3);
  CHECK(masked_linear_term(lat, unit_choice(lat), full).cwiseAbs().maxCoeff() == 0.0);

  const VectorXd rho = oracle::random_choice_vector(lat, rng);
  const VectorXd expected = apply_B_T(lat, rho) + VectorXd::Ones(5);
  CHECK((masked_linear_term(lat, rho, full) - expected).cwiseAbs().maxCoeff() < 1e-15);

  const auto top_only = ObservationMask::from_sets(3, {lat.ground_set()});
  const VectorXd c = masked_linear_term(lat, rho, top_only);
  const auto r0 = static_cast<Eigen::Index>(lat.reduced_index({{0b111}, 0}));
  const auto r1 = static_cast<Eigen::Index>(lat.reduced_index({{0b111}, 1}));
  const double top = rho[static_cast<Eigen::Index>(lat.dense_index({{0b111}, 2}))] - 1.0;
  for (Eigen::Index i = 0; i < 5; ++i) {
    if (i == r0) CHECK(c[i] == doctest::Approx(rho[static_cast<Eigen::Index>(lat.dense_index({{0b111}, 0}))] - top));
    else if (i == r1) CHECK(c[i] == doctest::Approx(rho[static_cast<Eigen::Index>(lat.dense_index({{0b111}, 1}))] - top));
    else CHECK(c[i] == 0.0);
  }

  // Unobserved coordinates never influence the result, even when not finite.
  VectorXd poisoned = rho;
  poisoned[static_cast<Eigen::Index>(lat.dense_index({{0b011}, 0}))] = std::nan("");
  CHECK((masked_linear_term(lat, poisoned, top_only) - c).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("effective rank") {
  CHECK(effective_rank(ObservationMask::full(10)) == 4097);
  CHECK(effective_rank(ObservationMask::none(5)) == 0);
  std::vector<Subset> pairs;
  for (std::uint32_t d = 1; d < 16; ++d) {
    if (std::popcount(d) == 2) pairs.push_back({d});
  }
  CHECK(effective_rank(ObservationMask::from_sets(4, pairs)) == 6);
}

TEST_CASE("data Hessian block spectrum") {
  // Each observed D contributes eigenvalue |D| once and 1 with multiplicity |D| - 2.
  for (int n = 2; n <= 5; ++n) {
    const Lattice lat(n);
    const auto nr = static_cast<Eigen::Index>(lat.reduced_count());
    for (const auto& mask : {ObservationMask::full(n), ObservationMask::from_sets(n, {lat.ground_set(), {0b11}})}) {
      const MatrixXd q = oracle::assemble([&](const VectorXd& e) { return apply_Q(lat, mask, e); }, nr);
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(q);
      std::vector<double> expected;
      for (Subset d : mask.sets()) {
        if (d.size() < 2) continue;
        expected.push_back(d.size());
        for (int i = 0; i < d.size() - 2; ++i) expected.push_back(1.0);
      }
      while (expected.size() < static_cast<std::size_t>(nr)) expected.push_back(0.0);
      std::sort(expected.begin(), expected.end());
      for (Eigen::Index i = 0; i < nr; ++i) CHECK(eig.eigenvalues()[i] == doctest::Approx(expected[static_cast<std::size_t>(i)]).epsilon(1e-10));
      CHECK(static_cast<std::size_t>((eig.eigenvalues().array() > 1e-9).count()) == effective_rank(mask));
    }
  }
}
