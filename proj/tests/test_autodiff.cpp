#include <Eigen/Dense>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rum/autodiff.hpp"

using namespace rum;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Exact Jacobian of the solution map on a fixed active face, with the face
// constraints eliminated through a null-space basis of the tight rows.
VectorXd face_gradient(const Lattice& lat, const ObservationMask& mask, const ProjectionResult& r, const VectorXd& g) {
  const MatrixXd b = oracle::dense_B(lat);
  const MatrixXd kb = oracle::dense_K(lat) * b;
  const MatrixXd pm = oracle::dense_mask(lat, mask);
  std::vector<Eigen::Index> tight;
  for (Eigen::Index i = 0; i < r.s_star.size(); ++i) {
    if (r.s_star[i] < r.lambda_star[i]) tight.push_back(i);
  }
  MatrixXd ga(static_cast<Eigen::Index>(tight.size()), b.cols());
  for (std::size_t k = 0; k < tight.size(); ++k) ga.row(static_cast<Eigen::Index>(k)) = kb.row(tight[k]);
  Eigen::FullPivLU<MatrixXd> lu(ga.rows() ? ga : MatrixXd::Zero(1, b.cols()));
  const MatrixXd z = lu.kernel();
  const MatrixXd q = b.transpose() * pm * b;
  if (z.cols() == 0 || (z.cols() == 1 && z.norm() == 0)) return VectorXd::Zero(g.size());
  const MatrixXd jac = z * (z.transpose() * q * z).ldlt().solve(z.transpose());
  return pm * b * jac * b.transpose() * g;
}

}  // namespace

TEST_CASE("zero upstream gradient gives zero") {
  std::mt19937_64 rng(1);
  const Lattice lat(4);
  const auto mask = ObservationMask::full(4);
  const ProjectionResult r = project(lat, oracle::random_choice_vector(lat, rng), mask);
  REQUIRE(r.converged);
  CHECK(backward(lat, r, VectorXd::Zero(32), mask).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adjoint matches finite differences at n = 4") {
  const SeededGradCheck check = seeded_gradient_check(4, 0);
  REQUIRE_FALSE(check.report.degenerate);
  CHECK(check.report.margin > 1e-4);
  CHECK(check.report.max_rel_error < 1e-4);
  CHECK(check.report.passed);
  CHECK(check.report.adjoint.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("adjoint matches the exact face Jacobian") {
  std::mt19937_64 rng(2);
  for (int n : {3, 4, 5}) {
    const Lattice lat(n);
    const auto mask = ObservationMask::full(n);
    for (int trial = 0; trial < 3; ++trial) {
      const ProjectionResult r = project(lat, oracle::random_choice_vector(lat, rng), mask);
      REQUIRE(r.converged);
      if (complementarity_margin(r) <= 1e-4) continue;
      const VectorXd g = oracle::random_vector(static_cast<Eigen::Index>(lat.pair_count()), rng);
      const VectorXd a = backward(lat, r, g, mask);
      const VectorXd exact = face_gradient(lat, mask, r, g);
      CHECK((a - exact).cwiseAbs().maxCoeff() <= 1e-6 * (1 + exact.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("masked instance passes the finite-difference check") {
  std::mt19937_64 rng(3);
  const Lattice lat(4);
  const auto mask = ObservationMask::from_sets(4, {{0b0111}, {0b1111}, {0b1100}, {0b0101}});
  const VectorXd rho_hat = oracle::random_choice_vector(lat, rng);
  // Unobserved coordinates of rho* are not pinned down by the QP, so the
  // upstream gradient lives on the observed ones.
  const VectorXd g = apply_mask(lat, mask, oracle::random_vector(32, rng));
  const GradCheckReport report = gradient_check(lat, rho_hat, g, mask);
  CHECK(report.max_rel_error < 1e-4);
  const VectorXd unobserved = report.adjoint - apply_mask(lat, mask, report.adjoint);
  CHECK(unobserved.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("deep interior gradient is the projection onto image(B)") {
  for (int n : {3, 4}) {
    const Lattice lat(n);
    const auto mask = ObservationMask::full(n);
    const ProjectionResult r = project(lat, uniform_choice(lat), mask);
    REQUIRE(r.converged);
    CHECK(r.d_star.maxCoeff() == kBarrierClampLow);
    std::mt19937_64 rng(4);
    const VectorXd g = oracle::random_vector(static_cast<Eigen::Index>(lat.pair_count()), rng);
    const MatrixXd b = oracle::dense_B(lat);
    const VectorXd expected = b * (b.transpose() * b).ldlt().solve(b.transpose() * g);
    CHECK((backward(lat, r, g, mask) - expected).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("implicit Jacobian is symmetric") {
  std::mt19937_64 rng(5);
  const Lattice lat(5);
  const auto mask = ObservationMask::full(5);
  const ProjectionResult r = project(lat, oracle::random_choice_vector(lat, rng), mask);
  REQUIRE(r.converged);
  const auto size = static_cast<Eigen::Index>(lat.reduced_count());
  for (int trial = 0; trial < 3; ++trial) {
    const VectorXd a = oracle::random_vector(size, rng), b = oracle::random_vector(size, rng);
    const VectorXd ha = solve_converged_hessian(lat, r, a, mask), hb = solve_converged_hessian(lat, r, b, mask);
    CHECK(std::abs(a.dot(hb) - b.dot(ha)) <= 1e-8 * (1 + std::abs(a.dot(hb))));
  }
}

TEST_CASE("active face solve recovers the IPM solution") {
  std::mt19937_64 rng(6);
  const Lattice lat(4);
  const auto mask = ObservationMask::full(4);
  const VectorXd rho_hat = oracle::random_choice_vector(lat, rng);
  const ProjectionResult r = project(lat, rho_hat, mask);
  REQUIRE(r.converged);
  std::vector<bool> active;
  for (Eigen::Index i = 0; i < r.s_star.size(); ++i) active.push_back(r.s_star[i] < r.lambda_star[i]);
  const VectorXd xi = active_face_solution(lat, masked_linear_term(lat, rho_hat, mask), mask, active);
  CHECK((xi - r.xi_star).cwiseAbs().maxCoeff() < 1e-6);
  const VectorXd slack = apply_KB(lat, xi) + unit_flow(lat);
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    if (active[static_cast<std::size_t>(i)]) CHECK(std::abs(slack[i]) < 1e-12);
    else CHECK(slack[i] > 0.0);
  }
  CHECK_THROWS_AS(active_face_solution(Lattice(9), VectorXd::Zero(static_cast<Eigen::Index>(Lattice(9).reduced_count())),
                                       ObservationMask::full(9), {}),
                  ConfigError);
}

TEST_CASE("single alternative has no gradient") {
  const Lattice lat(1);
  VectorXd rho_hat(1);
  rho_hat << 0.4;
  const ProjectionResult r = project(lat, rho_hat, ObservationMask::full(1));
  VectorXd g(1);
  g << 1.0;
  CHECK(backward(lat, r, g, ObservationMask::full(1))[0] == 0.0);
}

TEST_CASE("backward rejects unusable inputs") {
  std::mt19937_64 rng(7);
  const Lattice lat(4);
  const auto mask = ObservationMask::full(4);
  IpmOptions opts;
  opts.max_iter = 1;
  const ProjectionResult early = project(lat, oracle::random_choice_vector(lat, rng), mask, opts);
  REQUIRE_FALSE(early.converged);
  CHECK_THROWS_AS(backward(lat, early, VectorXd::Ones(32), mask), ConfigError);
  const ProjectionResult r = project(lat, oracle::random_choice_vector(lat, rng), mask);
  CHECK_THROWS_AS(backward(lat, r, VectorXd::Ones(31), mask), ConfigError);
  VectorXd bad = VectorXd::Ones(32);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(backward(lat, r, bad, mask), ValidationError);
}

TEST_CASE("conflict measure is the squared distance") {
  std::mt19937_64 rng(8);
  const Lattice lat(3);
  const auto mask = ObservationMask::full(3);
  CHECK(conflict_measure(project(lat, uniform_choice(lat), mask)) < 1e-8);
  const ProjectionResult r = project(lat, oracle::anti_transitive_n3(lat), mask);
  CHECK(conflict_measure(r) > 0.0);
  CHECK(conflict_measure(r) == r.distance_sq);
}
