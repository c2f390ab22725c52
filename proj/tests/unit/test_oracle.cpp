#include "doctest.h"
#include "mmo/oracle.hpp"
#include "mmo/structure.hpp"
#include "test_helpers.hpp"

using namespace mmo;
using namespace mmo::testing;

namespace {

RVector vec(std::initializer_list<double> v) {
  RVector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("grid water-filling") {
  RVector p = grid_waterfill(vec({2, 1}), 1.0);
  CHECK(std::abs(p(0) - 0.75) <= 1e-4 + 1e-12);
  CHECK(std::abs(p(1) - 0.25) <= 1e-4 + 1e-12);
  p = grid_waterfill(vec({1}), 2.0);
  CHECK(p(0) == doctest::Approx(2.0));
  p = grid_waterfill(vec({5, 5}), 4.0, 1.0);
  CHECK((p - RVector::Ones(2)).norm() < 1e-12);
  CHECK_THROWS_AS(grid_waterfill(RVector::Ones(4), 1.0), UnsupportedRank);
}

TEST_CASE("log-det oracle matches analytic capacity") {
  Rng rng(41);
  const CMatrix pi = random_psd(3, rng, 0.1);
  const double capacity = (sorted_evd(pi).eigvals.array() * waterfill(sorted_evd(pi).eigvals, 2.0).powers.array()).log1p().sum();
  const PowerConstraint c = sum_power(3, 2.0);
  const auto res = projected_gradient(single_user_log_det(pi), {c}, {random_feasible(c, 3, 3, rng)});
  CHECK(rel_diff(res.report.best_objective, capacity) < 1e-4);
  CHECK(res.report.feasibility_residual <= 1e-8);
}

TEST_CASE("analytic gradients agree with central differences") {
  Rng rng(42);
  const CMatrix pi = random_psd(3, rng);
  std::vector<CMatrix> x = {complex_gaussian(3, 2, rng)};
  CHECK(gradient_check(single_user_log_det(pi), x, rng) < 1e-4);

  std::vector<CMatrix> h = {complex_gaussian(4, 2, rng), complex_gaussian(4, 3, rng)};
  std::vector<CMatrix> w = {CMatrix::Identity(2, 2), 2.0 * CMatrix::Identity(3, 3)};
  std::vector<CMatrix> xs = {complex_gaussian(2, 2, rng), complex_gaussian(3, 3, rng)};
  CHECK(gradient_check(uplink_sum_rate_objective(h, random_psd(4, rng, 0.5), w), xs, rng) < 1e-4);

  const CMatrix cx = random_psd(4, rng, 0.5);
  std::vector<CMatrix> hs = {complex_gaussian(3, 2, rng), complex_gaussian(3, 2, rng)};
  std::vector<CMatrix> rn = {random_psd(3, rng, 0.5), random_psd(3, rng, 0.5)};
  std::vector<CMatrix> xk = {complex_gaussian(2, 2, rng), complex_gaussian(2, 2, rng)};
  CHECK(gradient_check(sensor_mutual_info_objective(cx, hs, rn), xk, rng) < 1e-4);
  CHECK(gradient_check(sensor_lmmse_objective(cx, hs, rn), xk, rng) < 1e-4);
}

TEST_CASE("projections are idempotent on feasible points") {
  Rng rng(43);
  const std::vector<PowerConstraint> families = {ShapingConstraint{exp_corr(3, 0.6)}, JointConstraint{2.0, 1.4},
                                                 per_antenna({1.2, 0.8, 1.0})};
  for (const auto& c : families) {
    for (int t = 0; t < 10; ++t) {
      const CMatrix x = random_feasible(c, 3, 3, rng);
      CHECK(is_feasible(c, x, 1e-9));
      CHECK((project(c, x) - x).norm() < 1e-10);
      const CMatrix y = project(c, 3.0 * complex_gaussian(3, 3, rng));
      CHECK(is_feasible(c, y, 1e-7));
    }
  }
}

TEST_CASE("pareto check accepts structured optima and rejects a scaled-down point") {
  Rng rng(44);
  const CMatrix pi = random_psd(2, rng, 0.1);
  const PowerConstraint c = JointConstraint{2.0, 1.4};
  const auto s = solve_structure(pi, c, log_det_scalarizer(), 2);
  CHECK(pareto_dominance_check(s.dense, pi, c, 2000, rng));
  CHECK_FALSE(pareto_dominance_check(0.5 * s.dense, pi, c, 2000, rng));
}
