#include "doctest.h"
#include "oracles.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "bbmflow/transport.hpp"

using namespace bbmflow;

namespace {

CostMatrix random_matrix(std::size_t n, std::mt19937_64& rng, double p = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 10.0);
  CostMatrix c{n, std::vector<double>(n * n), 0.0, p};
  for (double& x : c.entries) x = u(rng);
  return c;
}

Ensemble constants(std::vector<double> values, int modes = 2) {
  Ensemble e;
  for (double v : values) e.samples.push_back(make_field(modes, {{0, v}}));
  return e;
}

Ensemble gaussian(std::size_t count, std::uint64_t seed, int modes = 8) {
  return sample_gaussian(MeasureSpec::gaussian_l2(modes), seed, count);
}

double average_cost(const CostMatrix& c, const std::vector<std::size_t>& perm) {
  double sum = 0.0;
  for (std::size_t i = 0; i < c.n; ++i) sum += c(i, perm[i]);
  return std::pow(sum / double(c.n), 1.0 / c.p);
}

void check_plan_marginals(const TransportPlan& plan) {
  const std::size_t n = plan.n;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(plan.mass[i * n + j] >= 0.0);
      row += plan.mass[i * n + j];
      col += plan.mass[j * n + i];
    }
    CHECK(std::abs(row - 1.0 / double(n)) < 1e-9);
    CHECK(std::abs(col - 1.0 / double(n)) < 1e-9);
  }
}

}  // namespace

TEST_CASE("cost matrix entries") {
  const Ensemble zero = constants({0.0});
  Ensemble cosx;
  cosx.samples = {make_field(2, {{1, 0.5}})};
  const CostMatrix c = cost_matrix(zero, cosx, SobolevIndex(0.0), 2.0);
  REQUIRE(c.n == 1);
  CHECK(c(0, 0) == doctest::Approx(oracle::kPi));

  const Ensemble a = gaussian(12, 1);
  const Ensemble b = gaussian(12, 2);
  for (double s : {0.0, 0.4})
    for (double p : {1.0, 2.0, 3.5}) {
      const CostMatrix self = cost_matrix(a, a, SobolevIndex(s), p);
      for (std::size_t i = 0; i < 12; ++i) CHECK(self(i, i) == 0.0);
      const CostMatrix ab = cost_matrix(a, b, SobolevIndex(s), p);
      for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 12; ++j) {
          const double direct = std::pow(oracle::sobolev_norm_squared(a.samples[i] - b.samples[j], s), p / 2.0);
          CHECK(std::abs(ab(i, j) - direct) <= 1e-12 * std::max(1.0, direct));
        }
    }
  CHECK_THROWS_AS(cost_matrix(a, gaussian(11, 2), SobolevIndex(0.0), 2.0), std::invalid_argument);
  CHECK_THROWS_AS(cost_matrix(a, gaussian(12, 2, 9), SobolevIndex(0.0), 2.0), std::invalid_argument);
  CHECK_THROWS_AS(cost_matrix(a, b, SobolevIndex(0.0), 0.5), std::invalid_argument);
}

TEST_CASE("exact and brute force on small cases") {
  const CostMatrix one{1, {9.0}, 0.0, 2.0};
  CHECK(exact_ot(one).value == 3.0);
  CHECK(brute_force_ot(one) == 3.0);

  const CostMatrix swap{2, {0.0, 5.0, 5.0, 0.0}, 0.0, 1.0};
  CHECK(brute_force_ot(swap) == 0.0);

  const auto r = exact_ot(cost_matrix(constants({0.0, 1.0}), constants({1.0, 0.0}), SobolevIndex(0.3), 2.0));
  CHECK(r.value == 0.0);
  CHECK(std::get<Permutation>(r.coupling).target == std::vector<std::size_t>{1, 0});

  CHECK_THROWS_AS((brute_force_ot(CostMatrix{9, std::vector<double>(81, 1.0), 0.0, 1.0})), std::invalid_argument);
  CHECK_THROWS_AS((exact_ot(CostMatrix{2, {0.0, -1.0, 1.0, 0.0}, 0.0, 1.0})), std::invalid_argument);
}

TEST_CASE("ties go to the lowest index") {
  const auto r = exact_ot(CostMatrix{3, std::vector<double>(9, 1.0), 0.0, 1.0});
  CHECK(std::get<Permutation>(r.coupling).target == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("exact_ot equals brute force and beats every sampled permutation") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + std::size_t(trial % 6);
    const double p = trial % 3 == 0 ? 2.0 : 1.0;
    const CostMatrix c = random_matrix(n, rng, p);
    const auto exact = exact_ot(c);
    CHECK(exact.value == brute_force_ot(c));
    const auto& perm = std::get<Permutation>(exact.coupling).target;
    CHECK(average_cost(c, perm) == exact.value);
    CHECK(permutation_value(c, std::get<Permutation>(exact.coupling)) == exact.value);

    std::vector<std::size_t> sampled(n);
    std::iota(sampled.begin(), sampled.end(), std::size_t{0});
    for (int k = 0; k < 5; ++k) {
      std::shuffle(sampled.begin(), sampled.end(), rng);
      CHECK(exact.value <= average_cost(c, sampled));
    }
  }
}

TEST_CASE("metric axioms on random ensemble triples") {
  for (std::uint64_t k = 0; k < 10; ++k) {
    const Ensemble a = gaussian(16, 3 * k + 1);
    const Ensemble b = gaussian(16, 3 * k + 2);
    const Ensemble c = gaussian(16, 3 * k + 3);
    const SobolevIndex s(0.2);
    const double ab = exact_ot(cost_matrix(a, b, s, 2.0)).value;
    const double ba = exact_ot(cost_matrix(b, a, s, 2.0)).value;
    const double bc = exact_ot(cost_matrix(b, c, s, 2.0)).value;
    const double ac = exact_ot(cost_matrix(a, c, s, 2.0)).value;
    CHECK(std::abs(ab - ba) < 1e-9);
    CHECK(exact_ot(cost_matrix(b, a, s, 2.0).transposed()).value == doctest::Approx(ab).epsilon(1e-12));
    CHECK(ac <= ab + bc + 1e-9);
    CHECK(exact_ot(cost_matrix(a, a, s, 2.0)).value == 0.0);
    CHECK(ab > 0.0);

    Ensemble shuffled = a;
    std::reverse(shuffled.samples.begin(), shuffled.samples.end());
    CHECK(exact_ot(cost_matrix(a, shuffled, s, 2.0)).value == 0.0);
  }
}

TEST_CASE("monotone in s' and in p") {
  const Ensemble a = gaussian(24, 5);
  const Ensemble b = gaussian(24, 6);
  double previous = 0.0;
  for (double s : {0.0, 0.2, 0.5, 1.0}) {
    const double d = exact_ot(cost_matrix(a, b, SobolevIndex(s), 2.0)).value;
    CHECK(d >= previous);
    previous = d;
  }
  previous = 0.0;
  for (double p : {1.0, 1.5, 2.0, 4.0}) {
    const double d = exact_ot(cost_matrix(a, b, SobolevIndex(0.3), p)).value;
    CHECK(d >= previous * (1.0 - 1e-12));
    previous = d;
  }
}

TEST_CASE("synchronized bound") {
  const Ensemble a = gaussian(32, 7, 16);
  CHECK(synchronized_bound(a, a, SobolevIndex(0.4), 2.0).value == 0.0);

  const double v = 0.21;
  const Ensemble b = sample_gaussian(MeasureSpec::gaussian_perturbed(16, v), 7, 32);
  const double second = empirical_moment(a, SobolevIndex(0.0), 2.0);
  CHECK(synchronized_bound(a, b, SobolevIndex(0.0), 2.0).value ==
        doctest::Approx(std::abs(1.0 - std::sqrt(1.0 + v)) * second).epsilon(1e-12));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Ensemble c = gaussian(32, 100 + seed, 16);
    for (double p : {1.0, 2.0, 4.0}) {
      const auto sync = synchronized_bound(a, c, SobolevIndex(0.3), p);
      const CostMatrix cm = cost_matrix(a, c, SobolevIndex(0.3), p);
      CHECK(sync.value >= exact_ot(cm).value);
      std::vector<std::size_t> identity(32);
      std::iota(identity.begin(), identity.end(), std::size_t{0});
      CHECK(sync.value == permutation_value(cm, Permutation{identity}));
    }
  }
  CHECK_THROWS_AS(synchronized_bound(a, gaussian(31, 1, 16), SobolevIndex(0.0), 2.0), std::invalid_argument);
}

TEST_CASE("sinkhorn") {
  SUBCASE("rounded plan is feasible and bounded by exact and synchronized") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const Ensemble a = gaussian(20, 200 + seed);
      const Ensemble b = gaussian(20, 300 + seed);
      const CostMatrix c = cost_matrix(a, b, SobolevIndex(0.0), 2.0);
      const double exact = exact_ot(c).value;
      const auto sk = sinkhorn_ot(c, 0.01 * median_cost(c), 1e-6);
      check_plan_marginals(std::get<TransportPlan>(sk.coupling));
      CHECK(sk.marginal_error <= 1e-6);
      CHECK(sk.value >= exact * (1.0 - 1e-12));
      CHECK(sk.value <= synchronized_bound(a, b, SobolevIndex(0.0), 2.0).value);
    }
  }
  SUBCASE("three atoms, within 5% of exact") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const CostMatrix c = random_matrix(3, rng, 2.0);
      const double exact = exact_ot(c).value;
      const auto sk = sinkhorn_ot(c, 0.01 * median_cost(c), 1e-6);
      CHECK(sk.value <= 1.05 * exact);
      CHECK(sk.value >= exact * (1.0 - 1e-12));
    }
  }
  SUBCASE("identical ensembles: value shrinks to 0 with epsilon") {
    const Ensemble a = gaussian(16, 9);
    const CostMatrix c = cost_matrix(a, a, SobolevIndex(0.0), 2.0);
    const double coarse = sinkhorn_ot(c, 1.0, 1e-6).value;
    CHECK(coarse > 0.0);
    for (double eps : {0.1, 0.01, 0.001}) {
      const double value = sinkhorn_ot(c, eps, 1e-6).value;
      CHECK(value < 1e-3 * coarse);
      CHECK(value < 1e-5);
    }
  }
  SUBCASE("rejections and iteration cap") {
    const CostMatrix c{2, {0.0, 1.0, 1.0, 0.0}, 0.0, 1.0};
    CHECK_THROWS_AS(sinkhorn_ot(c, 0.0, 1e-9), std::invalid_argument);
    CHECK_THROWS_AS(sinkhorn_ot(c, 0.1, 0.0), std::invalid_argument);
    std::mt19937_64 rng(1);
    const CostMatrix big = random_matrix(30, rng);
    try {
      sinkhorn_ot(big, 1e-4, 1e-15, SinkhornOptions{20, 10});
      FAIL("expected SinkhornError");
    } catch (const SinkhornError& e) {
      CHECK(e.residual() > 1e-15);
    }
  }
}

TEST_CASE("round_to_marginals repairs an infeasible plan") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TransportPlan plan{7, std::vector<double>(49)};
  for (double& m : plan.mass) m = u(rng) / 49.0 * 2.0;
  check_plan_marginals(round_to_marginals(plan));
}

TEST_CASE("median cost") {
  CHECK(median_cost(CostMatrix{2, {4.0, 1.0, 3.0, 2.0}, 0.0, 1.0}) == 3.0);
}
