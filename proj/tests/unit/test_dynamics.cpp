#include "doctest.h"
#include "oracles.hpp"

#include "bbmflow/dynamics.hpp"
#include "bbmflow/random_fields.hpp"

using namespace bbmflow;

namespace {

SpectralField gaussian(int modes, std::size_t index, std::uint64_t seed = 11) {
  return sample_gaussian_one(MeasureSpec::gaussian_l2(modes), seed, index);
}

double l2_error(const SpectralField& a, const SpectralField& b) {
  return sobolev_distance(a, b, SobolevIndex(0.0));
}

}  // namespace

TEST_CASE("EvolveParams validation") {
  CHECK_NOTHROW((EvolveParams{1e-3, 8, false}.validate(8)));
  CHECK_THROWS_AS((EvolveParams{0.0, 8, false}.validate(8)), std::invalid_argument);
  CHECK_THROWS_AS((EvolveParams{1e-3, 9, false}.validate(8)), std::invalid_argument);
  CHECK_THROWS_AS((EvolveParams{1e-3, -1, false}.validate(8)), std::invalid_argument);
  CHECK_THROWS_AS((evolve(gaussian(8, 0), std::nan(""), EvolveParams{1e-3, 8, false})), std::invalid_argument);
}

TEST_CASE("rhs matches the direct convolution vector field") {
  for (int modes : {1, 4, 16, 32})
    for (int cutoff : {0, modes / 2, modes})
      for (bool linear : {false, true}) {
        const SpectralField u = gaussian(modes, std::size_t(cutoff));
        const SpectralField fast = bbm_rhs(u, EvolveParams{1e-3, cutoff, linear});
        const auto slow = oracle::bbm_rhs(u, cutoff, linear);
        CHECK(fast.coefficient(0) == Complex(0.0, 0.0));
        for (int n = 0; n <= modes; ++n) CHECK(std::abs(fast.coefficient(n) - slow[n]) < 1e-13);
      }
}

TEST_CASE("t = 0 returns the input and the flow is time reversible") {
  const EvolveParams params{1e-3, 16, false};
  const SpectralField u0 = gaussian(16, 1);
  CHECK(evolve(u0, 0.0, params) == u0);
  const SpectralField back = evolve(evolve(u0, 0.7, params), -0.7, params);
  CHECK(l2_error(back, u0) < 1e-10);
}

TEST_CASE("partial last step lands on t") {
  const SpectralField u0 = gaussian(8, 2);
  const EvolveParams coarse{0.3, 8, false};
  const EvolveParams fine{1e-4, 8, false};
  CHECK(l2_error(evolve(u0, 1.0, coarse), evolve(u0, 1.0, fine)) < 1e-3);
  const SpectralField split = evolve(evolve(u0, 0.5, fine), 0.5, fine);
  CHECK(l2_error(split, evolve(u0, 1.0, fine)) < 1e-10);
}

TEST_CASE("linear flow rotates each mode by e^{-int/(1+n²)}") {
  const int modes = 64;
  const SpectralField u0 = gaussian(modes, 3);
  const SpectralField u = evolve(u0, 1.0, EvolveParams{1e-3, modes, true});
  for (int n = 0; n <= modes; ++n) {
    const Complex exact = u0.coefficient(n) * std::polar(1.0, -double(n) / (1.0 + double(n) * n));
    CHECK(std::abs(u.coefficient(n) - exact) < 1e-10);
  }
}

TEST_CASE("mean and H^1 energy are conserved along the truncated flow") {
  const SpectralField u0 = gaussian(32, 4);
  const EvolveParams params{1e-3, 32, false};
  const auto q0 = conserved_quantities(u0);
  const auto q1 = conserved_quantities(evolve(u0, 2.0, params));
  CHECK(q1.mean == q0.mean);
  CHECK(std::abs(q1.h1_energy - q0.h1_energy) / q0.h1_energy < 1e-8);
  CHECK(q0.h1_energy == doctest::Approx(sobolev_norm_squared(u0, SobolevIndex(1.0))).epsilon(1e-15));
}

TEST_CASE("modes above the cutoff stay frozen") {
  const SpectralField u0 = gaussian(16, 5);
  const SpectralField u = evolve(u0, 1.0, EvolveParams{1e-3, 6, false});
  for (int n = 7; n <= 16; ++n) CHECK(u.coefficient(n) == u0.coefficient(n));
  CHECK(u.coefficient(3) != u0.coefficient(3));
}

TEST_CASE("RK4 error ratio under dt halving is near 16") {
  const SpectralField u0 = gaussian(16, 6);
  const double t = 2.0;
  const double dt = 0.1;
  const SpectralField ref = evolve(u0, t, EvolveParams{dt / 8, 16, false});
  const double e1 = l2_error(evolve(u0, t, EvolveParams{dt, 16, false}), ref);
  const double e2 = l2_error(evolve(u0, t, EvolveParams{dt / 2, 16, false}), ref);
  const double ratio = e1 / e2;
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("evolve fails loudly on non-finite values") {
  const SpectralField huge = make_field(4, {{1, 1e200}});
  try {
    evolve(huge, 5.0, EvolveParams{1.0, 4, false});
    FAIL("expected EvolveError");
  } catch (const EvolveError& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.time() <= 5.0);
  }
}

TEST_CASE("evolve_tracked records sups, checkpoints and the path integral") {
  const SpectralField u0 = gaussian(16, 7);
  const EvolveParams params{1e-3, 16, false};
  const std::vector<double> checkpoints{0.0, 0.5, 1.0};
  const auto tracked = evolve_tracked(u0, 1.0, params, checkpoints);
  CHECK(tracked.final_state == evolve(u0, 1.0, params));
  CHECK(tracked.checkpoint_sup[0] == doctest::Approx(sobolev_norm(u0, SobolevIndex(0.0))));
  CHECK(tracked.checkpoint_sup[1] <= tracked.checkpoint_sup[2]);
  CHECK(tracked.checkpoint_sup[2] == tracked.sup_l2);
  CHECK(tracked.sup_l2 >= sobolev_norm(tracked.final_state, SobolevIndex(0.0)));
  CHECK_THROWS_AS((evolve_tracked(u0, 1.0, params, std::vector<double>{2.0})), std::invalid_argument);

  // Constants are steady states.
  const SpectralField c = make_field(8, {{0, 0.3}});
  const auto steady = evolve_tracked(c, -2.0, EvolveParams{1e-2, 8, false});
  const double norm = sobolev_norm(c, SobolevIndex(0.0));
  CHECK(steady.final_state == c);
  CHECK(steady.l2_integral == doctest::Approx(2.0 * norm).epsilon(1e-12));
}

TEST_CASE("bound formulas on hand-computed values") {
  const BoundParams bp{0.5, 0.75, 1.0, 1.0};
  // T = 2, N = ⌈4²⌉ = 16, 16^{1/4} = 2.
  CHECK(growth_cutoff(2.0, 1.0, bp) == 16.0);
  CHECK(bound_growth(2.0, 1.0, bp) == doctest::Approx(0.5 + 2.0 * 2.0));
  CHECK(bound_growth(2.0, -1.0, bp) == bound_growth(2.0, 1.0, bp));
  CHECK(bound_growth(0.0, 3.0, bp) == doctest::Approx(0.25));
  // r = 1/2: 1 + √4 + √16 = 7.
  CHECK(bound_difference(2.0, 8.0, 0.1, 1.0, 0.0, bp) == doctest::Approx(0.7));
  CHECK(bound_difference(2.0, 8.0, 0.1, 1.0, 1.5, bp) == doctest::Approx(0.7 * std::exp(1.5)));
  CHECK(bound_difference(0.0, 0.0, 0.1, 1.0, 0.0, bp) == doctest::Approx(0.1));
  CHECK_THROWS_AS((BoundParams({0.5, 0.4, 1.0, 1.0}).validate()), std::invalid_argument);
  CHECK_THROWS_AS((BoundParams({0.5, 0.75, 0.0, 1.0}).validate()), std::invalid_argument);
}

TEST_CASE("bounds are nonnegative and bound_difference is linear in the initial distance") {
  const BoundParams bp{0.4, 0.6, 1.7, 1.0};
  for (double n1 : {0.0, 0.3, 5.0})
    for (double t : {0.0, 1.0, 4.0}) {
      CHECK(bound_growth(n1, t, bp) >= 0.0);
      const double one = bound_difference(n1, 2.0, 1.0, t, 0.2, bp);
      CHECK(one >= 0.0);
      CHECK(bound_difference(n1, 2.0, 3.5, t, 0.2, bp) == doctest::Approx(3.5 * one).epsilon(1e-14));
    }
}

TEST_CASE("calibration of the difference constant") {
  const EvolveParams params{1e-2, 8, false};
  const SobolevIndex s(0.4);
  const BoundParams bp0{0.4, 0.6, 1.0, 1.0};
  const CalibrationGrid grid;

  SUBCASE("identical data: grid minimum") {
    const DifferenceScenario same{gaussian(8, 1), gaussian(8, 1), 1.0};
    const auto cal = calibrate_difference_constant(std::vector{measure_difference(same, s, params)}, bp0, grid);
    CHECK(cal.grid_exponent == grid.min_exponent);
    CHECK(cal.params.c == 1.0);
  }

  std::vector<DifferenceMeasurement> data;
  for (std::size_t i = 0; i < 12; ++i)
    data.push_back(measure_difference({gaussian(8, i), gaussian(8, i, 99), 1.0}, s, params));

  SUBCASE("result is minimal on the grid and satisfies every scenario") {
    const auto cal = calibrate_difference_constant(data, bp0, grid);
    for (const auto& m : data)
      CHECK(m.lhs <= bound_difference(m.norm1_Hs, m.norm2_Hs, m.diff_Hs, m.t, m.path_integral, cal.params));
    BoundParams below = cal.params;
    below.C = grid.at(cal.grid_exponent - 1);
    bool violated = false;
    for (const auto& m : data)
      violated |= m.lhs > bound_difference(m.norm1_Hs, m.norm2_Hs, m.diff_Hs, m.t, m.path_integral, below);
    CHECK(violated);
  }

  SUBCASE("removing a scenario never raises C") {
    const double full = calibrate_difference_constant(data, bp0, grid).params.C;
    for (std::size_t drop = 0; drop < data.size(); ++drop) {
      auto fewer = data;
      fewer.erase(fewer.begin() + std::ptrdiff_t(drop));
      CHECK(calibrate_difference_constant(fewer, bp0, grid).params.C <= full);
    }
  }

  SUBCASE("bound that already holds at C = 1 calibrates to at most one grid step above 1") {
    std::vector<DifferenceMeasurement> easy;
    for (const auto& m : data)
      if (m.lhs <= bound_difference(m.norm1_Hs, m.norm2_Hs, m.diff_Hs, m.t, m.path_integral, bp0)) easy.push_back(m);
    REQUIRE(!easy.empty());
    CHECK(calibrate_difference_constant(easy, bp0, grid).params.C <= grid.ratio);
  }

  SUBCASE("no admissible C reports the worst scenario") {
    auto bad = data;
    bad[5].lhs = 1e300;
    try {
      calibrate_difference_constant(bad, bp0, grid);
      FAIL("expected CalibrationError");
    } catch (const CalibrationError& e) {
      CHECK(e.worst_index() == 5);
      CHECK(e.worst_ratio() > 1.0);
    }
  }

  SUBCASE("calibrate_constants evolves and agrees") {
    std::vector<DifferenceScenario> scenarios;
    for (std::size_t i = 0; i < 12; ++i) scenarios.push_back({gaussian(8, i), gaussian(8, i, 99), 1.0});
    CHECK(calibrate_constants(scenarios, bp0, params, grid).C == calibrate_difference_constant(data, bp0, grid).params.C);
  }
}

TEST_CASE("calibration of the growth constant") {
  const EvolveParams params{1e-2, 8, false};
  const BoundParams bp0{0.4, 0.6, 1.0, 1.0};
  std::vector<GrowthMeasurement> data;
  for (std::size_t i = 0; i < 8; ++i) {
    const SpectralField u0 = gaussian(8, i);
    data.push_back({evolve_tracked(u0, 2.0, params).sup_l2, sobolev_norm(u0, SobolevIndex(0.4)), 2.0});
  }
  const auto cal = calibrate_growth_constant(data, bp0);
  for (const auto& m : data) CHECK(m.lhs <= bound_growth(m.norm_Hs, m.t, cal.params));
  CHECK(cal.binding_ratio <= 1.0);
  CHECK(calibrate_growth_constant(std::vector<GrowthMeasurement>{{0.0, 0.0, 1.0}}, bp0).grid_exponent ==
        CalibrationGrid{}.min_exponent);
}
