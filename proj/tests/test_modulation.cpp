//==============================================================================
// test_modulation.cpp
// Uses fixed constants of the measured size so the suite does not depend on
// the profile build.
//==============================================================================
#include <cmath>
#include <map>

#include "doctest.h"
#include "halfwave/errors.hpp"
#include "halfwave/modulation.hpp"

using namespace hw;

namespace {
const ModConstants kC{-0.13638, 0.067038, -0.52244, -5.30101};
const std::map<std::string, double> kIp = {{"(L-S1,S1)", 0.2041039}, {"(L-G1,G1)", 2.1639134}};
}  // namespace

TEST_SUITE("modulation") {
  TEST_CASE("simplified system against the closed form") {
    const ClosedFormValidation v = validate_against_closed_form(kC.c4, 2.0, 1e-3, 2e-4, -0.3);
    CHECK(v.max_error <= 1e-8);
    CHECK(v.ell_drift <= 1e-10);
    CHECK(v.min_lambda == doctest::Approx(v.lambda_at_zero).epsilon(1e-12));
  }

  TEST_CASE("initial state and the C0/D0 formulas") {
    const C0D0 cd = compute_c0_d0(0.05, 0.3, 0.01, 0.1, kIp);
    CHECK(cd.c0 == doctest::Approx(std::sqrt(0.5 * 0.2041039 / 0.04)));
    CHECK(cd.d0 == doctest::Approx(0.2 / (2 * 2.1639134)));
    const ModState s = initial_state(cd.c0, cd.d0, 1e-3, kC);
    CHECK(s.lambda == doctest::Approx(2 * cd.c0 * cd.c0 * 1e-3));
    CHECK(s.b == 0.0);
    CHECK(s.nu == doctest::Approx(cd.d0 * s.lambda));
    CHECK(std::isfinite(s.gamma));
  }

  TEST_CASE("full system: nu/lambda conserved, b >= 0, invariant law") {
    for (double eta : {1e-2, 3e-3, 1e-3}) {
      const double c0 = 1.5, d0 = 0.05;
      const ModState s0 = initial_state(c0, d0, eta, kC);
      const ModTrajectory tr = integrate(s0, kC, -0.5);
      const ModDiagnostics d = diagnose(tr, kC, c0, d0);
      CHECK(d.nu_over_lambda_drift <= 1e-8);
      CHECK(d.min_b >= 0.0);
      CHECK(d.invariant_law_residual <= 1e-8);
      CHECK(d.ratio_constant <= 10.0);
      CHECK(d.t_min_lambda == 0.0);
      CHECK(d.min_lambda == doctest::Approx(2 * c0 * c0 * eta));
      CHECK(d.quartic_fit_residual < 1e-6);
      CHECK(std::abs(d.quad_correction) < 0.1);
    }
  }

  TEST_CASE("lambda(0) is linear in eta") {
    const double c0 = 2.5;
    const double a = initial_state(c0, 0.0, 1e-3, kC).lambda, b = initial_state(c0, 0.0, 4e-3, kC).lambda;
    CHECK(b == doctest::Approx(4 * a).epsilon(1e-14));
  }

  TEST_CASE("states_at agrees with the dense trajectory") {
    const ModState s0 = initial_state(3.0, 0.05, 3e-3, kC);
    const ModTrajectory tr = integrate(s0, kC, -0.4);
    const size_t k = tr.t.size() / 3;
    const ModState s = states_at(s0, kC, {tr.t[k]})[0];
    CHECK(s.lambda == doctest::Approx(tr.states[k].lambda).epsilon(1e-10));
    CHECK(s.b == doctest::Approx(tr.states[k].b).epsilon(1e-9));
  }

  TEST_CASE("integrator order under step halving") {
    const ModState s0 = initial_state(3.0, 0.05, 3e-3, kC);
    const auto orders = step_halving_orders(s0, kC, -0.3);
    REQUIRE(!orders.empty());
    for (double o : orders) CHECK(o > 4.5);
  }

  TEST_CASE("domain errors") {
    ModState s;
    s.lambda = 0.1;
    CHECK_THROWS_AS(integrate(s, kC, 0.1), Error);
    CHECK_THROWS_AS(initial_state(1.0, 0.0, 0.2, kC), Error);
    CHECK_THROWS_AS(initial_state(-1.0, 0.0, 1e-3, kC), Error);
    CHECK_THROWS_AS(compute_c0_d0(0.0, 0.0, 0.1, 0.0, kIp), Error);
    CHECK_THROWS_AS(validate_against_closed_form(1.0, 1.0, 1e-3, 0, -0.1), Error);
  }

  TEST_CASE("trajectory CSV header") {
    const ModState s0 = initial_state(3.0, 0.05, 3e-3, kC);
    const std::string csv = trajectory_csv(integrate(s0, kC, -0.1));
    CHECK(csv.rfind("t,lambda,b,nu,xbar,gamma,I,nu_over_lambda\n", 0) == 0);
  }
}
