//==============================================================================
// test_ground_state.cpp
//==============================================================================
#include <cmath>

#include "doctest.h"
#include "fixture.hpp"
#include "halfwave/errors.hpp"
#include "halfwave/linearized.hpp"

using namespace hw;

TEST_SUITE("ground_state") {
  TEST_CASE("Petviashvili residual, positivity, evenness") {
    const GroundState& gs = fx::ground_state();
    CHECK(gs.relative_residual() <= 1e-10);
    CHECK(gs.q.re().minCoeff() > 0);
    CHECK(gs.q.im().cwiseAbs().maxCoeff() == 0.0);
    CHECK(asymmetry(gs.q, +1) < 1e-12 * max_abs(gs.q));
    // maximum at the origin
    CHECK(gs.q.v[fx::grid()->origin_index()].real() == doctest::Approx(max_abs(gs.q)));
  }

  TEST_CASE("gradient-flow oracle agrees with Petviashvili") {
    const GroundState& gs = fx::ground_state();
    const GroundState gf = solve_gradient_flow_oracle(fx::grid());
    CHECK(gf.relative_residual() <= 1e-10);
    CHECK(aligned_relative_difference(gs.q, gf.q) <= 1e-7);
  }

  TEST_CASE("Pohozaev-type balances hold up to box corrections") {
    const Field& q = fx::ground_state().q;
    // (DQ,Q) + (Q,Q) = (Q^3,Q), and on the line 1/2(DQ,Q) = 1/4 int Q^4 (E = 0)
    const double dq = sobolev_norm(q, 0.5, true);
    double q4 = 0;
    for (int j = 0; j < q.size(); ++j) q4 += std::pow(q.v[j].real(), 4);
    q4 *= q.grid->dx();
    CHECK(std::abs(dq * dq + inner_r(q, q) - q4) < 1e-9 * q4);
    // E(Q) is small relative to |Q|^2_{H^1/2} and shrinks like L^-2
    const double e = conserved_quantities(q).energy / (dq * dq);
    CHECK(std::abs(e) < 2e-3);
  }

  TEST_CASE("periodized decay fit") {
    const GroundState& gs = fx::ground_state();
    CHECK(gs.decay_variation < 0.02);
    CHECK(gs.decay_coefficient > 0.9);
    CHECK(gs.decay_coefficient < 1.2);
  }

  TEST_CASE("Gagliardo-Nirenberg sharpness: Q maximizes J") {
    const GnReport r = gn_sharpness_check(fx::ground_state(), 40);
    CHECK(r.gn_violations == 0);
    CHECK(r.energy_violations == 0);
    CHECK(r.max_ratio <= 1.0 + 1e-9);
    CHECK(r.energy_half_q > 0);
  }

  TEST_CASE("gauge, translation and scaling symmetries map solutions to solutions") {
    const Field& q = fx::ground_state().q;
    CHECK(ground_state_residual(std::polar(1.0, 0.7) * q) <= 1e-10 * norm_l2(q));
    CHECK(ground_state_residual(translate(q, 3 * q.grid->dx())) <= 1e-10 * norm_l2(q));
  }

  TEST_CASE("errors: tolerance floor and a coarse grid") {
    CHECK_THROWS_AS(solve_petviashvili(fx::grid(), 1e-15), Error);
    // dx = 1/16 leaves the kernel invariants above threshold: stale ground state
    auto coarse = Grid::make(1024, 64.0);
    const GroundState gs = solve_petviashvili(coarse);
    LinearizedOptions o;
    o.store_dense = false;
    o.kernel_tol = 1e-8;
    try {
      LinearizedOperator::build(gs, o);
      FAIL("expected StaleGroundState");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::StaleGroundState);
    }
  }
}
