//==============================================================================
// test_linearized.cpp
//==============================================================================
#include <cmath>

#include "doctest.h"
#include "fixture.hpp"
#include "halfwave/errors.hpp"

using namespace hw;

TEST_SUITE("linearized") {
  TEST_CASE("kernel of L_Q: iQ and grad Q") {
    const auto& op = fx::op();
    CHECK(op.kernel_residuals.at("L-Q") < 1e-10);
    CHECK(op.kernel_residuals.at("L+gradQ") < 1e-7);
  }

  TEST_CASE("generalized kernel relations") {
    const auto& rr = fx::kernel().relation_residuals;
    CHECK(rr.at("L_Q[iQ] = 0") < 1e-10);
    CHECK(rr.at("L_Q[gradQ] = 0") < 1e-7);
    CHECK(rr.at("L_Q[iG1] = -i gradQ") < 1e-10);
    CHECK(rr.at("L_Q[iS1] = i LambdaQ") < 1e-10);
    CHECK(rr.at("L_Q[rho1] = S1") < 1e-10);
    // L+ Lambda Q = -Q holds only up to a box-size defect (1.7e-2 at L = 64)
    CHECK(rr.at("L_Q[LambdaQ] = -Q") < 5e-2);
  }

  TEST_CASE("inner-product identities") {
    const auto& ip = fx::kernel().inner_products;
    CHECK(ip.at("(LambdaQ,S1)") > 0);
    CHECK(ip.at("(L-S1,S1)") == doctest::Approx(ip.at("(LambdaQ,S1)")).epsilon(1e-9));
    // (grad Q, G1) = -(L- G1, G1) from L- G1 = -grad Q
    CHECK(ip.at("(gradQ,G1)") == doctest::Approx(-ip.at("(L-G1,G1)")).epsilon(1e-9));
    // exact on the line; the L = 64 box leaves a 1.1% defect
    CHECK(ip.at("(Q,rho1)") == doctest::Approx(-ip.at("(LambdaQ,S1)")).epsilon(2e-2));
  }

  TEST_CASE("parity of the kernel elements") {
    const auto& k = fx::kernel();
    CHECK(asymmetry(k.s1, +1) < 1e-10 * max_abs(k.s1));
    CHECK(asymmetry(k.rho1, +1) < 1e-10 * max_abs(k.rho1));
    CHECK(asymmetry(k.g1, -1) < 1e-10 * max_abs(k.g1));
  }

  TEST_CASE("self-adjointness of both blocks") {
    const auto& op = fx::op();
    const Field f = Field::from_function(fx::grid(), [](double y) { return std::exp(-0.3 * y * y) * (1 + y); });
    const Field h = Field::from_function(fx::grid(), [](double y) { return std::exp(-0.2 * (y - 1) * (y - 1)); });
    for (Block b : {Block::Plus, Block::Minus})
      CHECK(std::abs(inner_r(op.apply(b, f), h) - inner_r(f, op.apply(b, h))) < 1e-11);
  }

  TEST_CASE("constrained solve and the solvability check") {
    const auto& op = fx::op();
    const Field& q = op.q();
    const Field rhs = fx::kernel().lambda_q;
    const Field x = op.solve(Block::Minus, rhs, {q});
    CHECK(norm_l2(op.apply(Block::Minus, x) - rhs) < 1e-10 * norm_l2(rhs));
    CHECK(std::abs(inner_r(x, q)) < 1e-10);
    try {
      op.solve(Block::Minus, q, {q});
      FAIL("expected Solvability");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Solvability);
    }
  }

  TEST_CASE("coercivity: positive on the {Q, S1, G1, i rho1} complement, negative without it") {
    const auto& op = fx::op();
    const auto& k = fx::kernel();
    const SpectrumResult proj = coercivity_spectrum(op, {op.q(), k.s1, k.g1, cplx(0, 1) * k.rho1});
    const SpectrumResult free = coercivity_spectrum(op, {});
    CHECK(proj.min_eigenvalue > 0);
    CHECK(free.min_eigenvalue < 0);
    const SpectrumResult phi = ground_eigenfunction(op);
    CHECK(phi.min_eigenvalue < 0);
  }

  TEST_CASE("degenerate orthogonality set") {
    const auto& op = fx::op();
    CHECK_THROWS_AS(coercivity_spectrum(op, {op.q(), 2.0 * op.q()}), Error);
  }
}
