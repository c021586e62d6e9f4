//==============================================================================
// test_decomposition.cpp
//==============================================================================
#include <cmath>

#include "doctest.h"
#include "fixture.hpp"
#include "halfwave/decomposition.hpp"
#include "halfwave/errors.hpp"

using namespace hw;

namespace {
constexpr double kLam = 0.1;
const GridPtr& xgrid() {
  static const GridPtr g = Grid::make(fx::kN, fx::kL * kLam);
  return g;
}
ModState planted() {
  ModState p;
  p.lambda = kLam, p.xbar = 0.013, p.gamma = 0.7, p.b = 0.02, p.nu = 0.003, p.eta = 1e-3;
  return p;
}
DecompResult base_result() {
  static const DecompResult r = [] {
    const Field u = render_profile(fx::profiles(), planted(), xgrid());
    ModState g = planted();
    g.lambda *= 1.01, g.xbar += 0.002, g.gamma -= 0.01, g.b += 0.003, g.nu -= 0.001;
    return decompose(u, Field(), g, fx::profiles());
  }();
  return r;
}
}  // namespace

TEST_SUITE("decomposition") {
  TEST_CASE("planted parameters are recovered") {
    const DecompResult r = base_result();
    const ModState p = planted();
    CHECK(std::abs(r.params.lambda - p.lambda) <= 1e-8);
    CHECK(std::abs(r.params.xbar - p.xbar) <= 1e-8);
    CHECK(std::abs(r.params.gamma - p.gamma) <= 1e-8);
    CHECK(std::abs(r.params.b - p.b) <= 1e-8);
    CHECK(std::abs(r.params.nu - p.nu) <= 1e-8);
    CHECK(r.diagnostics.eps_l2 < 1e-8);
  }

  TEST_CASE("Newton converges quadratically") {
    const auto& h = base_result().residual_history;
    REQUIRE(h.size() >= 3);
    for (size_t k = 0; k + 1 < h.size(); ++k)
      if (h[k] > 1e-7 && h[k + 1] > 1e-13) CHECK(h[k + 1] / (h[k] * h[k]) < 1e3);
  }

  TEST_CASE("gauge equivariance") {
    const DecompResult r = base_result();
    const Field u = render_profile(fx::profiles(), planted(), xgrid());
    const DecompResult g = decompose(std::polar(1.0, 0.4) * u, Field(), r.params, fx::profiles());
    CHECK(std::remainder(g.params.gamma - r.params.gamma - 0.4, 2 * M_PI) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(std::abs(g.params.lambda - r.params.lambda) < 1e-10);
    CHECK(std::abs(g.params.b - r.params.b) < 1e-10);
  }

  TEST_CASE("translation by one cell") {
    const DecompResult r = base_result();
    const Field u = render_profile(fx::profiles(), planted(), xgrid());
    Field t(xgrid());
    const int n = xgrid()->n();
    for (int j = 0; j < n; ++j) t.v[(j + 1) % n] = u.v[j];
    const DecompResult s = decompose(t, Field(), r.params, fx::profiles());
    CHECK(std::abs(s.params.xbar - r.params.xbar - xgrid()->dx()) < 1e-9);
    CHECK(std::abs(s.params.lambda - r.params.lambda) < 1e-9);
    CHECK(std::abs(s.params.b - r.params.b) < 1e-9);
    CHECK(std::abs(s.params.nu - r.params.nu) < 1e-9);
  }

  TEST_CASE("L2-critical scaling") {
    const DecompResult r = base_result();
    const Field u = render_profile(fx::profiles(), planted(), xgrid());
    const double mu = 1.3;
    const GridPtr sg = Grid::make(fx::kN, fx::kL * kLam * mu);
    const Field us(sg, u.v / std::sqrt(mu));
    ModState g = r.params;
    g.lambda *= mu, g.xbar *= mu;
    const DecompResult s = decompose(us, Field(), g, fx::profiles());
    CHECK(s.params.lambda / r.params.lambda == doctest::Approx(mu).epsilon(1e-8));
    CHECK(std::abs(s.params.b - r.params.b) < 1e-8);
    CHECK(std::abs(s.params.nu - r.params.nu) < 1e-8);
    CHECK(std::abs(s.params.gamma - r.params.gamma) < 1e-8);
  }

  TEST_CASE("orthogonality holds after a perturbation, radiation subtracted") {
    const ModState p = planted();
    const Field z = Field::from_function(xgrid(), [](double x) { return cplx(1e-3 * std::exp(-(x - 0.05) * (x - 0.05) * 40), 0); });
    const Field bump = Field::from_function(xgrid(), [](double x) { return cplx(0, 2e-4 * std::exp(-x * x * 100)); });
    const Field u = render_profile(fx::profiles(), p, xgrid()) + z + bump;
    const DecompResult r = decompose(u, z, p, fx::profiles());
    for (double v : r.ortho_residuals) CHECK(std::abs(v) < 1e-10);
    const auto direct = orthogonality_residuals(u, z, r.params, fx::profiles());
    for (int k = 0; k < 5; ++k) CHECK(std::abs(direct[k] - r.ortho_residuals[k]) < 1e-12);
  }

  TEST_CASE("basin loss is reported") {
    const Field u = Field::from_function(xgrid(), [](double x) { return cplx(std::cos(40 * x), 0); });
    ModState g = planted();
    DecompOptions o;
    o.max_iter = 5;
    try {
      decompose(u, Field(), g, fx::profiles(), o);
      FAIL("expected a basin error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Basin);
    }
  }

  TEST_CASE("cutoff phi': shape and convexity") {
    CHECK(phi_prime(0.5) == doctest::Approx(0.5));
    CHECK(phi_prime(-0.5) == doctest::Approx(-0.5));
    CHECK(phi_prime(3.0) == doctest::Approx(3 - std::exp(-3.0)));
    CHECK(phi_prime(-3.0) == doctest::Approx(-(3 - std::exp(-3.0))));
    for (double y : {1.0, 2.0}) {
      CHECK(phi_prime(y - 1e-9) == doctest::Approx(phi_prime(y + 1e-9)).epsilon(1e-7));
      CHECK(phi_second(y - 1e-9) == doctest::Approx(phi_second(y + 1e-9)).epsilon(1e-6));
    }
    CHECK(cutoff_convexity_min() >= 0);
  }

  TEST_CASE("J_A vanishes at eps = 0 and is quadratic in eps") {
    const DecompResult r = base_result();
    const Field u = render_profile(fx::profiles(), r.params, xgrid());
    CHECK(std::abs(evaluate_ja(u, r, Field(), 2.0, fx::profiles()).total) < 1e-12);
    const Field e = Field::from_function(xgrid(), [](double x) { return cplx(std::exp(-x * x * 50), 0.5 * std::exp(-x * x * 30)); });
    const double j1 = evaluate_ja(u + 1e-4 * e, r, Field(), 2.0, fx::profiles()).total;
    const double j2 = evaluate_ja(u + 2e-4 * e, r, Field(), 2.0, fx::profiles()).total;
    CHECK(j2 / j1 == doctest::Approx(4.0).epsilon(1e-3));
  }

  TEST_CASE("coercivity of the localized functional") {
    const JaProbe p = ja_coercivity_probe(fx::profiles(), fx::op(), 1e-3, 20);
    CHECK(p.kappa > 0);
    CHECK(p.phi_ratio < 0);
    CHECK(p.projected_min_with_q > 0);
  }

  TEST_CASE("modulation vector vanishes along the ODE") {
    const ModConstants c{fx::profiles().c1, fx::profiles().c2, fx::profiles().c3, fx::profiles().c4};
    ModState s0;
    s0.lambda = 0.1, s0.eta = 1e-3, s0.nu = 1e-3;
    const auto st = states_at(s0, c, {-0.0102, -0.01, -0.0098});
    for (double v : mod_vector(st[0], -0.0102, st[1], -0.01, st[2], -0.0098, c)) CHECK(std::abs(v) < 1e-7);
    CHECK_THROWS_AS(mod_vector(st[0], -0.0102, st[1], -0.01, st[2], 0.5, c), Error);
    CHECK_THROWS_AS(mod_vector(st[2], -0.0098, st[1], -0.01, st[0], -0.0102, c), Error);
  }

  TEST_CASE("block Jacobian: off-block entries vanish, diagonal-block entries match") {
    const BlockJacobian bj = block_jacobian(fx::profiles(), fx::op(), 1e-5, 0.0);
    CHECK(bj.max_off_block < 1e-6);
    for (const char* k : {"A14", "A33", "A34", "A52"})
      CHECK_MESSAGE(std::abs(bj.entries.at(k) - bj.expected.at(k)) < 1e-3, k);
    // A25 = -A52 identically in these variables
    CHECK(bj.entries.at("A25") == doctest::Approx(-bj.entries.at("A52")).epsilon(1e-5));
  }
}
