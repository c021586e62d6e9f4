//==============================================================================
// test_profiles.cpp
//==============================================================================
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "fixture.hpp"
#include "halfwave/errors.hpp"

using namespace hw;

TEST_SUITE("profiles") {
  TEST_CASE("index set up to order 5") {
    const auto idx = profile_index_set(5);
    for (const auto& m : idx) {
      CHECK(m.order() >= 1);
      CHECK(m.order() <= 5);
    }
    CHECK(std::find(idx.begin(), idx.end(), Mono{1, 0, 0}) != idx.end());
    CHECK(std::find(idx.begin(), idx.end(), Mono{1, 0, 2}) != idx.end());
    CHECK(std::find(idx.begin(), idx.end(), Mono{0, 1, 0}) != idx.end());
  }

  TEST_CASE("first correctors are the generalized kernel") {
    const auto& ps = fx::profiles();
    const auto& k = fx::kernel();
    CHECK(norm_l2(ps.R(1, 0, 0) - k.s1) < 1e-10 * norm_l2(k.s1));
    CHECK(norm_l2(ps.R(0, 1, 0) - k.g1) < 1e-10 * norm_l2(k.g1));
    CHECK(norm_l2(ps.R(0, 0, 1) - k.rho1) < 1e-10 * norm_l2(k.rho1));
  }

  TEST_CASE("corrector equations and parity") {
    for (const auto& [name, v] : fx::profiles().identity_residuals) {
      if (name.rfind("equation residual", 0) == 0) CHECK_MESSAGE(v < 1e-9, name);
      if (name.rfind("parity", 0) == 0) CHECK_MESSAGE(v < 1e-9, name);
    }
  }

  TEST_CASE("constants: c4 < 0 and both c4 formulas agree") {
    const auto& ps = fx::profiles();
    CHECK(ps.c4 < 0);
    // 8e-6 at L = 64, 3e-8 at L = 256
    CHECK(ps.identity_residuals.at("c4 formula vs closed form") < 1e-4);
    CHECK(ps.c4 == doctest::Approx(-ps.inner_products.at("(L-G1,G1)") / (2 * ps.inner_products.at("(L-S1,S1)")))
                       .epsilon(1e-4));
  }

  TEST_CASE("assembled profile and parameter derivatives") {
    const auto& ps = fx::profiles();
    const double b = 0.03, nu = 0.01, eta = 2e-3, h = 1e-5;
    for (int w = 0; w < 3; ++w) {
      double p[3] = {b, nu, eta};
      p[w] += h;
      const Field plus = assemble_qp(ps, p[0], p[1], p[2]);
      p[w] -= 2 * h;
      const Field minus = assemble_qp(ps, p[0], p[1], p[2]);
      const Field fd = (1.0 / (2 * h)) * (plus - minus);
      CHECK(norm_l2(fd - qp_derivative(ps, b, nu, eta, w)) < 1e-7 * norm_l2(fd));
    }
    CHECK(norm_l2(assemble_qp(ps, 0, 0, 0) - ps.q) == 0.0);
  }

  TEST_CASE("profile error scales like s^6") {
    const SlopeReport r = profile_error_scaling(fx::profiles(), fx::op());
    CHECK(r.slope >= 5.5);
    CHECK(r.slope <= 6.5);
  }

  TEST_CASE("mass derivative along eta equals 2(Q,rho1) < 0") {
    const FitReport r = mass_derivative_check(fx::profiles());
    CHECK(r.fitted < 0);
    CHECK(r.rel_error < 0.01);
  }

  TEST_CASE("energy and momentum expansions") {
    const FitReport e = energy_expansion_check(fx::profiles());
    const FitReport p = momentum_expansion_check(fx::profiles());
    CHECK(e.rel_error < 0.02);
    CHECK(p.rel_error < 0.02);
  }

  TEST_CASE("persistence round trip") {
    const auto& ps = fx::profiles();
    const auto dir = std::filesystem::temp_directory_path() / "hw_profiles_test";
    std::filesystem::remove_all(dir);
    save_profiles(ps, dir.string());
    const ProfileSet back = load_profiles(dir.string());
    CHECK(back.c4 == ps.c4);
    CHECK(back.correctors.size() == ps.correctors.size());
    CHECK(max_abs(back.R(1, 1, 1) - ps.R(1, 1, 1)) == 0.0);
    std::filesystem::remove_all(dir);
  }
}
