//==============================================================================
// test_evolution.cpp
//==============================================================================
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "fixture.hpp"
#include "halfwave/errors.hpp"
#include "halfwave/evolution.hpp"

using namespace hw;

namespace {
Field packet(const GridPtr& g, double a = 0.9) {
  return Field::from_function(g, [a](double x) { return a * std::exp(-x * x / 2) * std::polar(1.0, 0.3 * x); });
}
}  // namespace

TEST_SUITE("evolution") {
  TEST_CASE("linear flow is exact on plane waves") {
    auto g = Grid::make(256, 2 * M_PI);
    const Field e = Field::from_function(g, [](double x) { return std::polar(1.0, 5 * x); });
    EvolverConfig c;
    c.nonlinear = false;
    c.dt = 0.05;
    const Field u = evolve(e, 1.0, c).u;
    CHECK(max_abs(u - std::polar(1.0, -5.0) * e) < 1e-12);
  }

  TEST_CASE("the ground state rotates: u(t) = e^{it} Q") {
    const Field& q = fx::ground_state().q;
    EvolverConfig c;
    c.scheme = Scheme::Yoshida4;
    c.dt = 5e-3;
    const Field u = evolve(q, 1.0, c).u;
    CHECK(norm_l2(u - std::polar(1.0, 1.0) * q) < 1e-6 * norm_l2(q));
  }

  TEST_CASE("conservation over unit time at dt = 1e-3") {
    auto g = fx::grid();
    EvolverConfig c;
    const EvolveResult r = evolve(packet(g), 1.0, c);
    CHECK(r.log.max_mass_drift() <= 1e-10);
    CHECK(r.log.max_energy_drift() <= 1e-8);
    CHECK(r.log.max_momentum_drift() <= 1e-8);
    CHECK(r.log.times.back() == doctest::Approx(1.0));
  }

  TEST_CASE("Strang is second order, Yoshida fourth") {
    auto g = fx::grid();
    const Field u0 = packet(g);
    const double T = 0.5;
    EvolverConfig ref;
    ref.scheme = Scheme::Yoshida4;
    ref.dt = 2.5e-4;
    const Field uref = evolve(u0, T, ref).u;
    EvolverConfig s;
    s.dt = 4e-3;
    const double e1 = norm_l2(evolve(u0, T, s).u - uref);
    s.dt = 2e-3;
    const double e2 = norm_l2(evolve(u0, T, s).u - uref);
    CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.05));
    EvolverConfig y;
    y.scheme = Scheme::Yoshida4;
    y.dt = 1.6e-2;
    const double f1 = norm_l2(evolve(u0, T, y).u - uref);
    y.dt = 8e-3;
    const double f2 = norm_l2(evolve(u0, T, y).u - uref);
    CHECK(std::log2(f1 / f2) > 3.7);
  }

  TEST_CASE("backward-forward round trip") {
    auto g = fx::grid();
    const Field u0 = packet(g);
    EvolverConfig c;
    const Field f = evolve(u0, 0.2, c).u;
    const Field b = evolve_backward(f, -0.2, c).u;
    CHECK(norm_l2(b - u0) <= 1e-9 * norm_l2(u0));
  }

  TEST_CASE("H^{1/2} guard stops the run and flags the log") {
    auto g = fx::grid();
    EvolverConfig c;
    c.guard_factor = 1.01;
    c.monitor_stride = 1;
    const EvolveResult r = evolve(packet(g, 3.0), 1.0, c);
    CHECK(r.log.aborted);
    CHECK(!r.log.abort_reason.empty());
    CHECK(r.log.times.back() < 1.0);
    CHECK(r.log.h_half.back() > 1.01 * r.log.h_half.front());
  }

  TEST_CASE("conservation bound violation and argument errors") {
    auto g = fx::grid();
    EvolverConfig c;
    c.max_mass_drift = 1e-300;
    c.monitor_stride = 1;
    CHECK_THROWS_AS(evolve(packet(g), 0.05, c), Error);
    EvolverConfig d;
    CHECK_THROWS_AS(evolve(packet(g), -1.0, d), Error);
    CHECK_THROWS_AS(evolve_backward(packet(g), 1.0, d), Error);
    d.dt = 0;
    CHECK_THROWS_AS(step(packet(g), d), Error);
  }

  TEST_CASE("checkpoints are written in the field container format") {
    auto g = fx::grid();
    const auto dir = std::filesystem::temp_directory_path() / "hw_ckpt_test";
    std::filesystem::remove_all(dir);
    EvolverConfig c;
    c.dt = 1e-2;
    c.checkpoint_interval = 0.05;
    c.checkpoint_dir = dir.string();
    evolve(packet(g), 0.1, c);
    int n = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      const StoredField sf = read_field(e.path().string());
      CHECK(sf.field.size() == g->n());
      ++n;
    }
    CHECK(n >= 1);
    std::filesystem::remove_all(dir);
  }
}
