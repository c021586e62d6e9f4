//==============================================================================
// test_spectral.cpp
//==============================================================================
#include <cmath>

#include "doctest.h"
#include "halfwave/errors.hpp"
#include "halfwave/spectral.hpp"

using namespace hw;

namespace {
constexpr double kPi = 3.14159265358979323846;

Field plane_wave(const GridPtr& g, int k) {
  const double xi = 2 * kPi * k / g->length();
  return Field::from_function(g, [xi](double x) { return std::polar(1.0, xi * x); });
}

Field bump(const GridPtr& g, double c = 0.0, double w = 1.5) {
  return Field::from_function(g, [=](double x) { return cplx(std::exp(-(x - c) * (x - c) / (2 * w * w)), 0.3 * std::exp(-(x - c) * (x - c) / (w * w)) * x); });
}
}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("fractional derivative acts as |xi|^s on plane waves") {
    auto g = Grid::make(256, 20.0);
    for (int k : {-7, 0, 3, 40}) {
      const Field e = plane_wave(g, k);
      const double xi = std::abs(2 * kPi * k / g->length());
      for (double s : {0.5, 1.0, 2.0}) {
        const Field d = frac_d(e, s);
        CHECK((d.v - std::pow(xi, s) * e.v).cwiseAbs().maxCoeff() < 1e-10 * (1 + std::pow(xi, s)));
      }
    }
  }

  TEST_CASE("Parseval and the real inner product") {
    auto g = Grid::make(512, 30.0);
    const Field f = bump(g), h = bump(g, 1.0, 2.0);
    double direct = 0;
    for (int j = 0; j < g->n(); ++j) direct += std::norm(f.v[j]);
    CHECK(norm_l2(f) * norm_l2(f) == doctest::Approx(direct * g->dx()).epsilon(1e-13));
    CHECK(inner_r(f, h) == doctest::Approx(inner_r(h, f)).epsilon(1e-14));
    CHECK(inner_r(cplx(0, 1) * f, f) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(sobolev_norm(f, 0.0, false) == doctest::Approx(norm_l2(f)).epsilon(1e-13));
  }

  TEST_CASE("derivative of a Gaussian is spectrally accurate") {
    auto g = Grid::make(512, 40.0);
    const Field f = Field::from_function(g, [](double x) { return std::exp(-x * x); });
    const Field d = derivative(f);
    const Field exact = Field::from_function(g, [](double x) { return -2 * x * std::exp(-x * x); });
    CHECK(max_abs(d - exact) < 1e-12);
  }

  TEST_CASE("the 2/3 rule removes exactly the top third of the band") {
    auto g = Grid::make(128, 10.0);
    CHECK(max_abs(dealias(plane_wave(g, 43))) < 1e-13);
    CHECK(max_abs(dealias(plane_wave(g, -50))) < 1e-13);
    const Field edge = plane_wave(g, 42);
    CHECK(max_abs(dealias(edge) - edge) < 1e-13);
  }

  TEST_CASE("windowed scaling generator is antisymmetric and equals y f' + f/2 near the origin") {
    auto g = Grid::make(1024, 64.0);
    const Field f = bump(g, 0.5), h = bump(g, -1.0, 2.0);
    CHECK(std::abs(inner_r(scaling_generator(f), h) + inner_r(f, scaling_generator(h))) < 1e-12);
    CHECK(std::abs(inner_r(scaling_generator(f), f)) < 1e-12);
    CHECK(max_abs(scaling_generator(f) - scaling_generator_plain(f)) < 1e-9);
  }

  TEST_CASE("conserved quantities of a plane wave") {
    auto g = Grid::make(128, 2 * kPi);
    const Field e = plane_wave(g, 3);  // xi = 3
    const ConservedQuantities q = conserved_quantities(e);
    CHECK(q.mass == doctest::Approx(2 * kPi).epsilon(1e-12));
    CHECK(std::abs(q.momentum) == doctest::Approx(3 * 2 * kPi).epsilon(1e-12));
    // E = 1/2 int |D^1/2 u|^2 - 1/4 int |u|^4
    CHECK(q.energy == doctest::Approx(0.5 * 3 * 2 * kPi - 0.25 * 2 * kPi).epsilon(1e-12));
  }

  TEST_CASE("render and renormalize are inverse; translation by a cell is a shift") {
    auto gy = Grid::make(1024, 64.0);
    auto gx = Grid::make(1024, 16.0);
    const Field f = bump(gy, 0.3, 2.0);
    const Field u = render(f, gx, 0.25, 0.4, 0.9);
    const Field back = renormalize(u, gy, 0.25, 0.4, 0.9);
    CHECK(max_abs(back - f) < 1e-10);
    const Field t = translate(f, gy->dx());
    for (int j : {100, 512, 700}) CHECK(std::abs(t.v[j] - f.v[j - 1]) < 1e-12);
    // L2-critical scaling preserves the norm
    CHECK(norm_l2(u) == doctest::Approx(norm_l2(f)).epsilon(1e-10));
  }

  TEST_CASE("sample_interpolant reproduces nodes") {
    auto g = Grid::make(256, 12.0);
    const Field f = bump(g);
    const cvec s = sample_interpolant(f, g->nodes()[10], g->dx(), 50);
    for (int j = 0; j < 50; ++j) CHECK(std::abs(s[j] - f.v[10 + j]) < 1e-12);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(Grid::make(100, 1.0), Error);
    auto g = Grid::make(64, 4.0), h = Grid::make(64, 5.0);
    CHECK_THROWS_AS(inner_r(Field(g), Field(h)), Error);
    try {
      apply_multiplier(Field(g), [](double xi) { return 1.0 / xi; });
      FAIL("expected MultiplierDomain");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MultiplierDomain);
    }
  }
}
