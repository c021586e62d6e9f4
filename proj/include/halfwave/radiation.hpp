//==============================================================================
// radiation.hpp
// Degenerate radiation profile
//   z*^(xi) = f^(xi) (d_1 xi + ... + d_N xi^N),   sum |d_j|^2 = 1,
// with the coefficients chosen so that the flow z of  i z_t = D z - |z|^2 z
// from z* satisfies, at (t, x) = (0, 0),
//   d_x^k1 d_t^k2 z = 0    (k1 + k2 <= m)
//   d_x^k3 d_t^k4 D z = 0  (k3 + k4 <= m - 1).
// Time derivatives come from the equation:
//   z^(k+1) = -i (D z^(k) - d_t^k (|z|^2 z)),  Leibniz on the cubic term.
//==============================================================================
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "halfwave/evolution.hpp"
#include "halfwave/field_io.hpp"
#include "halfwave/spectral.hpp"

namespace hw {

struct RadiationSpec {
  Field base_f;            // a exp(-(x - c)^2 / (2 w^2))
  double amplitude = 0, width = 1, center = 0;
  int m = 0;
  int n_coeffs = 0;
  std::vector<cplx> coeffs;
  double residual = 0;     // max |degeneracy functional|
  int restarts_tried = 0, roots_found = 0;
};

// Gaussian bump scaled so that ||f||_{H^{m+2}} = fraction * q_l2. The default
// center is off the origin: a centered bump makes odd coefficient vectors
// trivial roots (z stays odd, z(t,0) = 0 identically).
Field base_bump(const GridPtr& grid, int m, double q_l2, double width = 1.0, double fraction = 0.05,
                double center = 0.25);
Field gaussian(const GridPtr& grid, double amplitude, double width, double center);

// Realization is band-limited to the 2/3 band of the evolver so the
// functional and the flow see the same field.
Field realize(const Field& base_f, const std::vector<cplx>& coeffs);
Field realize(const RadiationSpec& spec);

int degeneracy_condition_count(int m);  // complex conditions
std::vector<std::string> degeneracy_labels(int m);
std::vector<cplx> degeneracy_functional(const Field& base_f, int m, const std::vector<cplx>& coeffs);
std::vector<cplx> degeneracy_functional(const RadiationSpec& spec);

// d_t^k z(0) for k = 0..order via the recursion (dealiased products).
std::vector<Field> time_derivatives(const Field& z, int order);

// z*(0) = (1/2pi) int f^(xi) sum d_j xi^j dxi by adaptive quadrature of the
// exact Gaussian transform (independent of the grid).
cplx origin_value_quadrature(const RadiationSpec& spec);

struct RadiationOptions {
  int restarts = 16;
  uint64_t seed = 1;
  double tol = 1e-12;
  int max_iter = 60;
  double q_l2 = 0;          // ||Q||_{L^2}, bounds the radiation mass
  double width = 1.0;
  double center = 0.25;
  double h_fraction = 0.05;
};

// Gauss-Newton (minimum norm, sphere constraint appended) from random unit
// starts; keeps the smallest-residual root after phase normalization.
RadiationSpec solve_coefficients(const GridPtr& grid, int m, int n_coeffs, const RadiationOptions& opt);
// base_f must be gaussian(grid, a, opt.width, opt.center) for some a.
RadiationSpec solve_coefficients(const Field& base_f, int m, int n_coeffs, const RadiationOptions& opt);

// Rotates so that the first coefficient with |d_j| > 1e-8 is real positive.
std::vector<cplx> phase_normalize(const std::vector<cplx>& d);

//------------------------------------------------------------------------------
// Degeneracy of the evolved flow
//------------------------------------------------------------------------------
struct DegeneracyReport {
  int m = 0;
  std::vector<double> t, z0, grad0, dz0;   // |z(t,0)|, |d_x z(t,0)|, |D z(t,0)|
  double slope_z = 0, slope_grad = 0, slope_dz = 0;
  std::vector<double> norm_t, h_half, h_top;  // ||z(t)||_{H^{1/2}}, ||z(t)||_{H^{m+1}}
  double h_half_min_ratio = 0, h_half_max_ratio = 0, h_top_max_ratio = 0;
  bool slopes_ok = false, bounds_ok = false, ok = false;
};

// Samples at +-|t| for |t| geometric in [t_min, t_max]; norms on a uniform
// grid of |t| <= t_norm.
DegeneracyReport verify_degeneracy_in_time(const RadiationSpec& spec, const EvolverConfig& cfg,
                                           double t_min = 1e-3, double t_max = 1e-1,
                                           int n_samples = 9, double t_norm = 0.5);

json radiation_to_json(const RadiationSpec& spec);
RadiationSpec radiation_from_json(const json& j, const GridPtr& grid);
json degeneracy_report_to_json(const DegeneracyReport& r);
void save_radiation(const std::string& dir, const RadiationSpec& spec);
RadiationSpec load_radiation(const std::string& dir);

}  // namespace hw
