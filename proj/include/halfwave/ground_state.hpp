//==============================================================================
// ground_state.hpp
// Positive even solution of  D Q + Q - Q^3 = 0  on a periodic grid.
//   solve_petviashvili          stabilized fixed point (exponent 3/2),
//                               even-symmetrized every sweep
//   solve_gradient_flow_oracle  independent check: preconditioned descent of
//                               <(D+1)u,u> on the L^4 unit sphere
//==============================================================================
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "halfwave/spectral.hpp"

namespace hw {

struct GroundState {
  Field q;                     // real-valued, stored complex
  double residual_l2 = 0;      // || DQ + Q - Q^3 ||_{L^2}
  int iterations = 0;
  double decay_coefficient = 0;  // tail constant c in Q ~ c / y^2 (periodized fit)
  double decay_variation = 0;    // relative spread of the periodized fit
  double decay_variation_raw = 0;  // relative spread of y^2 Q itself
  std::string method;

  double mass() const { return inner_r(q, q); }
  double relative_residual() const { return residual_l2 / norm_l2(q); }
};

double ground_state_residual(const Field& q);

struct DecayFit {
  double coefficient = 0;
  double variation = 0;
  double raw_variation = 0;
};
// Fits Q(y) * (L/pi)^2 sin^2(pi y / L) on 0.25 L <= |y| <= 0.4 L, which is the
// torus version of y^2 Q(y) (sum of the 1/y^2 tails of all periodic images).
DecayFit decay_fit(const Field& q);

GroundState solve_petviashvili(const GridPtr& grid, double tol = 1e-12, int max_iter = 5000);
GroundState solve_gradient_flow_oracle(const GridPtr& grid, double tol = 1e-12, int max_iter = 50000);

// Center of mass int x |f|^2 / int |f|^2 and an L^2 comparison after
// translating b onto a's center.
double center_of_mass(const Field& f);
double aligned_relative_difference(const Field& a, const Field& b);

struct GnReport {
  int trials = 0;
  double j_q = 0;               // J(Q) = ||Q||_4^4 / (||Q||_{H1/2dot}^2 ||Q||^2)
  double max_ratio = 0;         // max over trials of J(u)/J(Q)
  double min_energy_margin = 0;  // min over trials of E(u) - lower bound, normalized
  int gn_violations = 0;
  int energy_violations = 0;
  double energy_q = 0;          // E(Q) / ||Q||_{H1/2dot}^2
  double energy_half_q = 0;     // E(Q/2)
  bool ok = false;
};
// J(u) = ||u||_4^4 / (||u||^2_{H^{1/2}dot} ||u||^2)
double gn_functional(const Field& u);
GnReport gn_sharpness_check(const GroundState& gs, int trials, uint64_t seed = 20240601);

}  // namespace hw
