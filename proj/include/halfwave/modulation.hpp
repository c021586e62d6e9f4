//==============================================================================
// modulation.hpp
// Formal modulation law in physical time t (d/ds = lambda d/dt):
//   lambda_t = -b
//   xbar_t   = nu + c2 b^2 nu
//   gamma_t  = 1 / lambda
//   b_t      = -[(1/2 + c3 eta) b^2 + eta + c1 b^4 + c4 nu^2] / lambda
//   nu_t     = -b nu / lambda
// The simplified system drops c1, c2, c3.
//==============================================================================
#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

namespace hw {

struct ModConstants {
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0;
};

struct ModState {
  double lambda = 1, xbar = 0, gamma = 0, b = 0, nu = 0, eta = 0;
};

struct ModOptions {
  double rtol = 1e-11;
  double atol = 1e-14;
  bool simplified = false;
  int n_output = 401;           // uniformly spaced samples on [t_final, 0] (plus accepted steps)
  double lambda_floor = 1e-10;  // below this the trajectory stops with blowup_reached
};

struct ModTrajectory {
  std::vector<double> t;          // strictly increasing
  std::vector<ModState> states;
  std::vector<double> invariant;  // I_eta(t)
  std::vector<double> invariant_source;  // int_0^t dI/dt' dt' integrated alongside
  std::vector<double> nu_over_lambda;
  bool blowup_reached = false;
  double blowup_time = 0, blowup_lambda = 0, blowup_b = 0;
};

struct C0D0 {
  double c0 = 0, d0 = 0;
};

// C0 = sqrt(1/2 (L-S1,S1) / (E0 - Ez)),  D0 = (P0 - Pz) / (2 (L-G1,G1))
C0D0 compute_c0_d0(double e0, double p0, double e_z, double p_z,
                   const std::map<std::string, double>& ip);

double almost_invariant(const ModState& s, const ModConstants& c);

// lambda = 2 C0^2 eta, b = 0, nu = D0 lambda, xbar = 0, gamma from the
// reference-phase integral with reference time t0.
ModState initial_state(double c0, double d0, double eta, const ModConstants& c, double t0 = -0.5,
                       const ModOptions& opt = {});

ModTrajectory integrate(const ModState& s0, const ModConstants& c, double t_final,
                        const ModOptions& opt = {});

// State at the requested times (any order), integrating from t = 0.
std::vector<ModState> states_at(const ModState& s0, const ModConstants& c,
                                const std::vector<double>& times, const ModOptions& opt = {});

// Fixed-step Dormand-Prince error against a fine reference; returns the
// observed orders between successive halvings.
std::vector<double> step_halving_orders(const ModState& s0, const ModConstants& c, double t_final,
                                        int n0 = 4, int levels = 3);

//------------------------------------------------------------------------------
// Simplified system: closed form and validation
//------------------------------------------------------------------------------
struct ClosedFormValue {
  double lambda = 0, b = 0;
};
double closed_form_lambda0(double ell, double eta0, double nu0, double c4);
ClosedFormValue closed_form_simplified(double ell, double eta0, double nu0, double c4, double t);

struct ClosedFormValidation {
  double max_error = 0;     // max relative error of (lambda, b) vs the closed form
  double ell_drift = 0;     // max relative drift of (b^2 + 2 eta - 2 c4 nu^2)/lambda
  double min_lambda = 0, lambda_at_zero = 0;
};
ClosedFormValidation validate_against_closed_form(double c4, double ell, double eta0, double nu0,
                                                  double t_start, const ModOptions& opt = {});

//------------------------------------------------------------------------------
// Trajectory diagnostics
//------------------------------------------------------------------------------
struct ModDiagnostics {
  double nu_over_lambda_drift = 0;    // relative
  double invariant_law_residual = 0;  // |I(t) - I(0) - source(t)| / |I(0)|
  double invariant_drift_rate = 0;    // max |I(t) - I(0)| / |t|
  double min_b = 0;
  double ratio_constant = 0;          // C with (b^2 + eta)/lambda in [1/C, C]
  double min_lambda = 0, t_min_lambda = 0;
  // lambda - 2 C0^2 eta - t^2/(4 C0^2) = a t^2 + q t^4 + h t^6 on [-0.1, 0]
  double quad_correction = 0;         // a * 4 C0^2 (the o(1) term, relative)
  double quartic_coefficient = 0;
  double quartic_fit_residual = 0;    // max residual / max lambda
};
ModDiagnostics diagnose(const ModTrajectory& tr, const ModConstants& c, double c0, double d0);

std::string trajectory_csv(const ModTrajectory& tr);

}  // namespace hw
