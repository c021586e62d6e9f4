//==============================================================================
// tracking.hpp
// Backward tracking of one member u_eta of the blow-up family:
//   u_eta(0) = lambda0^{-1/2} Q_P(b0, nu0, eta)((x - xbar0)/lambda0) e^{i gamma0} + z*
// evolved to t1 < 0, decomposed at sample times and compared with the
// modulation-law trajectory from the same initial parameters.
// The x-grid has length lambda0 * L_y and the same point count as the profile
// grid, so at t = 0 rendering is pointwise exact.
//==============================================================================
#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "halfwave/decomposition.hpp"
#include "halfwave/evolution.hpp"
#include "halfwave/modulation.hpp"
#include "halfwave/profiles.hpp"
#include "halfwave/radiation.hpp"

namespace hw {

struct TrackingConfig {
  double eta = 1e-3;
  double lambda0 = 0.1;   // fixes E0 - Ez = (L-S1,S1) eta / lambda0
  double d0 = 0.05;       // fixes P0 - Pz = 2 (L-G1,G1) D0
  double t1 = -0.5;
  double t_ref = -0.5;    // reference time of the phase integral
  int n_samples = 21;
  EvolverConfig evolver = [] {
    EvolverConfig c;
    c.scheme = Scheme::Yoshida4;
    c.dt = 2e-4;
    c.monitor_stride = 50;
    return c;
  }();
  double eps_bound_factor = 0.1;  // ||eps||_{H^{1/2}} <= factor * lambda^{3/2}
  double lambda_tol = 0.05;
  double ja_a = 2.0;
  double omega = 1.0 / 8.0;
  double delta = 1.0 / 16.0;
};

GridPtr tracking_grid(const ProfileSet& ps, double lambda0);

struct TrackingSample {
  double t = 0;
  ModState measured, predicted;
  std::array<double, 5> ortho{};
  DecompDiagnostics diag;
  JaTerms ja;
};

struct TrackingReport {
  double eta = 0, c0 = 0, d0 = 0, e0 = 0, p0 = 0, e_z = 0, p_z = 0;
  double e_u0 = 0, p_u0 = 0;           // measured on the rendered initial data
  ModState initial;
  std::vector<TrackingSample> samples;  // t from 0 down to t1
  std::vector<std::array<double, 5>> mod_vectors;  // at interior samples, stencil t +- h
  std::vector<double> mod_times;
  double max_mod_vector = 0;
  EvolutionLog log;
  bool basin_lost = false;
  std::string basin_message;
  double t_reached = 0;
  double lambda_rel_error_end = 0;
  double max_eps_ratio = 0;             // max ||eps||_{H^{1/2}} / (factor lambda^{3/2})
  bool eps_bounded = false;
  // fitted exponents (log-log) next to the targets; the lambda fits are NaN
  // when lambda varies by less than 20% over the window
  double eps_exponent = 0;              // ||eps||_{H^{1/2}} ~ lambda^k, target 3/2 + 2 omega
  double qp_extra_power = 0;            // |(eps,Q_P)| / ||eps||_{L2} ~ lambda^k, target 1/2
  double eps_exponent_t = 0;            // ||eps||_{H^{1/2}} ~ |t|^k
  std::map<std::string, double> max_scaled_differences;  // |lambda - lambda_eta| / lambda^{2+omega}, ...
  double runtime_seconds = 0;
  bool ok = false;
};

// radiation must live on tracking_grid(ps, cfg.lambda0). The kernel table is
// taken from ps.inner_products.
TrackingReport track_blowup_window(const TrackingConfig& cfg, const ProfileSet& ps,
                                   const RadiationSpec& radiation);

json tracking_to_json(const TrackingReport& r);
std::string tracking_csv(const TrackingReport& r);

}  // namespace hw
