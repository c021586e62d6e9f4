//==============================================================================
// tracking.cpp
//==============================================================================
#include "halfwave/tracking.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "halfwave/errors.hpp"

namespace hw {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// least-squares slope of log y against log x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, ++n;
  }
  if (n < 2) return std::nan("");
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-300) return std::nan("");
  return (n * sxy - sx * sy) / den;
}

void append_log(EvolutionLog& dst, const EvolutionLog& src, double t_offset) {
  const size_t start = dst.times.empty() ? 0 : 1;  // skip the duplicated segment start
  for (size_t k = start; k < src.times.size(); ++k) {
    dst.times.push_back(src.times[k] + t_offset);
    dst.mass.push_back(src.mass[k]);
    dst.energy.push_back(src.energy[k]);
    dst.momentum.push_back(src.momentum[k]);
    dst.h_half.push_back(src.h_half[k]);
    dst.h_half_delta.push_back(src.h_half_delta[k]);
  }
  if (src.aborted) {
    dst.aborted = true;
    dst.abort_reason = src.abort_reason;
  }
}

json state_json(const ModState& s) {
  return {{"lambda", s.lambda}, {"xbar", s.xbar}, {"gamma", s.gamma}, {"b", s.b}, {"nu", s.nu}, {"eta", s.eta}};
}

}  // namespace

GridPtr tracking_grid(const ProfileSet& ps, double lambda0) {
  if (!(lambda0 > 0)) throw Error(ErrorKind::InvalidArgument, "lambda0 must be positive", lambda0);
  return Grid::make(ps.grid->n(), lambda0 * ps.grid->length());
}

//------------------------------------------------------------------------------
// track_blowup_window
//------------------------------------------------------------------------------
TrackingReport track_blowup_window(const TrackingConfig& cfg, const ProfileSet& ps,
                                   const RadiationSpec& radiation) {
  const auto wall0 = std::chrono::steady_clock::now();
  if (!(cfg.t1 < 0)) throw Error(ErrorKind::InvalidArgument, "tracking window needs t1 < 0", cfg.t1);
  if (cfg.n_samples < 3) throw Error(ErrorKind::InvalidArgument, "need at least 3 samples", cfg.n_samples);
  const GridPtr xg = tracking_grid(ps, cfg.lambda0);
  const Field zstar = realize(radiation);
  if (!zstar.grid->compatible(*xg))
    throw Error(ErrorKind::GridMismatch, "radiation must live on the tracking grid (length lambda0 * L_y)",
                zstar.grid->length());

  const ModConstants c{ps.c1, ps.c2, ps.c3, ps.c4};
  const auto& ip = ps.inner_products;
  TrackingReport rep;
  rep.eta = cfg.eta;

  // invariants of the target solution
  const ConservedQuantities qz = conserved_quantities(zstar);
  rep.e_z = qz.energy;
  rep.p_z = qz.momentum;
  rep.e0 = rep.e_z + ip.at("(L-S1,S1)") * cfg.eta / cfg.lambda0;
  rep.p0 = rep.p_z + 2.0 * ip.at("(L-G1,G1)") * cfg.d0;
  const C0D0 cd = compute_c0_d0(rep.e0, rep.p0, rep.e_z, rep.p_z, ip);
  rep.c0 = cd.c0;
  rep.d0 = cd.d0;
  rep.initial = initial_state(cd.c0, cd.d0, cfg.eta, c, cfg.t_ref);

  Field u = render_profile(ps, rep.initial, xg) + zstar;
  const ConservedQuantities qu = conserved_quantities(u);
  rep.e_u0 = qu.energy;
  rep.p_u0 = qu.momentum;

  // main samples, plus a +-h pair around each interior one for the modulation vector
  std::vector<double> main_t(cfg.n_samples);
  for (int k = 0; k < cfg.n_samples; ++k) main_t[k] = cfg.t1 * k / (cfg.n_samples - 1);
  std::vector<double> all_t = main_t;
  const std::vector<ModState> pred_main = states_at(rep.initial, c, main_t);
  std::vector<double> h_of(cfg.n_samples, 0.0);
  for (int k = 1; k + 1 < cfg.n_samples; ++k) {
    h_of[k] = std::min(0.02 * pred_main[k].lambda, 0.25 * std::abs(main_t[1]));
    all_t.push_back(main_t[k] + h_of[k]);
    all_t.push_back(main_t[k] - h_of[k]);
  }
  std::sort(all_t.begin(), all_t.end(), [](double a, double b) { return a > b; });
  const std::vector<ModState> pred_all = states_at(rep.initial, c, all_t);

  DecompOptions dopt;
  dopt.delta = cfg.delta;
  EvolverConfig ecfg = cfg.evolver;
  Field z = zstar;
  std::vector<TrackingSample> all;
  ModState guess = rep.initial;
  double t_cur = 0;

  try {
    for (size_t k = 0; k < all_t.size(); ++k) {
      const double t = all_t[k];
      if (t < t_cur) {
        EvolveResult ru = evolve_backward(u, t - t_cur, ecfg);
        append_log(rep.log, ru.log, t_cur);
        u = std::move(ru.u);
        EvolverConfig zc = ecfg;
        zc.monitor_stride = 1 << 30;
        z = evolve_backward(z, t - t_cur, zc).u;
        if (k > 0) {
          // carry the previous measurement along the predicted increment
          const ModState& a = pred_all[k - 1];
          const ModState& b = pred_all[k];
          guess.lambda *= b.lambda / a.lambda;
          guess.xbar += b.xbar - a.xbar;
          guess.gamma += b.gamma - a.gamma;
          guess.b += b.b - a.b;
          guess.nu += b.nu - a.nu;
        }
        t_cur = t;
      }
      DecompResult dr = decompose(u, z, guess, ps, dopt);
      // unwrap the phase against the guess
      dr.params.gamma += kTwoPi * std::round((guess.gamma - dr.params.gamma) / kTwoPi);
      TrackingSample s;
      s.t = t;
      s.measured = dr.params;
      s.predicted = pred_all[k];
      s.ortho = dr.ortho_residuals;
      s.diag = dr.diagnostics;
      s.ja = evaluate_ja(u, dr, z, cfg.ja_a, ps);
      s.diag.ja_value = s.ja.total;
      all.push_back(s);
      guess = dr.params;
      rep.t_reached = t;
    }
  } catch (const InstabilityError& e) {
    rep.basin_lost = true;
    rep.basin_message = std::string("evolution: ") + e.what();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Basin && e.kind() != ErrorKind::Degeneracy) throw;
    rep.basin_lost = true;
    rep.basin_message = std::string("decomposition: ") + e.what();
  }

  // split main samples from stencil points
  auto find = [&](double t) -> const TrackingSample* {
    for (const auto& s : all)
      if (s.t == t) return &s;
    return nullptr;
  };
  for (int k = 0; k < cfg.n_samples; ++k)
    if (const TrackingSample* s = find(main_t[k])) rep.samples.push_back(*s);
  for (int k = 1; k + 1 < cfg.n_samples; ++k) {
    const TrackingSample *a = find(main_t[k] - h_of[k]), *m = find(main_t[k]), *b = find(main_t[k] + h_of[k]);
    if (!a || !m || !b) continue;
    rep.mod_vectors.push_back(
        mod_vector(a->measured, a->t, m->measured, m->t, b->measured, b->t, c));
    rep.mod_times.push_back(main_t[k]);
    for (double v : rep.mod_vectors.back()) rep.max_mod_vector = std::max(rep.max_mod_vector, std::abs(v));
  }

  // summary
  std::vector<double> lam, epsn, qratio, abst;
  double d_lam = 0, d_b = 0, d_nu = 0, d_x = 0, d_g = 0;
  rep.eps_bounded = !rep.samples.empty();
  for (const auto& s : rep.samples) {
    const double bound = cfg.eps_bound_factor * std::pow(s.measured.lambda, 1.5);
    rep.max_eps_ratio = std::max(rep.max_eps_ratio, s.diag.eps_h12 / bound);
    if (s.diag.eps_h12 > bound) rep.eps_bounded = false;
    d_lam = std::max(d_lam, std::abs(s.measured.lambda - s.predicted.lambda) / s.predicted.lambda);
    d_b = std::max(d_b, std::abs(s.measured.b - s.predicted.b));
    d_nu = std::max(d_nu, std::abs(s.measured.nu - s.predicted.nu));
    d_x = std::max(d_x, std::abs(s.measured.xbar - s.predicted.xbar));
    d_g = std::max(d_g, std::abs(s.measured.gamma - s.predicted.gamma));
    if (s.t < 0) {
      lam.push_back(s.measured.lambda);
      abst.push_back(-s.t);
      epsn.push_back(s.diag.eps_h12);
      qratio.push_back(s.diag.eps_l2 > 0 ? std::abs(s.diag.eps_qp_inner) / s.diag.eps_l2 : 0.0);
    }
  }
  rep.max_scaled_differences = {{"lambda_rel", d_lam}, {"b", d_b}, {"nu", d_nu}, {"xbar", d_x}, {"gamma", d_g}};
  const bool lam_spread = !lam.empty() && *std::max_element(lam.begin(), lam.end()) >
                                             1.2 * *std::min_element(lam.begin(), lam.end());
  rep.eps_exponent = lam_spread ? loglog_slope(lam, epsn) : std::nan("");
  rep.qp_extra_power = lam_spread ? loglog_slope(lam, qratio) : std::nan("");
  rep.eps_exponent_t = loglog_slope(abst, epsn);
  if (!rep.samples.empty()) {
    const auto& e = rep.samples.back();
    rep.lambda_rel_error_end = std::abs(e.measured.lambda - e.predicted.lambda) / e.predicted.lambda;
  }
  const bool reached = !rep.samples.empty() && rep.samples.back().t == cfg.t1;
  rep.ok = reached && !rep.basin_lost && rep.eps_bounded && rep.lambda_rel_error_end <= cfg.lambda_tol;
  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return rep;
}

//------------------------------------------------------------------------------
// serialization
//------------------------------------------------------------------------------
json tracking_to_json(const TrackingReport& r) {
  json samples = json::array();
  for (const auto& s : r.samples)
    samples.push_back({{"t", s.t},
                       {"measured", state_json(s.measured)},
                       {"predicted", state_json(s.predicted)},
                       {"ortho_residuals", s.ortho},
                       {"eps_l2", s.diag.eps_l2},
                       {"eps_h12", s.diag.eps_h12},
                       {"eps_sharp_h12_delta", s.diag.eps_h12_delta},
                       {"eps_qp_inner", s.diag.eps_qp_inner},
                       {"ja", {{"kinetic", s.ja.kinetic},
                               {"mass", s.ja.mass},
                               {"nonlinear", s.ja.nonlinear},
                               {"virial", s.ja.virial},
                               {"total", s.ja.total}}}});
  json mv = json::array();
  for (size_t k = 0; k < r.mod_vectors.size(); ++k) mv.push_back({{"t", r.mod_times[k]}, {"mod", r.mod_vectors[k]}});
  return {{"eta", r.eta},
          {"C0", r.c0},
          {"D0", r.d0},
          {"E0", r.e0},
          {"P0", r.p0},
          {"E_z", r.e_z},
          {"P_z", r.p_z},
          {"E_u0", r.e_u0},
          {"P_u0", r.p_u0},
          {"initial", state_json(r.initial)},
          {"samples", samples},
          {"mod_vectors", mv},
          {"max_mod_vector", r.max_mod_vector},
          {"max_mass_drift", r.log.max_mass_drift()},
          {"max_energy_drift", r.log.max_energy_drift()},
          {"basin_lost", r.basin_lost},
          {"basin_message", r.basin_message},
          {"t_reached", r.t_reached},
          {"lambda_rel_error_end", r.lambda_rel_error_end},
          {"max_eps_ratio", r.max_eps_ratio},
          {"eps_bounded", r.eps_bounded},
          {"eps_exponent", r.eps_exponent},
          {"qp_extra_power", r.qp_extra_power},
          {"eps_exponent_t", r.eps_exponent_t},
          {"max_differences", r.max_scaled_differences},
          {"runtime_seconds", r.runtime_seconds},
          {"ok", r.ok}};
}

std::string tracking_csv(const TrackingReport& r) {
  std::ostringstream os;
  os.precision(12);
  os << "t,lambda,lambda_ode,xbar,xbar_ode,gamma,gamma_ode,b,b_ode,nu,nu_ode,eps_h12,eps_sharp_h12_delta,"
        "eps_qp_inner,ja\n";
  for (const auto& s : r.samples)
    os << s.t << ',' << s.measured.lambda << ',' << s.predicted.lambda << ',' << s.measured.xbar << ','
       << s.predicted.xbar << ',' << s.measured.gamma << ',' << s.predicted.gamma << ',' << s.measured.b << ','
       << s.predicted.b << ',' << s.measured.nu << ',' << s.predicted.nu << ',' << s.diag.eps_h12 << ','
       << s.diag.eps_h12_delta << ',' << s.diag.eps_qp_inner << ',' << s.ja.total << '\n';
  return os.str();
}

}  // namespace hw
