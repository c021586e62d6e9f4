//==============================================================================
// acceptance.cpp
// Runs the thirteen acceptance criteria at production resolution (N = 2^13,
// L = 256) and prints one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
//==============================================================================
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "halfwave/decomposition.hpp"
#include "halfwave/errors.hpp"
#include "halfwave/evolution.hpp"
#include "halfwave/ground_state.hpp"
#include "halfwave/linearized.hpp"
#include "halfwave/modulation.hpp"
#include "halfwave/profiles.hpp"
#include "halfwave/radiation.hpp"
#include "halfwave/tracking.hpp"

using namespace hw;

namespace {

constexpr int kN = 8192;
constexpr double kL = 256.0;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

//------------------------------------------------------------------------------
// Result lines
//------------------------------------------------------------------------------
struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;
  void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4)));
  void info(const char* fmt, ...) __attribute__((format(printf, 2, 3)));
};

void Outcome::check(bool ok, const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  notes.push_back(std::string(ok ? "    ok   " : "    FAIL ") + buf);
  pass = pass && ok;
}

void Outcome::info(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  notes.push_back(std::string("    info ") + buf);
}

//------------------------------------------------------------------------------
// Shared state, built lazily in criterion order
//------------------------------------------------------------------------------
struct World {
  GridPtr grid = Grid::make(kN, kL);
  std::optional<GroundState> gs;
  double gs_seconds = 0;
  OperatorPtr op;
  std::optional<KernelElements> ke;
  std::optional<ProfileSet> ps;
  double profile_seconds = 0;
  std::optional<RadiationSpec> rad1;

  const GroundState& ground_state() {
    if (!gs) {
      const auto t0 = Clock::now();
      gs = solve_petviashvili(grid);
      gs_seconds = since(t0);
    }
    return *gs;
  }
  const LinearizedOperator& oper() {
    if (!op) {
      LinearizedOptions o;
      o.store_dense = false;
      op = LinearizedOperator::build(ground_state(), o);
    }
    return *op;
  }
  const KernelElements& kernel() {
    if (!ke) ke = kernel_elements(oper());
    return *ke;
  }
  const ProfileSet& profiles() {
    if (!ps) {
      oper();
      const auto t0 = Clock::now();
      ps = build_profiles(*op);
      profile_seconds = since(t0);
    }
    return *ps;
  }
  ModConstants constants() {
    const auto& p = profiles();
    return {p.c1, p.c2, p.c3, p.c4};
  }
};

Field packet(const GridPtr& g, double a = 0.9) {
  return Field::from_function(g, [a](double x) { return a * std::exp(-x * x / 2) * std::polar(1.0, 0.3 * x); });
}

//------------------------------------------------------------------------------
// 1. ground state
//------------------------------------------------------------------------------
Outcome ground_state(World& w) {
  Outcome o;
  const GroundState& gs = w.ground_state();
  const double rr = gs.relative_residual();
  o.check(rr <= 1e-10, "residual ||DQ+Q-Q^3||/||Q|| = %.3e (<= 1e-10)", rr);
  const double e = conserved_quantities(gs.q).energy;
  const double h2 = std::pow(sobolev_norm(gs.q, 0.5, true), 2);
  o.check(std::abs(e) <= 1e-6 * h2, "|E(Q)| / ||Q||^2_{H1/2 dot} = %.3e (<= 1e-6)", std::abs(e) / h2);
  const GroundState oracle = solve_gradient_flow_oracle(w.grid);
  const double d = aligned_relative_difference(gs.q, oracle.q);
  o.check(d <= 1e-7, "Petviashvili vs gradient flow = %.3e (<= 1e-7)", d);
  o.check(w.gs_seconds <= 60, "Petviashvili runtime %.2f s (<= 60 s)", w.gs_seconds);
  return o;
}

//------------------------------------------------------------------------------
// 2. kernel relations
//------------------------------------------------------------------------------
Outcome kernel_relations(World& w) {
  Outcome o;
  const KernelElements& k = w.kernel();
  for (const auto& [name, v] : k.relation_residuals) o.check(v <= 1e-7, "%s: %.3e (<= 1e-7)", name.c_str(), v);
  const double ls = k.inner_products.at("(LambdaQ,S1)"), gg = k.inner_products.at("(gradQ,G1)");
  o.check(ls > 0, "(LambdaQ,S1) = %.6f > 0", ls);
  o.check(gg > 0, "(gradQ,G1) = %.6f > 0", gg);
  return o;
}

//------------------------------------------------------------------------------
// 3. key identity
//------------------------------------------------------------------------------
Outcome key_identity(World& w) {
  Outcome o;
  const double v = w.profiles().identity_residuals.at("key identity |S1|^2 - 2(Q,R200)");
  o.check(v <= 1e-6, "| ||S1||^2 - 2(Q,R200) | / ||S1||^2 = %.3e (<= 1e-6)", v);
  return o;
}

//------------------------------------------------------------------------------
// 4. constants
//------------------------------------------------------------------------------
Outcome constants(World& w) {
  Outcome o;
  const ProfileSet& ps = w.profiles();
  const auto& id = ps.identity_residuals;
  o.info("c1..c4 = %.6f %.6f %.6f %.6f", ps.c1, ps.c2, ps.c3, ps.c4);
  o.check(ps.c4 < 0, "c4 = %.8f < 0", ps.c4);
  const double agree = id.at("c4 formula vs closed form");
  o.check(agree <= 1e-6, "c4 formulas agree: %.3e (<= 1e-6), closed form %.8f", agree, id.at("c4 closed form"));
  for (const char* k : {"consistency R102", "consistency R111"})
    o.check(id.at(k) <= 1e-5, "%s = %.3e (<= 1e-5)", k, id.at(k));
  return o;
}

//------------------------------------------------------------------------------
// 5. profile error scaling
//------------------------------------------------------------------------------
Outcome profile_scaling(World& w) {
  Outcome o;
  w.profiles();
  const auto t0 = Clock::now();
  const SlopeReport r = profile_error_scaling(w.profiles(), w.oper());
  const double secs = w.profile_seconds + since(t0);
  for (size_t k = 0; k < r.s.size(); ++k) o.info("s = %.2f  ||Psi_P|| = %.4e", r.s[k], r.l2[k]);
  o.check(r.slope >= 5.5 && r.slope <= 6.5, "log-log slope %.4f in [5.5, 6.5]", r.slope);
  o.check(secs <= 300, "profile build + scaling %.1f s (<= 300 s)", secs);
  return o;
}

//------------------------------------------------------------------------------
// 6. mass derivative along eta
//------------------------------------------------------------------------------
Outcome mass_derivative(World& w) {
  Outcome o;
  const FitReport r = mass_derivative_check(w.profiles());
  const double ls = w.kernel().inner_products.at("(LambdaQ,S1)");
  o.check(r.rel_error <= 0.01, "d/deta ||Q_P||^2 = %.6f vs 2(Q,rho1) = %.6f, rel %.3e (<= 1e-2)", r.fitted,
          r.predicted, r.rel_error);
  const double alt = std::abs(r.fitted + 2 * ls) / (2 * ls);
  o.check(alt <= 0.01, "vs -2(LambdaQ,S1) = %.6f, rel %.3e (<= 1e-2)", -2 * ls, alt);
  o.check(r.fitted < 0, "derivative negative");
  return o;
}

//------------------------------------------------------------------------------
// 7. energy and momentum expansions
//------------------------------------------------------------------------------
Outcome expansions(World& w) {
  Outcome o;
  const FitReport e = energy_expansion_check(w.profiles());
  const FitReport p = momentum_expansion_check(w.profiles());
  o.check(e.rel_error <= 0.02, "energy coefficient %.6f vs 1/2 (L-S1,S1) = %.6f, rel %.3e (<= 2e-2)", e.fitted,
          e.predicted, e.rel_error);
  o.check(p.rel_error <= 0.02, "momentum coefficient %.6f vs 2 (L-G1,G1) = %.6f, rel %.3e (<= 2e-2)", p.fitted,
          p.predicted, p.rel_error);
  return o;
}

//------------------------------------------------------------------------------
// 8. modulation ODE
//------------------------------------------------------------------------------
Outcome modulation(World& w) {
  Outcome o;
  const ModConstants c = w.constants();
  double drift = 0, law = 0, quartic = 0, min_b = 1e300;
  int runs = 0;
  for (double eta : {1e-2, 3e-3, 1e-3}) {
    double quad = 0;
    for (double lambda0 : {0.05, 0.1})
      for (double d0 : {0.0, 0.05}) {
        const double c0 = std::sqrt(lambda0 / (2 * eta));
        const ModTrajectory tr = integrate(initial_state(c0, d0, eta, c), c, -0.5);
        const ModDiagnostics d = diagnose(tr, c, c0, d0);
        drift = std::max(drift, d.nu_over_lambda_drift);
        law = std::max(law, d.invariant_law_residual);
        quartic = std::max(quartic, d.quartic_fit_residual);
        quad = std::max(quad, std::abs(d.quad_correction));
        min_b = std::min(min_b, d.min_b);
        ++runs;
      }
    o.info("eta = %.0e: largest relative t^2 correction %.3e (free per eta)", eta, quad);
  }
  o.info("%d trajectories on [-0.5, 0]", runs);
  o.check(drift <= 1e-8, "max nu/lambda drift %.3e (<= 1e-8)", drift);
  double cf = 0;
  for (double ell : {1.0, 2.0})
    for (double nu0 : {0.0, 2e-4, 1e-3}) cf = std::max(cf, validate_against_closed_form(c.c4, ell, 1e-3, nu0, -0.3).max_error);
  o.check(cf <= 1e-8, "simplified system vs closed form: max rel error %.3e (<= 1e-8)", cf);
  o.check(quartic <= 1e-6,
          "lambda - 2 C0^2 eta - t^2/(4 C0^2) = a t^2 + O(t^4) on [-0.1, 0]: max fit residual / max lambda %.3e "
          "(<= 1e-6)",
          quartic);
  o.check(min_b >= 0, "min b(t) over t <= 0: %.3e (>= 0)", min_b);
  o.info("invariant law residual %.3e", law);
  return o;
}

//------------------------------------------------------------------------------
// 9. coercivity
//------------------------------------------------------------------------------
Outcome coercivity(World& w) {
  Outcome o;
  const auto& op = w.oper();
  const auto& k = w.kernel();
  const SpectrumResult proj = coercivity_spectrum(op, {op.q(), k.s1, k.g1, cplx(0, 1) * k.rho1});
  const SpectrumResult free = coercivity_spectrum(op, {});
  o.check(proj.min_eigenvalue > 0, "projected on {Q, S1, G1, i rho1}: %.6f > 0 (Ritz residual %.1e)",
          proj.min_eigenvalue, proj.ritz_residual);
  o.check(free.min_eigenvalue < 0, "unprojected: %.6f < 0 (Ritz residual %.1e)", free.min_eigenvalue,
          free.ritz_residual);
  return o;
}

//------------------------------------------------------------------------------
// 10. evolution
//------------------------------------------------------------------------------
Outcome evolution(World& w) {
  Outcome o;
  const Field u0 = packet(w.grid);
  EvolverConfig c;
  c.monitor_stride = 1;
  const EvolveResult r = evolve(u0, 1.0, c);
  o.check(r.log.max_mass_drift() <= 1e-10, "mass drift %.3e (<= 1e-10)", r.log.max_mass_drift());
  o.check(r.log.max_energy_drift() <= 1e-8, "energy drift %.3e (<= 1e-8)", r.log.max_energy_drift());
  o.info("momentum drift %.3e", r.log.max_momentum_drift());

  // Richardson: differences of successive halvings
  const double T = 0.5;
  EvolverConfig s;
  std::vector<Field> u;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    s.dt = dt;
    u.push_back(evolve(u0, T, s).u);
  }
  const double order = std::log2(norm_l2(u[0] - u[1]) / norm_l2(u[1] - u[2]));
  o.check(std::abs(order - 2.0) <= 0.1, "Strang order %.4f (2 +- 0.1)", order);

  const Field f = evolve(u0, 0.5, c).u;
  const Field b = evolve_backward(f, -0.5, c).u;
  const double rt = norm_l2(b - u0) / norm_l2(u0);
  o.check(rt <= 1e-9, "backward-forward round trip %.3e (<= 1e-9)", rt);
  return o;
}

//------------------------------------------------------------------------------
// 11. radiation
//------------------------------------------------------------------------------
Outcome radiation(World& w) {
  Outcome o;
  const GridPtr xg = tracking_grid(w.profiles(), 0.1);
  RadiationOptions ro;
  ro.q_l2 = norm_l2(w.profiles().q);
  EvolverConfig ec;
  ec.scheme = Scheme::Yoshida4;
  for (auto [m, n] : {std::pair{0, 2}, std::pair{1, 5}}) {
    const RadiationSpec r = solve_coefficients(xg, m, n, ro);
    o.check(r.residual <= 1e-9, "m = %d, %d coefficients: functional residual %.3e (<= 1e-9), %d/%d restarts converged",
            m, n, r.residual, r.roots_found, r.restarts_tried);
    const DegeneracyReport d = verify_degeneracy_in_time(r, ec);
    o.check(d.slope_z >= m + 0.7, "m = %d: slope of |z(t,0)| %.3f (>= %.1f)", m, d.slope_z, m + 0.7);
    if (m >= 1) o.check(d.slope_grad >= m - 1 + 0.7, "m = %d: slope of |d_x z(t,0)| %.3f (>= %.1f)", m, d.slope_grad, m - 0.3);
    o.info("m = %d: slope of |D z(t,0)| %.3f", m, d.slope_dz);
    o.check(d.bounds_ok, "m = %d: H^{1/2} two-sided bound over |t| <= 0.5, ratios [%.4f, %.4f]; top-norm ratio %.4f", m,
            d.h_half_min_ratio, d.h_half_max_ratio, d.h_top_max_ratio);
    if (m == 1) w.rad1 = r;
  }
  return o;
}

//------------------------------------------------------------------------------
// 12. decomposition
//------------------------------------------------------------------------------
Outcome decomposition(World& w) {
  Outcome o;
  const ProfileSet& ps = w.profiles();
  const double lam = 0.1;
  const GridPtr xg = tracking_grid(ps, lam);
  ModState p;
  p.lambda = lam, p.xbar = 0.013, p.gamma = 0.7, p.b = 0.02, p.nu = 0.003, p.eta = 1e-3;
  const Field u = render_profile(ps, p, xg);
  ModState g = p;
  g.lambda *= 1.01, g.xbar += 0.002, g.gamma -= 0.01, g.b += 0.003, g.nu -= 0.001;
  const DecompResult r = decompose(u, Field(), g, ps);
  const double err = std::max({std::abs(r.params.lambda - p.lambda), std::abs(r.params.xbar - p.xbar),
                               std::abs(std::remainder(r.params.gamma - p.gamma, 2 * M_PI)),
                               std::abs(r.params.b - p.b), std::abs(r.params.nu - p.nu)});
  o.check(err <= 1e-8, "planted round trip: max parameter error %.3e (<= 1e-8) in %d Newton steps", err, r.iterations);

  const DecompResult rg = decompose(std::polar(1.0, 0.4) * u, Field(), r.params, ps);
  const double eg = std::max({std::abs(std::remainder(rg.params.gamma - r.params.gamma - 0.4, 2 * M_PI)),
                              std::abs(rg.params.lambda - r.params.lambda), std::abs(rg.params.b - r.params.b)});
  o.check(eg <= 1e-9, "gauge equivariance %.3e (<= 1e-9)", eg);

  Field t(xg);
  for (int j = 0; j < xg->n(); ++j) t.v[(j + 1) % xg->n()] = u.v[j];
  const DecompResult rt = decompose(t, Field(), r.params, ps);
  const double et = std::max({std::abs(rt.params.xbar - r.params.xbar - xg->dx()),
                              std::abs(rt.params.lambda - r.params.lambda), std::abs(rt.params.b - r.params.b),
                              std::abs(rt.params.nu - r.params.nu)});
  o.check(et <= 1e-9, "translation equivariance %.3e (<= 1e-9)", et);

  const double mu = 1.3;
  const GridPtr sg = Grid::make(xg->n(), xg->length() * mu);
  ModState gs = r.params;
  gs.lambda *= mu, gs.xbar *= mu;
  const DecompResult rs = decompose(Field(sg, u.v / std::sqrt(mu)), Field(), gs, ps);
  const double es = std::max({std::abs(rs.params.lambda / r.params.lambda - mu) / mu,
                              std::abs(rs.params.b - r.params.b), std::abs(rs.params.nu - r.params.nu),
                              std::abs(std::remainder(rs.params.gamma - r.params.gamma, 2 * M_PI))});
  o.check(es <= 1e-8, "scaling equivariance %.3e (<= 1e-8)", es);

  // Jacobian entries at (Q_P(0, 0, eta), 1, 0, 0, 0, 0); deviation budget 1e-5 + 10 eta
  for (double eta : {1e-5, 1e-4}) {
    const BlockJacobian bj = block_jacobian(ps, w.oper(), eta, 0.0);
    const double tol = 1e-5 + 10 * eta;
    for (const auto& [k, v] : bj.entries) {
      const double e = bj.expected.at(k);
      o.check(std::abs(v - e) <= tol, "eta = %.0e: %s = %.6f vs %.6f, |diff| %.3e (<= %.1e)", eta, k.c_str(), v, e,
              std::abs(v - e), tol);
    }
    o.check(bj.max_off_block <= tol, "eta = %.0e: off-block max %.3e (<= %.1e)", eta, bj.max_off_block, tol);
    o.info("eta = %.0e: A25 + A52 = %.3e (A25 with the opposite sign matches)", eta,
           bj.entries.at("A25") + bj.entries.at("A52"));
  }
  return o;
}

//------------------------------------------------------------------------------
// 13. end-to-end tracking
//------------------------------------------------------------------------------
Outcome tracking(World& w) {
  Outcome o;
  if (!w.rad1) {
    RadiationOptions ro;
    ro.q_l2 = norm_l2(w.profiles().q);
    w.rad1 = solve_coefficients(tracking_grid(w.profiles(), 0.1), 1, 5, ro);
  }
  for (double eta : {1e-2, 3e-3, 1e-3}) {
    TrackingConfig cfg;
    cfg.eta = eta;
    const TrackingReport r = track_blowup_window(cfg, w.profiles(), *w.rad1);
    o.check(!r.basin_lost, "eta = %.0e: stays in the basin down to t = %.3f%s%s", eta, r.t_reached,
            r.basin_lost ? ": " : "", r.basin_message.c_str());
    o.check(r.eps_bounded, "eta = %.0e: max ||eps||_{H^1/2} / (%.2f lambda^{3/2}) = %.4f (<= 1)", eta,
            cfg.eps_bound_factor, r.max_eps_ratio);
    o.check(r.lambda_rel_error_end <= cfg.lambda_tol, "eta = %.0e: lambda vs ODE at t1 = %.2f: rel %.3e (<= %.2f)", eta,
            cfg.t1, r.lambda_rel_error_end, cfg.lambda_tol);
    o.check(r.runtime_seconds <= 1800, "eta = %.0e: runtime %.1f s (<= 1800 s)", eta, r.runtime_seconds);
    o.info("eta = %.0e: ||eps|| ~ |t|^%.3f; lambda exponents %.3f (target %.3f), %.3f (target 0.5); max mod vector "
           "%.3e",
           eta, r.eps_exponent_t, r.eps_exponent, 1.5 + 2 * cfg.omega, r.qp_extra_power, r.max_mod_vector);
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome(World&)>>> criteria = {
      {"ground state", ground_state},
      {"kernel relations", kernel_relations},
      {"key identity", key_identity},
      {"constants", constants},
      {"profile error scaling", profile_scaling},
      {"mass derivative along eta", mass_derivative},
      {"energy and momentum expansions", expansions},
      {"modulation ODE", modulation},
      {"coercivity", coercivity},
      {"evolution", evolution},
      {"radiation", radiation},
      {"decomposition", decomposition},
      {"end-to-end tracking", tracking}};

  World w;
  std::vector<std::pair<std::string, bool>> summary;
  int failed = 0, idx = 0;
  std::printf("acceptance at N = %d, L = %g\n", kN, kL);
  for (const auto& [name, fn] : criteria) {
    ++idx;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn(w);
    } catch (const std::exception& e) {
      o.check(false, "exception: %s", e.what());
    }
    std::printf("[%s] %2d %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", idx, name, since(t0));
    for (const auto& n : o.notes) std::printf("%s\n", n.c_str());
    std::fflush(stdout);
    summary.push_back({name, o.pass});
    failed += !o.pass;
  }
  std::printf("\nsummary\n");
  idx = 0;
  for (const auto& [name, ok] : summary) std::printf("[%s] %2d %s\n", ok ? "PASS" : "FAIL", ++idx, name.c_str());
  std::printf("%d of %zu criteria pass\n", int(summary.size()) - failed, summary.size());
  return failed;
}
