//==============================================================================
// modulation.cpp
//==============================================================================

#include "halfwave/modulation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>

#include "halfwave/errors.hpp"

namespace hw {

namespace odeint = boost::numeric::odeint;

namespace {

// lambda, xbar, gamma, b, nu, J  (J integrates dI/dt)
using State = std::array<double, 6>;

struct System {
  ModConstants c;
  double eta;
  bool simplified;
  void operator()(const State& x, State& dx, double) const {
    const double lam = x[0], b = x[3], nu = x[4];
    const double c1 = simplified ? 0.0 : c.c1, c2 = simplified ? 0.0 : c.c2,
                 c3 = simplified ? 0.0 : c.c3;
    dx[0] = -b;
    dx[1] = nu + c2 * b * b * nu;
    dx[2] = 1.0 / lam;
    dx[3] = -((0.5 + c3 * eta) * b * b + eta + c1 * std::pow(b, 4) + c.c4 * nu * nu) / lam;
    dx[4] = -b * nu / lam;
    dx[5] = -2.0 * c1 * std::pow(b, 5) / std::pow(lam, 2.0 + 2.0 * c3 * eta);
  }
};

State pack(const ModState& s) { return {s.lambda, s.xbar, s.gamma, s.b, s.nu, 0.0}; }
ModState unpack(const State& x, double eta) { return {x[0], x[1], x[2], x[3], x[4], eta}; }

ModConstants effective(const ModConstants& c, bool simplified) {
  return simplified ? ModConstants{0, 0, 0, c.c4} : c;
}

void check_state(const ModState& s) {
  if (!(s.lambda > 0)) throw Error(ErrorKind::Domain, "lambda must be positive", s.lambda);
  if (s.eta < 0) throw Error(ErrorKind::Domain, "eta must be nonnegative", s.eta);
}

}  // namespace

//------------------------------------------------------------------------------
C0D0 compute_c0_d0(double e0, double p0, double e_z, double p_z, const std::map<std::string, double>& ip) {
  if (!(e0 > e_z)) throw Error(ErrorKind::Domain, "need E0 > E(z*)", e0 - e_z);
  const double lms = ip.at("(L-S1,S1)"), lmg = ip.at("(L-G1,G1)");
  C0D0 r;
  r.c0 = std::sqrt(0.5 * lms / (e0 - e_z));
  r.d0 = (p0 - p_z) / (2.0 * lmg);
  return r;
}

double almost_invariant(const ModState& s, const ModConstants& c) {
  const double a = 1.0 + 2.0 * c.c3 * s.eta;
  const double num = s.b * s.b + 2.0 * s.eta / a + 2.0 * c.c4 * s.nu * s.nu / (-1.0 + 2.0 * c.c3 * s.eta);
  return num / std::pow(s.lambda, a);
}

//------------------------------------------------------------------------------
// integration
//------------------------------------------------------------------------------
ModTrajectory integrate(const ModState& s0, const ModConstants& c, double t_final, const ModOptions& opt) {
  check_state(s0);
  if (!(t_final < 0)) throw Error(ErrorKind::Domain, "integration runs backward: t_final must be negative", t_final);
  const ModConstants ce = effective(c, opt.simplified);
  System sys{c, s0.eta, opt.simplified};
  auto st = odeint::make_dense_output(opt.atol, opt.rtol, odeint::runge_kutta_dopri5<State>());

  std::vector<double> outs;
  for (int k = 0; k < opt.n_output; ++k) outs.push_back(t_final * k / std::max(1, opt.n_output - 1));
  size_t next = 1;  // outs[0] = 0 is the initial point

  std::vector<std::pair<double, State>> rec{{0.0, pack(s0)}};
  ModTrajectory tr;
  st.initialize(pack(s0), 0.0, -1e-6);
  while (st.current_time() > t_final) {
    st.do_step(sys);
    const double tc = st.current_time();
    while (next < outs.size() && outs[next] >= tc) {
      State x;
      st.calc_state(outs[next], x);
      rec.push_back({outs[next], x});
      ++next;
    }
    if (tc > t_final) rec.push_back({tc, st.current_state()});
    const State& cur = st.current_state();
    if (!(cur[0] > opt.lambda_floor) || !std::isfinite(cur[3])) {
      tr.blowup_reached = true;
      tr.blowup_time = tc;
      tr.blowup_lambda = cur[0];
      tr.blowup_b = cur[3];
      break;
    }
  }
  std::sort(rec.begin(), rec.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  rec.erase(std::unique(rec.begin(), rec.end(),
                        [](const auto& a, const auto& b) { return a.first == b.first; }),
            rec.end());
  for (const auto& [t, x] : rec) {
    if (tr.blowup_reached && !(x[0] > 0)) continue;
    ModState s = unpack(x, s0.eta);
    tr.t.push_back(t);
    tr.states.push_back(s);
    tr.invariant.push_back(almost_invariant(s, ce));
    tr.invariant_source.push_back(x[5]);
    tr.nu_over_lambda.push_back(s.nu / s.lambda);
  }
  return tr;
}

std::vector<ModState> states_at(const ModState& s0, const ModConstants& c, const std::vector<double>& times,
                                const ModOptions& opt) {
  check_state(s0);
  System sys{c, s0.eta, opt.simplified};
  std::vector<ModState> out(times.size());
  std::vector<size_t> order(times.size());
  for (size_t i = 0; i < times.size(); ++i) order[i] = i;
  for (int dir : {-1, 1}) {
    std::vector<size_t> idx;
    for (size_t i : order)
      if ((dir < 0 && times[i] <= 0) || (dir > 0 && times[i] > 0)) idx.push_back(i);
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return std::abs(times[a]) < std::abs(times[b]); });
    if (idx.empty()) continue;
    auto st = odeint::make_dense_output(opt.atol, opt.rtol, odeint::runge_kutta_dopri5<State>());
    st.initialize(pack(s0), 0.0, dir * 1e-6);
    size_t k = 0;
    while (k < idx.size() && times[idx[k]] == 0.0) out[idx[k++]] = s0;
    while (k < idx.size()) {
      st.do_step(sys);
      const double tc = st.current_time();
      while (k < idx.size() && dir * times[idx[k]] <= dir * tc) {
        State x;
        st.calc_state(times[idx[k]], x);
        out[idx[k++]] = unpack(x, s0.eta);
      }
      if (!(st.current_state()[0] > opt.lambda_floor))
        throw Error(ErrorKind::Domain, "lambda reached zero before the requested time", tc);
    }
  }
  return out;
}

//------------------------------------------------------------------------------
// gamma(0) = int_{-eta}^0 dtau / lambda(tau) + 4 C0^2 / t0
//            - int_{-eta}^{t0} dtau / (tau^2 / (4 C0^2) + 2 C0^2 eta)
// with the o(1) correction of the reference profile set to zero.
//------------------------------------------------------------------------------
ModState initial_state(double c0, double d0, double eta, const ModConstants& c, double t0,
                       const ModOptions& opt) {
  if (!(eta > 0) || eta > 0.05) throw Error(ErrorKind::Domain, "eta must lie in (0, 0.05]", eta);
  if (!(c0 > 0)) throw Error(ErrorKind::Domain, "C0 must be positive", c0);
  if (!(t0 < -eta)) throw Error(ErrorKind::Domain, "reference time must satisfy t0 < -eta", t0);
  ModState s;
  s.eta = eta;
  s.lambda = 2.0 * c0 * c0 * eta;
  s.b = 0.0;
  s.nu = d0 * s.lambda;
  s.xbar = 0.0;
  s.gamma = 0.0;

  auto inv_lambda = [&](double tau) {
    if (tau == 0.0) return 1.0 / s.lambda;
    return 1.0 / states_at(s, c, {tau}, opt)[0].lambda;
  };
  double err = 0;
  const double i1 = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(inv_lambda, -eta, 0.0, 15,
                                                                                  1e-12, &err);
  const double a = 1.0 / (4.0 * c0 * c0), cc = 2.0 * c0 * c0 * eta;
  auto prim = [&](double tau) { return std::atan(tau * std::sqrt(a / cc)) / std::sqrt(a * cc); };
  const double i2 = prim(t0) - prim(-eta);
  s.gamma = i1 + 4.0 * c0 * c0 / t0 - i2;
  return s;
}

//------------------------------------------------------------------------------
std::vector<double> step_halving_orders(const ModState& s0, const ModConstants& c, double t_final, int n0,
                                        int levels) {
  System sys{c, s0.eta, false};
  ModOptions fine;
  fine.rtol = 1e-13;
  fine.atol = 1e-16;
  const ModState ref = states_at(s0, c, {t_final}, fine)[0];
  std::vector<double> errs;
  for (int l = 0; l <= levels; ++l) {
    const int n = n0 << l;
    const double h = t_final / n;
    State x = pack(s0);
    odeint::runge_kutta_dopri5<State> rk;
    double t = 0;
    for (int k = 0; k < n; ++k) {
      rk.do_step(sys, x, t, h);
      t += h;
    }
    errs.push_back(std::hypot(x[0] - ref.lambda, x[3] - ref.b));
  }
  std::vector<double> orders;
  for (size_t k = 0; k + 1 < errs.size(); ++k) orders.push_back(std::log2(errs[k] / errs[k + 1]));
  return orders;
}

//------------------------------------------------------------------------------
// closed form of the simplified system, written without cancellation:
//   lambda = lambda0 cos(w t) + (ell/2) (1 - cos(w t)) / w^2
//   b      = -(sqrt(ell^2 - 16 |c4| nu0^2 eta0) / 2) sin(w t) / w,  w^2 = 2 |c4| nu0^2
//------------------------------------------------------------------------------
double closed_form_lambda0(double ell, double eta0, double nu0, double c4) {
  if (!(c4 < 0)) throw Error(ErrorKind::Domain, "closed form needs c4 < 0", c4);
  if (!(ell > 0)) throw Error(ErrorKind::Domain, "closed form needs ell > 0", ell);
  const double disc = ell * ell - 16.0 * std::abs(c4) * nu0 * nu0 * eta0;
  if (disc < 0) throw Error(ErrorKind::Domain, "negative discriminant", disc);
  return 4.0 * eta0 / (ell + std::sqrt(disc));
}

ClosedFormValue closed_form_simplified(double ell, double eta0, double nu0, double c4, double t) {
  const double lam0 = closed_form_lambda0(ell, eta0, nu0, c4);
  const double disc = ell * ell - 16.0 * std::abs(c4) * nu0 * nu0 * eta0;
  const double w = std::sqrt(2.0 * std::abs(c4) * nu0 * nu0);
  ClosedFormValue v;
  if (w == 0.0) {
    v.lambda = 0.25 * ell * t * t + 2.0 * eta0 / ell;
    v.b = -0.5 * ell * t;
    return v;
  }
  const double wt = w * t;
  const double s2 = std::sin(0.5 * wt);
  const double one_minus_cos_over_w2 = 2.0 * s2 * s2 / (w * w);
  const double sinc_t = std::abs(wt) < 1e-8 ? t * (1.0 - wt * wt / 6.0) : std::sin(wt) / w;
  v.lambda = lam0 * std::cos(wt) + 0.5 * ell * one_minus_cos_over_w2;
  v.b = -0.5 * std::sqrt(disc) * sinc_t;
  return v;
}

ClosedFormValidation validate_against_closed_form(double c4, double ell, double eta0, double nu0,
                                                  double t_start, const ModOptions& opt_in) {
  ModOptions opt = opt_in;
  opt.simplified = true;
  ModState s0;
  s0.eta = eta0;
  s0.lambda = closed_form_lambda0(ell, eta0, nu0, c4);
  s0.b = 0.0;
  s0.nu = nu0 * s0.lambda;
  ModConstants c{0, 0, 0, c4};
  ModTrajectory tr = integrate(s0, c, t_start, opt);
  ClosedFormValidation v;
  v.min_lambda = 1e300;
  v.lambda_at_zero = s0.lambda;
  double bscale = 0;
  for (const auto& s : tr.states) bscale = std::max(bscale, std::abs(s.b));
  for (size_t k = 0; k < tr.t.size(); ++k) {
    const ModState& s = tr.states[k];
    ClosedFormValue cf = closed_form_simplified(ell, eta0, nu0, c4, tr.t[k]);
    const double el = std::abs(s.lambda - cf.lambda) / std::abs(cf.lambda);
    const double eb = std::abs(s.b - cf.b) / std::max(std::abs(cf.b), bscale);
    v.max_error = std::max({v.max_error, el, eb});
    const double l = (s.b * s.b + 2.0 * eta0 - 2.0 * c4 * s.nu * s.nu) / s.lambda;
    v.ell_drift = std::max(v.ell_drift, std::abs(l - ell) / ell);
    v.min_lambda = std::min(v.min_lambda, s.lambda);
  }
  return v;
}

//------------------------------------------------------------------------------
ModDiagnostics diagnose(const ModTrajectory& tr, const ModConstants& c, double c0, double d0) {
  ModDiagnostics d;
  if (tr.t.empty()) return d;
  const size_t i0 = std::find(tr.t.begin(), tr.t.end(), 0.0) - tr.t.begin();
  if (i0 == tr.t.size()) throw Error(ErrorKind::InvalidArgument, "trajectory has no t = 0 sample");
  const double I0 = tr.invariant[i0];
  const double nl0 = tr.nu_over_lambda[i0];
  d.min_b = 1e300;
  d.min_lambda = 1e300;
  double rmin = 1e300, rmax = 0;
  for (size_t k = 0; k < tr.t.size(); ++k) {
    const ModState& s = tr.states[k];
    const double t = tr.t[k];
    d.nu_over_lambda_drift = std::max(d.nu_over_lambda_drift,
                                      std::abs(tr.nu_over_lambda[k] - nl0) / std::max(std::abs(nl0), 1e-300));
    d.invariant_law_residual =
        std::max(d.invariant_law_residual, std::abs(tr.invariant[k] - I0 - tr.invariant_source[k]) / std::abs(I0));
    if (t != 0.0) d.invariant_drift_rate = std::max(d.invariant_drift_rate, std::abs(tr.invariant[k] - I0) / std::abs(t));
    if (t <= 0) d.min_b = std::min(d.min_b, s.b);
    const double r = (s.b * s.b + s.eta) / s.lambda;
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
    if (s.lambda < d.min_lambda) {
      d.min_lambda = s.lambda;
      d.t_min_lambda = t;
    }
  }
  if (nl0 == 0.0) d.nu_over_lambda_drift = 0.0;
  d.ratio_constant = std::max(rmax, 1.0 / rmin);

  // quartic remainder on [-0.1, 0]
  std::vector<size_t> sel;
  for (size_t k = 0; k < tr.t.size(); ++k)
    if (tr.t[k] >= -0.1 && tr.t[k] <= 0) sel.push_back(k);
  if (sel.size() >= 6) {
    const double eta = tr.states[i0].eta;
    Eigen::MatrixXd A(sel.size(), 3);
    Eigen::VectorXd y(sel.size());
    double lmax = 0;
    for (size_t j = 0; j < sel.size(); ++j) {
      const double t = tr.t[sel[j]];
      const double lam = tr.states[sel[j]].lambda;
      A.row(j) << t * t, std::pow(t, 4), std::pow(t, 6);
      y[j] = lam - 2.0 * c0 * c0 * eta - t * t / (4.0 * c0 * c0);
      lmax = std::max(lmax, lam);
    }
    Eigen::VectorXd x = A.colPivHouseholderQr().solve(y);
    d.quad_correction = x[0] * 4.0 * c0 * c0;
    d.quartic_coefficient = x[1];
    d.quartic_fit_residual = (A * x - y).cwiseAbs().maxCoeff() / lmax;
  }
  (void)c;
  (void)d0;
  return d;
}

std::string trajectory_csv(const ModTrajectory& tr) {
  std::ostringstream os;
  os.precision(17);
  os << "t,lambda,b,nu,xbar,gamma,I,nu_over_lambda\n";
  for (size_t k = 0; k < tr.t.size(); ++k) {
    const ModState& s = tr.states[k];
    os << tr.t[k] << ',' << s.lambda << ',' << s.b << ',' << s.nu << ',' << s.xbar << ',' << s.gamma << ','
       << tr.invariant[k] << ',' << tr.nu_over_lambda[k] << '\n';
  }
  return os.str();
}

}  // namespace hw
