//==============================================================================
// ground_state.cpp
//==============================================================================

#include "halfwave/ground_state.hpp"

#include <cmath>
#include <random>

#include "halfwave/errors.hpp"

namespace hw {

namespace {

rvec d_plus_one(const GridPtr& g) { return g->abs_freqs().array() + 1.0; }

rvec apply_real(const GridPtr& g, const rvec& f, const rvec& sym) {
  cvec a = g->fft(f.cast<cplx>());
  a.array() *= sym.array().cast<cplx>();
  g->ifft_inplace(a);
  return a.real();
}

rvec symmetrize(const GridPtr& g, const rvec& f) {
  rvec out(f.size());
  for (int j = 0; j < f.size(); ++j) out[j] = 0.5 * (f[j] + f[g->mirror(j)]);
  return out;
}

double rel_residual(const GridPtr& g, const rvec& q, const rvec& dp1) {
  rvec r = apply_real(g, q, dp1) - q.array().cube().matrix();
  return r.norm() / q.norm();
}

GroundState finish(const GridPtr& g, const rvec& q, int iters, const char* method) {
  GroundState gs;
  gs.q = Field::from_real(g, q);
  gs.residual_l2 = ground_state_residual(gs.q);
  gs.iterations = iters;
  DecayFit fit = decay_fit(gs.q);
  gs.decay_coefficient = fit.coefficient;
  gs.decay_variation = fit.variation;
  gs.decay_variation_raw = fit.raw_variation;
  gs.method = method;
  return gs;
}

}  // namespace

double ground_state_residual(const Field& q) {
  Field r = frac_d(q) + q;
  r.v.array() -= q.v.array().abs2() * q.v.array();
  return norm_l2(r);
}

DecayFit decay_fit(const Field& q) {
  const auto& g = *q.grid;
  const double L = g.length();
  double lo = 1e300, hi = -1e300, sum = 0, rlo = 1e300, rhi = -1e300;
  int cnt = 0;
  for (int j = 0; j < g.n(); ++j) {
    double y = g.nodes()[j], ay = std::abs(y);
    if (ay < 0.25 * L || ay > 0.4 * L) continue;
    double s = std::sin(M_PI * y / L);
    double v = q.v[j].real() * (L / M_PI) * (L / M_PI) * s * s;
    double r = q.v[j].real() * y * y;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    rlo = std::min(rlo, r);
    rhi = std::max(rhi, r);
    sum += v;
    ++cnt;
  }
  DecayFit f;
  f.coefficient = sum / cnt;
  f.variation = (hi - lo) / std::abs(f.coefficient);
  f.raw_variation = (rhi - rlo) / (0.5 * std::abs(rhi + rlo));
  return f;
}

//------------------------------------------------------------------------------
// Petviashvili: Q <- M^{3/2} (D+1)^{-1} Q^3,  M = <(D+1)Q,Q> / <Q^3,Q>
//------------------------------------------------------------------------------
GroundState solve_petviashvili(const GridPtr& g, double tol, int max_iter) {
  if (tol < 1e-13) throw Error(ErrorKind::InvalidArgument, "Petviashvili tolerance below 1e-13", tol);
  const rvec dp1 = d_plus_one(g);
  const rvec inv = dp1.cwiseInverse();
  rvec q(g->n());
  for (int j = 0; j < g->n(); ++j) q[j] = 1.0 / std::cosh(0.5 * g->nodes()[j]);
  if (std::max(q[0], q[g->n() - 1]) > 1e-6)
    throw Error(ErrorKind::InvalidArgument, "box too small for the sech seed", g->length());

  double res = rel_residual(g, q, dp1);
  int it = 0;
  for (; it < max_iter && res > tol; ++it) {
    rvec q3 = q.array().cube();
    double m = apply_real(g, q, dp1).dot(q) / q3.dot(q);
    q = std::pow(m, 1.5) * apply_real(g, q3, inv);
    q = symmetrize(g, q);
    res = rel_residual(g, q, dp1);
    if (!std::isfinite(res)) throw Error(ErrorKind::Divergence, "Petviashvili produced non-finite values");
  }
  if (res > tol) throw Error(ErrorKind::Divergence, "Petviashvili did not converge", res);
  if (q.minCoeff() < -1e-12) throw Error(ErrorKind::Positivity, "ground state changed sign", q.minCoeff());
  return finish(g, q, it, "petviashvili");
}

//------------------------------------------------------------------------------
// Normalized gradient flow on {||u||_4 = 1}:
//   u <- u - tau (D+1)^{-1} [(D+1)u - mu u^3],  mu = <(D+1)u,u>
// The minimizer satisfies (D+1)u = mu u^3, so Q = sqrt(mu) u.
//------------------------------------------------------------------------------
GroundState solve_gradient_flow_oracle(const GridPtr& g, double tol, int max_iter) {
  const rvec dp1 = d_plus_one(g);
  const rvec inv = dp1.cwiseInverse();
  const double dx = g->dx();
  rvec u(g->n());
  for (int j = 0; j < g->n(); ++j) u[j] = std::exp(-0.25 * g->nodes()[j] * g->nodes()[j]);
  auto normalize = [&](rvec& f) { f /= std::pow(f.array().pow(4).sum() * dx, 0.25); };
  normalize(u);

  const double tau = 0.5;
  double res = 1.0;
  int it = 0;
  rvec q;
  for (; it < max_iter; ++it) {
    rvec lu = apply_real(g, u, dp1);
    double mu = lu.dot(u) * dx;
    q = std::sqrt(mu) * u;
    res = rel_residual(g, q, dp1);
    if (!std::isfinite(res)) throw Error(ErrorKind::Divergence, "gradient flow produced non-finite values");
    if (res <= tol) break;
    rvec grad = lu - mu * u.array().cube().matrix();
    u -= tau * apply_real(g, grad, inv);
    normalize(u);
  }
  if (res > tol) throw Error(ErrorKind::Divergence, "gradient flow did not converge", res);
  return finish(g, q, it, "gradient-flow");
}

double center_of_mass(const Field& f) {
  const auto& x = f.grid->nodes();
  double num = 0, den = 0;
  for (int j = 0; j < f.size(); ++j) {
    double p = std::norm(f.v[j]);
    num += x[j] * p;
    den += p;
  }
  return num / den;
}

double aligned_relative_difference(const Field& a, const Field& b) {
  double shift = center_of_mass(a) - center_of_mass(b);
  Field bs = std::abs(shift) > 0 ? translate(b, shift) : b;
  return norm_l2(a - bs) / norm_l2(a);
}

//------------------------------------------------------------------------------
// Sharp Gagliardo-Nirenberg and the energy lower bound on random trial fields
//------------------------------------------------------------------------------
double gn_functional(const Field& u) {
  double m = inner_r(u, u);
  double h = sobolev_norm(u, 0.5, true);
  double q4 = 0.0;
  for (int j = 0; j < u.size(); ++j) q4 += std::norm(u.v[j]) * std::norm(u.v[j]);
  q4 *= u.grid->dx();
  return q4 / (h * h * m);
}

GnReport gn_sharpness_check(const GroundState& gs, int trials, uint64_t seed) {
  if (trials < 10) throw Error(ErrorKind::InvalidArgument, "need at least 10 trials", trials);
  const GridPtr& g = gs.q.grid;
  GnReport rep;
  rep.trials = trials;
  rep.j_q = gn_functional(gs.q);
  const double mq = gs.mass();
  const double hq = sobolev_norm(gs.q, 0.5, true);
  rep.energy_q = conserved_quantities(gs.q).energy / (hq * hq);
  rep.energy_half_q = conserved_quantities(0.5 * gs.q).energy;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const double L = g->length();
  rep.max_ratio = 0.0;
  rep.min_energy_margin = 1e300;
  for (int t = 0; t < trials; ++t) {
    const int deg = static_cast<int>(rng() % 4);
    const double width = 0.5 + 2.5 * (0.5 * (uni(rng) + 1.0));
    const double center = 0.05 * L * uni(rng);
    std::vector<cplx> c(deg + 1);
    for (auto& ck : c) ck = cplx(uni(rng), uni(rng));
    const double amp = 0.2 + 3.0 * (0.5 * (uni(rng) + 1.0));
    Field u = Field::from_function(g, [&](double x) {
      double y = (x - center) / width;
      cplx p = 0.0, yk = 1.0;
      for (const auto& ck : c) {
        p += ck * yk;
        yk *= y;
      }
      return amp * p * std::exp(-0.5 * y * y);
    });
    double ratio = gn_functional(u) / rep.j_q;
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (ratio > 1.0 + 1e-6) ++rep.gn_violations;

    double h = sobolev_norm(u, 0.5, true);
    double bound = 0.5 * h * h * (1.0 - inner_r(u, u) / mq);
    double margin = (conserved_quantities(u).energy - bound) / (h * h);
    rep.min_energy_margin = std::min(rep.min_energy_margin, margin);
    if (margin < -1e-6) ++rep.energy_violations;
  }
  rep.ok = rep.gn_violations == 0 && rep.energy_violations == 0 && std::abs(rep.energy_q) < 1e-6 &&
           rep.energy_half_q > 0.0;
  return rep;
}

}  // namespace hw
