//==============================================================================
// evolution.cpp
//==============================================================================

#include "halfwave/evolution.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "halfwave/field_io.hpp"

namespace hw {

namespace {

struct Propagator {
  const Grid* g;
  bool dealias;
  bool nonlinear;

  void linear(cvec& u, double tau) const {
    g->fft_inplace(u);
    const rvec& a = g->abs_freqs();
    const int n = g->n(), kmax = n / 3;
    for (int j = 0; j < n; ++j) {
      const int k = j < n / 2 ? j : j - n;
      if (dealias && std::abs(k) > kmax)
        u[j] = 0.0;
      else
        u[j] *= std::polar(1.0, -a[j] * tau);
    }
    g->ifft_inplace(u);
  }
  void nonlin(cvec& u, double tau) const {
    if (!nonlinear) return;
    for (int j = 0; j < u.size(); ++j) u[j] *= std::polar(1.0, std::norm(u[j]) * tau);
  }
  void strang(cvec& u, double tau) const {
    linear(u, 0.5 * tau);
    nonlin(u, tau);
    linear(u, 0.5 * tau);
  }
  // k consecutive Strang steps with adjacent linear halves fused
  void strang_run(cvec& u, double tau, int k) const {
    if (k <= 0) return;
    linear(u, 0.5 * tau);
    for (int i = 0; i < k; ++i) {
      nonlin(u, tau);
      linear(u, i + 1 < k ? tau : 0.5 * tau);
    }
  }
  void yoshida(cvec& u, double tau) const {
    const double c = std::cbrt(2.0);
    const double w1 = 1.0 / (2.0 - c), w0 = -c / (2.0 - c);
    strang(u, w1 * tau);
    strang(u, w0 * tau);
    strang(u, w1 * tau);
  }
};

void monitor(const Field& u, double t, double delta, EvolutionLog& log) {
  ConservedQuantities cq = conserved_quantities(u);
  log.times.push_back(t);
  log.mass.push_back(cq.mass);
  log.energy.push_back(cq.energy);
  log.momentum.push_back(cq.momentum);
  log.h_half.push_back(sobolev_norm(u, 0.5, false));
  log.h_half_delta.push_back(sobolev_norm(u, 0.5 + delta, false));
}

bool finite(const cvec& u) { return u.allFinite(); }

}  // namespace

double EvolutionLog::max_mass_drift() const {
  double d = 0;
  for (double m : mass) d = std::max(d, std::abs(m - mass.front()) / mass.front());
  return d;
}

double EvolutionLog::max_energy_drift() const {
  if (energy.empty()) return 0.0;
  const double scale = std::abs(energy.front());
  double d = 0;
  for (double e : energy) d = std::max(d, std::abs(e - energy.front()) / std::max(scale, 1e-300));
  return d;
}

double EvolutionLog::max_momentum_drift() const {
  if (momentum.empty()) return 0.0;
  const double scale = std::max(std::abs(momentum.front()), 1e-300);
  double d = 0;
  for (double p : momentum) d = std::max(d, std::abs(p - momentum.front()) / scale);
  return d;
}

Field step(const Field& u, const EvolverConfig& cfg) {
  if (!(cfg.dt > 0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive", cfg.dt);
  Propagator pr{u.grid.get(), cfg.dealias, cfg.nonlinear};
  Field out = u;
  if (cfg.scheme == Scheme::Strang)
    pr.strang(out.v, cfg.dt);
  else
    pr.yoshida(out.v, cfg.dt);
  if (!finite(out.v)) throw InstabilityError("non-finite values after one step", u, cfg.dt);
  return out;
}

EvolveResult evolve(const Field& u0, double duration, const EvolverConfig& cfg) {
  if (!(cfg.dt > 0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive", cfg.dt);
  if (cfg.monitor_stride < 1) throw Error(ErrorKind::InvalidArgument, "monitor_stride must be >= 1");
  if (!(duration > 0) || !std::isfinite(duration))
    throw Error(ErrorKind::InvalidArgument, "duration must be positive and finite", duration);
  check_finite(u0, "evolve");
  const int nsteps = static_cast<int>(std::ceil(duration / cfg.dt - 1e-9));
  const double tau = duration / nsteps;
  Propagator pr{u0.grid.get(), cfg.dealias, cfg.nonlinear};

  EvolveResult res;
  res.u = u0;
  monitor(res.u, 0.0, cfg.hs_delta, res.log);
  const double h0 = res.log.h_half.front();
  const double e_scale = std::abs(res.log.energy.front());
  int next_ckpt = 1;

  int done = 0;
  while (done < nsteps) {
    const int k = std::min(cfg.monitor_stride, nsteps - done);
    Field last = res.u;
    if (cfg.scheme == Scheme::Strang)
      pr.strang_run(res.u.v, tau, k);
    else
      for (int i = 0; i < k; ++i) pr.yoshida(res.u.v, tau);
    done += k;
    const double t = done * tau;
    if (!finite(res.u.v)) throw InstabilityError("non-finite values during evolution", last, t - k * tau);
    monitor(res.u, t, cfg.hs_delta, res.log);
    auto& lg = res.log;
    if (std::abs(lg.mass.back() - lg.mass.front()) / lg.mass.front() > cfg.max_mass_drift)
      throw Error(ErrorKind::ConservationViolation, "mass drift exceeds bound", t);
    if (std::abs(lg.energy.back() - lg.energy.front()) / std::max(e_scale, 1e-300) > cfg.max_energy_drift)
      throw Error(ErrorKind::ConservationViolation, "energy drift exceeds bound", t);
    if (lg.h_half.back() > cfg.guard_factor * h0) {
      lg.aborted = true;
      lg.abort_reason = "H^1/2 norm exceeded guard";
      break;
    }
    if (cfg.checkpoint_interval > 0 && !cfg.checkpoint_dir.empty() && t >= next_ckpt * cfg.checkpoint_interval) {
      std::filesystem::create_directories(cfg.checkpoint_dir);
      write_field(cfg.checkpoint_dir + "/checkpoint_" + std::to_string(next_ckpt) + ".hwf", res.u, {{"t", t}});
      ++next_ckpt;
    }
  }
  return res;
}

EvolveResult evolve_backward(const Field& u0, double t_end, const EvolverConfig& cfg) {
  if (!(t_end < 0)) throw Error(ErrorKind::InvalidArgument, "backward evolution needs t_end < 0", t_end);
  EvolveResult r = evolve(u0.conj(), -t_end, cfg);
  r.u = r.u.conj();
  for (double& t : r.log.times) t = -t;
  for (double& p : r.log.momentum) p = -p;
  return r;
}

std::string log_csv(const EvolutionLog& log) {
  std::ostringstream os;
  os.precision(17);
  os << "t,mass,energy,momentum,h_half,h_half_delta\n";
  for (size_t k = 0; k < log.times.size(); ++k)
    os << log.times[k] << ',' << log.mass[k] << ',' << log.energy[k] << ',' << log.momentum[k] << ','
       << log.h_half[k] << ',' << log.h_half_delta[k] << '\n';
  return os.str();
}

}  // namespace hw
