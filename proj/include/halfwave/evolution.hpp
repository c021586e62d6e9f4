//==============================================================================
// evolution.hpp
// Split-step integration of  i u_t = D u - |u|^2 u  on the periodic grid.
//   linear sub-flow:    u^ -> exp(-i |xi| tau) u^
//   nonlinear sub-flow: u  -> u exp(i |u|^2 tau)
// Strang composition (order 2) or the Yoshida triple-jump of Strang (order 4).
//==============================================================================
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "halfwave/errors.hpp"
#include "halfwave/spectral.hpp"

namespace hw {

enum class Scheme { Strang, Yoshida4 };

struct EvolverConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::Strang;
  bool dealias = true;       // 2/3 filter folded into the linear sub-flow
  bool nonlinear = true;     // false: pure half-wave propagator
  int monitor_stride = 10;
  double guard_factor = 50;  // abort when ||u||_{H^1/2} exceeds this multiple of its initial value
  double hs_delta = 1.0 / 16.0;
  double max_mass_drift = std::numeric_limits<double>::infinity();    // relative
  double max_energy_drift = std::numeric_limits<double>::infinity();  // relative to |E0|
  double checkpoint_interval = 0;  // 0: no checkpoints
  std::string checkpoint_dir;
};

struct EvolutionLog {
  std::vector<double> times, mass, energy, momentum, h_half, h_half_delta;
  bool aborted = false;
  std::string abort_reason;
  double max_mass_drift() const;
  double max_energy_drift() const;  // relative to |E0|
  double max_momentum_drift() const;
};

struct EvolveResult {
  Field u;
  EvolutionLog log;
};

class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, Field last_good, double time)
      : Error(ErrorKind::Instability, what, time), last_good_(std::move(last_good)), time_(time) {}
  const Field& last_good() const { return last_good_; }
  double time() const { return time_; }

 private:
  Field last_good_;
  double time_;
};

// One step of size cfg.dt.
Field step(const Field& u, const EvolverConfig& cfg);

// Forward evolution over [0, duration], duration > 0. The step count is
// ceil(duration / dt) with the step shrunk to land exactly on the end time.
EvolveResult evolve(const Field& u0, double duration, const EvolverConfig& cfg);

// Backward evolution to time t_end < 0: conj(evolve(conj u0, -t_end)).
EvolveResult evolve_backward(const Field& u0, double t_end, const EvolverConfig& cfg);

std::string log_csv(const EvolutionLog& log);

}  // namespace hw
