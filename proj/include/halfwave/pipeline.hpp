//==============================================================================
// pipeline.hpp
// Experiment configuration and the staged pipeline
//   ground_state -> kernel -> profiles -> modulation -> radiation -> tracking
// Every stage writes into its own subdirectory of output_dir; manifest.json
// lists the artifacts with SHA-1 checksums. Stages whose artifacts carry the
// current config fingerprint are reloaded instead of recomputed.
//==============================================================================
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "halfwave/field_io.hpp"

namespace hw {

inline const std::vector<std::string>& all_stages() {
  static const std::vector<std::string> s = {"ground_state", "kernel", "profiles",
                                             "modulation", "radiation", "tracking"};
  return s;
}

struct Tolerances {
  double ground_state = 1e-12;      // Petviashvili stopping tolerance
  double kernel = 1e-6;             // stale-ground-state threshold
  double profile_imposed = 1e-6;
  double profile_consistency = 1e-5;
  double ode_rtol = 1e-11;
  double ode_atol = 1e-14;
  double radiation = 1e-12;
  double decomposition = 1e-12;
};

struct ExperimentConfig {
  std::string output_dir;           // empty: $HALFWAVE_OUTPUT_ROOT or ./runs, plus /default
  uint64_t seed = 1;
  std::vector<std::string> stages = all_stages();
  bool resume = true;

  int n_points = 8192;
  double length = 256;
  Tolerances tol;

  // (E0, P0): when set, C0 and D0 follow from them in the modulation stage
  // and in the constants report; otherwise C0 from lambda0 and D0 = d0.
  std::optional<double> e0, p0;
  double e_z = 0, p_z = 0;          // used for (E0, P0) when no radiation is built

  std::vector<double> eta = {1e-2, 3e-3, 1e-3};
  double t_final = -0.5;            // modulation window
  double lambda0 = 0.1;
  double d0 = 0.05;

  int rad_m = 1;
  int rad_n = 5;
  int restarts = 16;

  double t1 = -0.5;                 // tracking window
  int samples = 21;
  double dt = 2e-4;
  std::string scheme = "yoshida4";
  double delta = 1.0 / 16.0;
  double omega = 1.0 / 8.0;

  void validate() const;
  std::string resolved_output_dir() const;
  // fingerprint of everything that affects the numbers
  std::string fingerprint() const;
};

json config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const json& j);  // missing keys keep defaults
ExperimentConfig load_config(const std::string& path);

struct PipelineResult {
  std::string output_dir;
  std::vector<std::string> completed, reused;
  json manifest;
  int exit_status = 0;
};

// Throws Error (message prefixed with the stage name) after persisting the
// partial manifest.
PipelineResult run_pipeline(const ExperimentConfig& cfg);

//------------------------------------------------------------------------------
// Derived constants gathered from the kernel and profile artifacts.
//------------------------------------------------------------------------------
struct ConstantRow {
  std::string name;
  double value = 0;
  std::string check;       // what the residual column measures
  double residual = 0;
  bool ok = true;
};
struct ConstantsTable {
  std::vector<ConstantRow> rows;
  std::string text() const;
  std::string csv() const;
  json to_json() const;
};
ConstantsTable report_constants(const std::string& artifacts_dir);

std::string sha1_file(const std::string& path);

}  // namespace hw
