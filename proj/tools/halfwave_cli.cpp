//==============================================================================
// halfwave_cli.cpp
// Command-line entry point. Every subcommand except `evolve` and `report`
// runs the pipeline up to its stage, reusing persisted artifacts.
//==============================================================================
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "halfwave/decomposition.hpp"
#include "halfwave/errors.hpp"
#include "halfwave/evolution.hpp"
#include "halfwave/ground_state.hpp"
#include "halfwave/pipeline.hpp"
#include "halfwave/profiles.hpp"
#include "halfwave/radiation.hpp"
#include "halfwave/tracking.hpp"

namespace fs = std::filesystem;
using namespace hw;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<int> n;
  std::optional<double> length, e0, p0, t_final, lambda0, d0, t1, dt, gs_tol, ode_rtol, ode_atol, rad_tol;
  std::optional<uint64_t> seed;
  std::vector<double> eta;
  std::optional<int> m, n_coeffs, restarts, samples;
  std::optional<std::string> scheme;
  bool no_resume = false;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON experiment config");
  app->add_option("--out", f.out, "output directory (default $HALFWAVE_OUTPUT_ROOT/default or runs/default)");
  app->add_option("--n", f.n, "grid points");
  app->add_option("--length", f.length, "box length");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--gs-tol", f.gs_tol, "ground-state tolerance");
  app->add_flag("--no-resume", f.no_resume, "recompute every stage");
}

void add_modulation(CLI::App* app, Flags& f) {
  app->add_option("--eta", f.eta, "eta sweep list")->delimiter(',');
  app->add_option("--E0", f.e0, "target energy");
  app->add_option("--P0", f.p0, "target momentum");
  app->add_option("--t-final", f.t_final, "modulation window end (negative)");
  app->add_option("--lambda0", f.lambda0, "lambda(0) when E0 is not given; tracking scale");
  app->add_option("--d0", f.d0, "D0 when P0 is not given");
  app->add_option("--rtol", f.ode_rtol, "ODE relative tolerance");
  app->add_option("--atol", f.ode_atol, "ODE absolute tolerance");
}

void add_radiation(CLI::App* app, Flags& f) {
  app->add_option("--m", f.m, "degeneracy order");
  app->add_option("--N", f.n_coeffs, "number of coefficients");
  app->add_option("--restarts", f.restarts, "random restarts");
  app->add_option("--rad-tol", f.rad_tol, "functional residual tolerance");
}

void add_tracking(CLI::App* app, Flags& f) {
  app->add_option("--t1", f.t1, "tracking window start (negative)");
  app->add_option("--samples", f.samples, "decomposition samples");
  app->add_option("--dt", f.dt, "evolution step");
  app->add_option("--scheme", f.scheme, "strang or yoshida4");
}

ExperimentConfig make_config(const Flags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (!f.out.empty()) c.output_dir = f.out;
  if (f.n) c.n_points = *f.n;
  if (f.length) c.length = *f.length;
  if (f.seed) c.seed = *f.seed;
  if (f.gs_tol) c.tol.ground_state = *f.gs_tol;
  if (f.ode_rtol) c.tol.ode_rtol = *f.ode_rtol;
  if (f.ode_atol) c.tol.ode_atol = *f.ode_atol;
  if (f.rad_tol) c.tol.radiation = *f.rad_tol;
  if (!f.eta.empty()) c.eta = f.eta;
  if (f.e0) c.e0 = f.e0;
  if (f.p0) c.p0 = f.p0;
  if (f.t_final) c.t_final = *f.t_final;
  if (f.lambda0) c.lambda0 = *f.lambda0;
  if (f.d0) c.d0 = *f.d0;
  if (f.m) c.rad_m = *f.m;
  if (f.n_coeffs) c.rad_n = *f.n_coeffs;
  if (f.restarts) c.restarts = *f.restarts;
  if (f.t1) c.t1 = *f.t1;
  if (f.samples) c.samples = *f.samples;
  if (f.dt) c.dt = *f.dt;
  if (f.scheme) c.scheme = *f.scheme;
  if (f.no_resume) c.resume = false;
  c.validate();
  return c;
}

std::vector<std::string> stages_upto(const std::string& last) {
  std::vector<std::string> s;
  for (const auto& x : all_stages()) {
    if (x == "modulation" && last != "modulation" && last != "tracking") continue;
    s.push_back(x);
    if (x == last) break;
  }
  return s;
}

PipelineResult run_upto(const Flags& f, const std::string& last) {
  ExperimentConfig c = make_config(f);
  c.stages = stages_upto(last);
  PipelineResult r = run_pipeline(c);
  std::printf("output: %s\n", r.output_dir.c_str());
  for (const auto& s : r.completed) std::printf("  computed %s\n", s.c_str());
  for (const auto& s : r.reused) std::printf("  reused   %s\n", s.c_str());
  return r;
}

void print_json_map(const json& j, const char* title) {
  std::printf("%s\n", title);
  for (const auto& [k, v] : j.items()) {
    if (v.is_number())
      std::printf("  %-44s % .10e\n", k.c_str(), v.get<double>());
    else
      std::printf("  %-44s %s\n", k.c_str(), v.dump().c_str());
  }
}

json read_stage(const PipelineResult& r, const std::string& rel) {
  return read_json((fs::path(r.output_dir) / rel).string());
}

//------------------------------------------------------------------------------
// evolve
//------------------------------------------------------------------------------
struct EvolveFlags {
  std::string init = "ground-state";
  std::string file;
  double duration = 1.0;
  double dt = 1e-3;
  std::string scheme = "strang";
  double eta = 1e-3, b = 0, nu = 0;
  bool radiation = false;
  double checkpoint = 0;
  bool no_dealias = false;
};

int cmd_evolve(const Flags& f, const EvolveFlags& ef) {
  ExperimentConfig c = make_config(f);
  Field u;
  if (ef.init == "file") {
    if (ef.file.empty()) throw Error(ErrorKind::InvalidArgument, "--file is required with --init file");
    u = read_field(ef.file).field;
  } else if (ef.init == "ground-state") {
    c.stages = {"ground_state"};
    const PipelineResult r = run_pipeline(c);
    u = read_field((fs::path(r.output_dir) / "ground_state" / "Q.hwf").string()).field;
  } else if (ef.init == "profile") {
    c.stages = ef.radiation ? std::vector<std::string>{"ground_state", "kernel", "profiles", "radiation"}
                            : std::vector<std::string>{"ground_state", "kernel", "profiles"};
    const PipelineResult r = run_pipeline(c);
    const ProfileSet ps = load_profiles((fs::path(r.output_dir) / "profiles").string());
    ModState s;
    s.lambda = c.lambda0, s.b = ef.b, s.nu = ef.nu, s.eta = ef.eta;
    u = render_profile(ps, s, tracking_grid(ps, c.lambda0));
    if (ef.radiation) {
      const RadiationSpec rad = load_radiation((fs::path(r.output_dir) / "radiation").string());
      const Field z = realize(rad);
      if (!z.grid->compatible(*u.grid)) throw Error(ErrorKind::GridMismatch, "radiation grid differs");
      u = Field(u.grid, u.v + z.v);
    }
  } else {
    throw Error(ErrorKind::InvalidArgument, "--init must be ground-state, profile or file");
  }

  EvolverConfig ec;
  ec.dt = ef.dt;
  ec.scheme = ef.scheme == "yoshida4" ? Scheme::Yoshida4 : Scheme::Strang;
  ec.dealias = !ef.no_dealias;
  const fs::path out = fs::path(c.resolved_output_dir()) / "evolve";
  fs::create_directories(out);
  if (ef.checkpoint > 0) {
    ec.checkpoint_interval = ef.checkpoint;
    ec.checkpoint_dir = (out / "checkpoints").string();
  }
  const EvolveResult r = ef.duration > 0 ? evolve(u, ef.duration, ec) : evolve_backward(u, ef.duration, ec);
  write_field((out / "final.hwf").string(), r.u, {{"time", ef.duration}});
  std::ofstream(out / "log.csv") << log_csv(r.log);
  std::printf("evolved to t = %g: mass drift %.3e, energy drift %.3e (relative to |E0|), output %s\n",
              ef.duration, r.log.max_mass_drift(), r.log.max_energy_drift(), out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Half-wave blow-up family: ground state, profiles, modulation, radiation, tracking"};
  app.require_subcommand(1);
  Flags f;
  EvolveFlags ef;
  std::string report_dir;

  auto* gs = app.add_subcommand("ground-state", "solve DQ + Q = Q^3 and store Q");
  add_common(gs, f);
  bool oracle = false;
  gs->add_flag("--oracle", oracle, "also run the gradient-flow oracle and compare");

  auto* kernel = app.add_subcommand("kernel", "generalized kernel, inner-product table, coercivity");
  add_common(kernel, f);

  auto* profiles = app.add_subcommand("profiles", "build and validate the profile correctors");
  add_common(profiles, f);

  auto* modulation = app.add_subcommand("modulation", "integrate the modulation law over an eta sweep");
  add_common(modulation, f);
  add_modulation(modulation, f);

  auto* radiation = app.add_subcommand("radiation", "solve the degenerate radiation coefficients");
  add_common(radiation, f);
  add_modulation(radiation, f);
  add_radiation(radiation, f);

  auto* evolve_cmd = app.add_subcommand("evolve", "evolve initial data with the split-step solver");
  add_common(evolve_cmd, f);
  evolve_cmd->add_option("--lambda0", f.lambda0, "scale of the rendered profile");
  evolve_cmd->add_option("--init", ef.init, "ground-state | profile | file");
  evolve_cmd->add_option("--file", ef.file, "field container for --init file");
  evolve_cmd->add_option("--duration", ef.duration, "signed duration (negative: backward)");
  evolve_cmd->add_option("--dt", ef.dt, "time step");
  evolve_cmd->add_option("--scheme", ef.scheme, "strang or yoshida4");
  evolve_cmd->add_option("--eta", ef.eta, "eta of the rendered profile");
  evolve_cmd->add_option("--b", ef.b, "b of the rendered profile");
  evolve_cmd->add_option("--nu", ef.nu, "nu of the rendered profile");
  evolve_cmd->add_flag("--with-radiation", ef.radiation, "add z* to the rendered profile");
  evolve_cmd->add_option("--checkpoint", ef.checkpoint, "checkpoint interval (0: none)");
  evolve_cmd->add_flag("--no-dealias", ef.no_dealias, "disable the 2/3 filter");

  auto* track = app.add_subcommand("track", "full pipeline through backward tracking");
  add_common(track, f);
  add_modulation(track, f);
  add_radiation(track, f);
  add_tracking(track, f);

  auto* report = app.add_subcommand("report", "table of derived constants from an artifact directory");
  report->add_option("dir", report_dir, "artifact directory")->required();

  auto* pipeline = app.add_subcommand("pipeline", "run the stages listed in the config");
  add_common(pipeline, f);
  add_modulation(pipeline, f);
  add_radiation(pipeline, f);
  add_tracking(pipeline, f);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gs) {
      const PipelineResult r = run_upto(f, "ground_state");
      print_json_map(read_stage(r, "ground_state/ground_state.json"), "ground state");
      if (oracle) {
        const Field q = read_field((fs::path(r.output_dir) / "ground_state" / "Q.hwf").string()).field;
        const GroundState g = solve_gradient_flow_oracle(q.grid);
        std::printf("gradient-flow oracle: residual %.3e, relative difference %.3e\n", g.relative_residual(),
                    aligned_relative_difference(q, g.q));
      }
    } else if (*kernel) {
      const PipelineResult r = run_upto(f, "kernel");
      const json k = read_stage(r, "kernel/inner_products.json");
      print_json_map(k["inner_products"], "inner products");
      print_json_map(k["relation_residuals"], "kernel relations (relative residuals)");
      print_json_map(k["operator_kernel_residuals"], "operator kernel");
      print_json_map(k["coercivity"], "coercivity");
    } else if (*profiles) {
      const PipelineResult r = run_upto(f, "profiles");
      const json p = read_stage(r, "profiles/manifest.json");
      print_json_map(p["constants"], "constants");
      print_json_map(p["identity_residuals"], "identities");
      for (const auto& w : p["warnings"]) std::printf("warning: %s\n", w.get<std::string>().c_str());
    } else if (*modulation) {
      const PipelineResult r = run_upto(f, "modulation");
      for (const auto& run : read_stage(r, "modulation/summary.json")["runs"])
        std::printf("eta %.1e  C0 %.6f  D0 %.4f  lambda(0) %.6e  min b %.3e  nu/lambda drift %.2e  invariant law %.2e\n",
                    run["eta"].get<double>(), run["C0"].get<double>(), run["D0"].get<double>(),
                    run["lambda0"].get<double>(), run["min_b"].get<double>(),
                    run["nu_over_lambda_drift"].get<double>(), run["invariant_law_residual"].get<double>());
      std::printf("plot script: %s/plots/plot_modulation.py\n", r.output_dir.c_str());
    } else if (*radiation) {
      const PipelineResult r = run_upto(f, "radiation");
      const json j = read_stage(r, "radiation/radiation.json");
      const json d = read_stage(r, "radiation/degeneracy.json");
      std::printf("m %d  N %d  residual %.3e  roots %d/%d\n", j["m"].get<int>(), j["n_coeffs"].get<int>(),
                  j["residual"].get<double>(), j["roots_found"].get<int>(), j["restarts_tried"].get<int>());
      std::printf("slopes: z %.3f  grad z %.3f  D z %.3f  ok %s\n", d["slope_z"].get<double>(),
                  d["slope_grad"].get<double>(), d["slope_dz"].get<double>(), d["ok"].dump().c_str());
    } else if (*evolve_cmd) {
      return cmd_evolve(f, ef);
    } else if (*track) {
      const PipelineResult r = run_upto(f, "tracking");
      for (const auto& s : read_stage(r, "tracking/summary.json"))
        std::printf("eta %.1e  ok %s  basin lost %s  lambda rel. error at t1 %.3e  max eps/bound %.3f  (%.1f s)\n",
                    s["eta"].get<double>(), s["ok"].dump().c_str(), s["basin_lost"].dump().c_str(),
                    s["lambda_rel_error_end"].get<double>(), s["max_eps_ratio"].get<double>(),
                    s["runtime_seconds"].get<double>());
    } else if (*report) {
      const ConstantsTable t = report_constants(report_dir);
      std::fputs(t.text().c_str(), stdout);
      std::ofstream(fs::path(report_dir) / "constants.csv") << t.csv();
      write_json((fs::path(report_dir) / "constants.json").string(), t.to_json());
    } else if (*pipeline) {
      ExperimentConfig c = make_config(f);
      const PipelineResult r = run_pipeline(c);
      std::printf("output: %s\n", r.output_dir.c_str());
      for (const auto& s : r.completed) std::printf("  computed %s\n", s.c_str());
      for (const auto& s : r.reused) std::printf("  reused   %s\n", s.c_str());
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
