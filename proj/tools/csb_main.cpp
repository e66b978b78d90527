#include <CLI11.hpp>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "csb/config.hpp"
#include "csb/experiments.hpp"
#include "csb/init.hpp"
#include "csb/integrator.hpp"
#include "csb/output.hpp"

namespace fs = std::filesystem;
using namespace csb;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCertificate = 1;
constexpr int kExitAbort = 2;
constexpr int kExitConfig = 3;

struct Overrides {
  std::optional<int> n, dim;
  std::optional<std::uint64_t> seed;
  std::optional<double> t_end, sample_every, alpha, k1, k2, k_tilde, big_r;
  std::optional<std::string> kernel, model, out;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--n", ov.n, "particle count");
  cmd->add_option("--dim", ov.dim, "space dimension");
  cmd->add_option("--seed", ov.seed, "RNG seed");
  cmd->add_option("--t-end", ov.t_end, "integration horizon");
  cmd->add_option("--sample-every", ov.sample_every, "sampling cadence");
  cmd->add_option("--kernel", ov.kernel, "communication weight")
      ->check(CLI::IsMember({"singular", "regular"}));
  cmd->add_option("--alpha", ov.alpha, "kernel exponent");
  cmd->add_option("--model", ov.model, "force variant")
      ->check(CLI::IsMember({"original", "simplified"}));
  cmd->add_option("--k1", ov.k1, "alignment strength");
  cmd->add_option("--k2", ov.k2, "bonding strength");
  cmd->add_option("--k-tilde", ov.k_tilde, "projection strength");
  cmd->add_option("--big-r", ov.big_r, "bonding half-distance R");
  cmd->add_option("--out", ov.out, "output directory root");
}

void apply_overrides(RunConfig& cfg, const Overrides& ov) {
  if (ov.n) {
    cfg.init.n = *ov.n;
    cfg.params.n = *ov.n;
  }
  if (ov.dim) {
    const int d = *ov.dim;
    if (d < 1) throw ConfigError("--dim", "must be >= 1");
    // rebroadcast the first axis interval over the new dimension
    if (!cfg.init.pos_box.empty())
      cfg.init.pos_box =
          uniform_box(cfg.init.pos_box[0].lo, cfg.init.pos_box[0].hi, d);
    if (!cfg.init.vel_box.empty())
      cfg.init.vel_box =
          uniform_box(cfg.init.vel_box[0].lo, cfg.init.vel_box[0].hi, d);
    cfg.init.dim = d;
    cfg.params.dim = d;
  }
  if (ov.seed) cfg.init.seed = *ov.seed;
  if (ov.t_end) cfg.t_end = *ov.t_end;
  if (ov.sample_every) cfg.sample_every = *ov.sample_every;
  if (ov.kernel)
    cfg.params.kernel.kind = (*ov.kernel == "singular")
                                 ? KernelKind::Singular
                                 : KernelKind::Regular;
  if (ov.alpha) cfg.params.kernel.alpha = *ov.alpha;
  if (ov.model)
    cfg.params.variant = (*ov.model == "original") ? ModelVariant::Original
                                                   : ModelVariant::Simplified;
  if (ov.k1) cfg.params.k1 = *ov.k1;
  if (ov.k2) cfg.params.k2 = *ov.k2;
  if (ov.k_tilde) cfg.params.k_tilde = *ov.k_tilde;
  if (ov.big_r) cfg.params.big_r = *ov.big_r;
  if (ov.out) cfg.output_dir = *ov.out;
}

// CSB_OUTPUT_ROOT replaces the configured root; CSB_THREADS picks the
// parallel force kernel with that many threads. No other environment input.
void apply_env(RunConfig& cfg) {
  if (const char* root = std::getenv("CSB_OUTPUT_ROOT")) {
    if (*root) cfg.output_dir = root;
  }
  if (const char* threads = std::getenv("CSB_THREADS")) {
    char* end = nullptr;
    const long k = std::strtol(threads, &end, 10);
    if (end == threads || *end != '\0' || k < 1)
      throw ConfigError("CSB_THREADS", "must be a positive integer");
#ifdef _OPENMP
    omp_set_num_threads(static_cast<int>(k));
#endif
    cfg.ctl.exec = Exec::Parallel;
  }
}

void validate_with_paths(const RunConfig& cfg) {
  try {
    cfg.init.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("init", e.what());
  }
  try {
    cfg.params.kernel.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model.alpha", e.what());
  }
  try {
    cfg.params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model", e.what());
  }
  try {
    cfg.ctl.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("step", e.what());
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("run", e.what());
  }
}

void print_trajectory_line(const Trajectory& traj) {
  std::cout << "status: " << status_name(traj.status)
            << "  samples: " << traj.samples.size();
  if (!traj.samples.empty())
    std::cout << "  t: [" << traj.samples.front().t << ", "
              << traj.samples.back().t << "]";
  std::cout << "\n";
  for (const Event& ev : traj.events)
    std::cout << "event: " << event_kind_name(ev.kind) << " at t = " << ev.t
              << "\n";
}

int cmd_simulate(const std::string& config_path, const Overrides& ov) {
  RunConfig cfg = load_config_file(config_path);
  apply_overrides(cfg, ov);
  apply_env(cfg);
  validate_with_paths(cfg);

  SimState s0 = galilean_normalize(sample_initial(cfg.init));
  Trajectory traj =
      integrate(s0, cfg.params, cfg.ctl, cfg.t_end, cfg.sample_every);
  std::optional<Certificates> cert;
  if (!traj.samples.empty())
    cert = certificates(traj.samples, cfg.params);

  const fs::path dir =
      fs::path(cfg.output_dir) /
      results_dir_name(cfg.scenario.value_or("run"), cfg.init.seed,
                       std::time(nullptr));
  write_outputs(traj, cert, cfg, dir);
  std::cout << "results: " << dir.string() << "\n";
  print_trajectory_line(traj);

  if (!traj.completed()) {
    std::cerr << "simulation aborted: " << status_name(traj.status) << "\n";
    return kExitAbort;
  }
  VerifyReport rep = verify_results(dir);
  if (!rep.ok()) {
    for (const std::string& f : rep.failures)
      std::cerr << "certificate failure: " << f << "\n";
    return kExitCertificate;
  }
  std::cout << "certificates: ok\n";
  return kExitOk;
}

int cmd_scenario(const std::string& name, const Overrides& ov) {
  std::vector<const Scenario*> list = resolve_scenarios(name);
  if (list.empty())
    throw ConfigError("scenario", "unknown scenario '" + name +
                                      "'; known names start with fig1, "
                                      "fig2, fig3, fig5");
  RunConfig env_probe;  // only to pick up the env output root and threads
  env_probe.output_dir = ov.out.value_or("results");
  apply_env(env_probe);
  const fs::path root = env_probe.output_dir;
  const std::time_t now = std::time(nullptr);

  const bool family = list.size() > 1;
  const std::uint64_t family_seed = ov.seed.value_or(list[0]->init.seed);
  const fs::path base =
      family ? root / results_dir_name(name, family_seed, now) : root;

  bool any_fail = false;
  bool abort_fail = false;
  for (const Scenario* member : list) {
    Scenario sc_run = *member;
    if (ov.t_end) sc_run.t_end = *ov.t_end;
    if (ov.sample_every) sc_run.sample_every = *ov.sample_every;
    const Scenario* sc = &sc_run;
    const std::uint64_t seed = ov.seed.value_or(sc->init.seed);
    ScenarioRun run = run_scenario(*sc, seed);

    RunConfig cfg = scenario_config(*sc);
    cfg.init.seed = seed;
    cfg.ctl = env_probe.ctl;  // thread choice applies to the run's echo
    const fs::path dir =
        family ? base / sc->name
               : base / results_dir_name(sc->name, seed, now);
    cfg.output_dir = dir.string();
    write_outputs(run.traj, run.cert, cfg, dir);

    std::cout << "scenario " << sc->name << " seed " << seed << "\n";
    std::cout << "results: " << dir.string() << "\n";
    print_trajectory_line(run.traj);
    std::vector<CheckResult> res = evaluate_scenario(run);
    bool scenario_fail = false;
    for (const CheckResult& r : res) {
      std::cout << "[" << sc->name << "] " << r.name << ": "
                << (r.pass ? "pass" : "FAIL") << " (" << r.detail << ")\n";
      scenario_fail |= !r.pass;
    }
    any_fail |= scenario_fail;
    abort_fail |= scenario_fail && !run.traj.completed();
  }
  if (abort_fail) return kExitAbort;
  if (any_fail) return kExitCertificate;
  std::cout << "overall: pass\n";
  return kExitOk;
}

int cmd_verify(const std::string& dir) {
  VerifyReport rep = verify_results(dir);
  if (!rep.ok()) {
    for (const std::string& f : rep.failures)
      std::cerr << "verify failure: " << f << "\n";
    return kExitCertificate;
  }
  std::cout << "verify: ok\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cucker-Smale flocking with bonding force: simulation and "
               "diagnostics"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides sim_ov;
  CLI::App* sim = app.add_subcommand("simulate", "run one configured system");
  sim->add_option("config", config_path, "config file path")->required();
  add_override_flags(sim, sim_ov);

  std::string scenario_name;
  Overrides sc_ov;
  CLI::App* sc =
      app.add_subcommand("scenario", "run a named study (or a family)");
  sc->add_option("name", scenario_name, "scenario or family name")
      ->required();
  sc->add_option("--seed", sc_ov.seed, "RNG seed override");
  sc->add_option("--out", sc_ov.out, "output directory root");
  sc->add_option("--t-end", sc_ov.t_end, "horizon override (smoke runs)");
  sc->add_option("--sample-every", sc_ov.sample_every, "cadence override");

  std::string verify_dir;
  CLI::App* ver =
      app.add_subcommand("verify", "re-evaluate a results directory");
  ver->add_option("dir", verify_dir, "results directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, sim_ov);
    if (sc->parsed()) return cmd_scenario(scenario_name, sc_ov);
    if (ver->parsed()) return cmd_verify(verify_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
