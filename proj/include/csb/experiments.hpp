#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csb/config.hpp"
#include "csb/diagnostics.hpp"
#include "csb/integrator.hpp"

namespace csb {

// A named, seed-fixed run setup together with the checks that gate it.
// Constants the model leaves free default to K1 = K2 = Kt = 1 and alpha = 1;
// every scenario fixes seed 42 so reruns are bit-reproducible.
struct Scenario {
  std::string name;
  InitConfig init{};
  ModelParams params{};
  StepControl ctl{};
  double t_end = 500.0;
  double sample_every = 0.5;
  std::vector<std::string> acceptance;  // check names, see evaluate_scenario
};

// The registered suite:
//   fig1_n10 / fig1_n15 / fig1_n20 / fig1_n25
//       flock formation: simplified variant, singular kernel, d = 2,
//       positions and velocities uniform in [-5,5]^2, R = 2, horizon 500;
//       gated on containment near the 2R-ball, small equilibrium residual,
//       and velocity decay.
//   fig2_original_singular / fig2_original_regular /
//   fig2_simplified_singular / fig2_simplified_regular
//       energy dissipation: the 2x2 variant/kernel grid on identical
//       initial data (same seed), N = 10, d = 2, R = 2; gated on monotone
//       total energy and kinetic decay to 1e-3 of its start.
//   fig3_singular / fig3_regular
//       collision dichotomy in d = 1: positions uniform in [-5,5],
//       velocities in [-2,2], R = 0.5, horizon 50, densely sampled; the
//       singular kernel must keep a positive minimal distance, the regular
//       kernel must show a near-zero crossing (some sample r_min < 1e-3).
//   fig5
//       velocity decay envelope on the fig1_n10 setup: emits t^1.5 * v_max
//       and checks the tail stays under the early envelope.
const std::vector<Scenario>& scenario_suite();

// Exact name match, or nullptr.
const Scenario* find_scenario(const std::string& name);

// Exact match first, else every scenario whose name starts with "<name>_";
// empty result means the name is unknown.
std::vector<const Scenario*> resolve_scenarios(const std::string& name);

// The scenario as a run configuration (output_dir left at its default).
RunConfig scenario_config(const Scenario& sc);

struct ScenarioRun {
  Scenario scenario;
  SimState initial;  // after centering
  Trajectory traj;
  std::optional<Certificates> cert;  // absent iff no sample was produced
};

// sample -> center -> integrate, seed from the scenario (or overridden).
ScenarioRun run_scenario(const Scenario& sc);
ScenarioRun run_scenario(const Scenario& sc, std::uint64_t seed_override);

// Integrate from caller-supplied initial data instead of sampling.
ScenarioRun run_scenario_from(const Scenario& sc, const SimState& s0);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // the measured quantity versus its threshold
};

// Pure functions of the emitted series; re-evaluating saved output gives
// identical verdicts. Registered checks:
//   completed             run finished without an abort
//   containment_final     at the last sample, |x_i| <= 1.05 * 2R and
//                         r_ij <= 1.05 * 4R for all i, j
//   equilibrium_residual  certificate residual <= 1e-2 * N * R
//   velocity_decay        max v_max over t in [t_end/10, t_end]
//                         <= 1e-2 * v_max at the first sample
//   energy_monotone       e_tot never increases between consecutive samples
//                         beyond 1e-8 * max(1, |e_tot(0)|)
//   kinetic_decay         e_kin(last) <= 1e-3 * e_kin(first)
//   min_distance_positive completed, and min over samples of r_min > 0
//   near_zero_crossing    some sample has r_min < 1e-3
//   envelope_bounded      C = max of t^1.5 * v_max over [10, t_end] is
//                         finite and bounds the tail [t_end/2, t_end]
//   envelope_decay        max of t^1.5 * v_max over [t_end/2, t_end]
//                         <= the same max over [10, 50]
CheckResult evaluate_check(const std::string& name, const ScenarioRun& run);

// All checks in run.scenario.acceptance, in order.
std::vector<CheckResult> evaluate_scenario(const ScenarioRun& run);

bool all_pass(const std::vector<CheckResult>& results);

// (t, v_max, t^1.5 * v_max) rows for the envelope study.
struct EnvelopePoint {
  double t;
  double v_max;
  double weighted;
};
std::vector<EnvelopePoint> envelope_series(const ScenarioRun& run);

}  // namespace csb
