#include <doctest.h>

#include <cmath>
#include <set>
#include <string>

#include "csb/experiments.hpp"
#include "csb/init.hpp"

using namespace csb;

namespace {

// the fig1_n10 setup shrunk to a cheap horizon
Scenario short_fig1(double t_end, double cadence) {
  Scenario sc = *find_scenario("fig1_n10");
  sc.t_end = t_end;
  sc.sample_every = cadence;
  return sc;
}

// two bodies resting at the bonding equilibrium r = 2R
ScenarioRun equilibrium_run(double t_end) {
  Scenario sc = short_fig1(t_end, 0.5);
  sc.name = "equilibrium_pair";
  sc.init.n = 2;
  sc.init.dim = 2;
  sc.params.n = 2;
  sc.params.dim = 2;
  sc.acceptance = {"completed",        "containment_final",
                   "equilibrium_residual", "velocity_decay",
                   "energy_monotone",  "kinetic_decay",
                   "min_distance_positive", "envelope_bounded",
                   "envelope_decay"};
  SimState s0(2, 2);
  s0.px(0, 0) = 2.0;  // r = 4 = 2R
  s0.px(1, 0) = -2.0;
  return run_scenario_from(sc, s0);
}

}  // namespace

TEST_CASE("suite registry") {
  const std::vector<Scenario>& suite = scenario_suite();
  CHECK(suite.size() == 11);
  std::set<std::string> names;
  for (const Scenario& sc : suite) {
    CHECK(names.insert(sc.name).second);  // unique
    CHECK_NOTHROW(scenario_config(sc).validate());
  }

  CHECK(find_scenario("fig1_n10") != nullptr);
  CHECK(find_scenario("fig9") == nullptr);
  CHECK(resolve_scenarios("fig1").size() == 4);
  CHECK(resolve_scenarios("fig2").size() == 4);
  CHECK(resolve_scenarios("fig3").size() == 2);
  CHECK(resolve_scenarios("fig5").size() == 1);
  CHECK(resolve_scenarios("nope").empty());

  SUBCASE("flock sizes cover 10..25") {
    for (int n : {10, 15, 20, 25}) {
      const Scenario* sc =
          find_scenario("fig1_n" + std::to_string(n));
      REQUIRE(sc != nullptr);
      CHECK(sc->init.n == n);
      CHECK(sc->params.n == n);
      CHECK(sc->params.big_r == 2.0);
      CHECK(sc->t_end == 500.0);
    }
  }

  SUBCASE("energy grid shares one set of initial data") {
    std::vector<const Scenario*> grid = resolve_scenarios("fig2");
    for (const Scenario* sc : grid) {
      CHECK(sc->init == grid[0]->init);  // same seed, same boxes
      CHECK(sc->t_end == 500.0);
    }
    CHECK(find_scenario("fig2_original_singular")->params.variant ==
          ModelVariant::Original);
    CHECK(find_scenario("fig2_simplified_regular")->params.kernel.kind ==
          KernelKind::Regular);
  }

  SUBCASE("dichotomy pair differs only in the kernel") {
    const Scenario* s = find_scenario("fig3_singular");
    const Scenario* r = find_scenario("fig3_regular");
    REQUIRE(s != nullptr);
    REQUIRE(r != nullptr);
    CHECK(s->init == r->init);
    CHECK(s->init.dim == 1);
    CHECK(s->init.vel_box[0] == Interval{-2.0, 2.0});
    CHECK(s->params.kernel.kind == KernelKind::Singular);
    CHECK(r->params.kernel.kind == KernelKind::Regular);
    CHECK(r->acceptance == std::vector<std::string>{"near_zero_crossing"});
  }
}

TEST_CASE("scenario config echoes the scenario") {
  const Scenario* sc = find_scenario("fig3_singular");
  RunConfig cfg = scenario_config(*sc);
  CHECK(cfg.scenario == sc->name);
  CHECK(cfg.init == sc->init);
  CHECK(cfg.params == sc->params);
  CHECK(cfg.t_end == 50.0);
  CHECK(cfg.sample_every == 1e-3);
}

TEST_CASE("seeded runs are bit-reproducible") {
  Scenario sc = short_fig1(2.0, 0.5);
  ScenarioRun a = run_scenario(sc);
  ScenarioRun b = run_scenario(sc);
  REQUIRE(a.traj.completed());
  REQUIRE(a.traj.samples.size() == b.traj.samples.size());
  for (size_t k = 0; k < a.traj.samples.size(); ++k) {
    CHECK(a.traj.samples[k].state.x == b.traj.samples[k].state.x);
    CHECK(a.traj.samples[k].state.v == b.traj.samples[k].state.v);
  }
  REQUIRE(a.cert.has_value());
  CHECK(a.cert->velocity_integral == b.cert->velocity_integral);

  ScenarioRun c = run_scenario(sc, 43);  // another seed, another path
  CHECK(c.traj.samples[0].state.x != a.traj.samples[0].state.x);
}

TEST_CASE("equilibrium initial data passes every gate vacuously") {
  ScenarioRun run = equilibrium_run(20.0);
  REQUIRE(run.traj.completed());
  std::vector<CheckResult> res = evaluate_scenario(run);
  REQUIRE(res.size() == run.scenario.acceptance.size());
  for (size_t k = 0; k < res.size(); ++k) {
    CHECK(res[k].name == run.scenario.acceptance[k]);
    CHECK_MESSAGE(res[k].pass, res[k].name, ": ", res[k].detail);
  }
  CHECK(all_pass(res));

  SUBCASE("near-zero crossing is correctly rejected here") {
    CheckResult cross = evaluate_check("near_zero_crossing", run);
    CHECK(!cross.pass);  // the pair never leaves r = 4
  }

  SUBCASE("envelope series is identically zero") {
    std::vector<EnvelopePoint> env = envelope_series(run);
    REQUIRE(env.size() == run.traj.samples.size());
    for (const EnvelopePoint& pt : env) {
      CHECK(pt.v_max == 0.0);
      CHECK(pt.weighted == 0.0);
    }
  }
}

TEST_CASE("zero coupling conserves total energy") {
  // with both dissipation channels off the system is Hamiltonian; the
  // sampled e_tot may drift only by integrator error
  Scenario sc = short_fig1(5.0, 0.25);
  sc.name = "conservative";
  sc.init.n = 4;
  sc.params.n = 4;
  sc.params.k1 = 0.0;
  sc.params.k_tilde = 0.0;
  sc.params.kernel.kind = KernelKind::Regular;
  ScenarioRun run = run_scenario(sc);
  REQUIRE(run.traj.completed());
  const double e0 = run.traj.samples.front().energy.e_tot;
  for (const Sample& smp : run.traj.samples) {
    CHECK(std::abs(smp.energy.e_tot - e0) <= 1e-8 * std::max(1.0, e0));
    CHECK(smp.energy.dissipation == 0.0);
  }
}

TEST_CASE("symmetric head-on pair under a singular kernel") {
  // distance dips toward the bonding length and recovers without touching
  Scenario sc;
  sc.name = "headon";
  sc.init.n = 2;
  sc.init.dim = 1;
  sc.params.variant = ModelVariant::Simplified;
  sc.params.kernel = {KernelKind::Singular, 1.0};
  sc.params.big_r = 1.0;
  sc.params.n = 2;
  sc.params.dim = 1;
  sc.t_end = 10.0;
  sc.sample_every = 0.01;
  SimState s0(2, 1);
  s0.px(0, 0) = 2.0;
  s0.px(1, 0) = -2.0;  // r = 4, twice the bonding length
  s0.pv(0, 0) = -1.0;
  s0.pv(1, 0) = 1.0;  // closing speed 2
  ScenarioRun run = run_scenario_from(sc, s0);
  REQUIRE(run.traj.completed());

  const std::vector<Sample>& smp = run.traj.samples;
  size_t at = 0;
  double rmin = smp[0].distance.r_min;
  for (size_t k = 0; k < smp.size(); ++k)
    if (smp[k].distance.r_min < rmin) {
      rmin = smp[k].distance.r_min;
      at = k;
    }
  CHECK(rmin > 0.0);
  CHECK(at > 0);                  // it approaches first...
  CHECK(at + 1 < smp.size());     // ...then separates again
  CHECK(smp[1].distance.r_min < smp[0].distance.r_min);
  CHECK(smp.back().distance.r_min > rmin);
  CHECK(evaluate_check("min_distance_positive", run).pass);
}

TEST_CASE("aborted run fails its gates with named details") {
  Scenario sc;
  sc.name = "engineered_collision";
  sc.init.n = 2;
  sc.init.dim = 1;
  sc.params.n = 2;
  sc.params.dim = 1;
  sc.params.k1 = 0.0;
  sc.params.k2 = 0.0;  // free streaming straight through the origin
  sc.t_end = 2.0;
  sc.sample_every = 0.1;
  sc.acceptance = {"completed", "min_distance_positive"};
  SimState s0(2, 1);
  s0.px(0, 0) = 0.5;
  s0.px(1, 0) = -0.5;
  s0.pv(0, 0) = -0.5;
  s0.pv(1, 0) = 0.5;
  ScenarioRun run = run_scenario_from(sc, s0);
  REQUIRE(!run.traj.completed());
  std::vector<CheckResult> res = evaluate_scenario(run);
  CHECK(!all_pass(res));
  CHECK(!res[0].pass);
  CHECK(res[0].detail.find("aborted") != std::string::npos);
}

TEST_CASE("unknown check name is rejected") {
  ScenarioRun run = equilibrium_run(1.0);
  CHECK_THROWS_AS(evaluate_check("no_such_gate", run),
                  std::invalid_argument);
}
