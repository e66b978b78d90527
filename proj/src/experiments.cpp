#include "csb/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "csb/init.hpp"

namespace csb {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Scenario fig1(int n) {
  Scenario sc;
  sc.name = "fig1_n" + std::to_string(n);
  sc.init.n = n;
  sc.init.dim = 2;
  sc.init.seed = 42;
  sc.init.pos_box = uniform_box(-5.0, 5.0, 2);
  sc.init.vel_box = uniform_box(-5.0, 5.0, 2);
  sc.params.variant = ModelVariant::Simplified;
  sc.params.kernel = {KernelKind::Singular, 1.0};
  sc.params.big_r = 2.0;
  sc.params.n = n;
  sc.params.dim = 2;
  sc.t_end = 500.0;
  sc.sample_every = 0.5;
  sc.acceptance = {"completed", "containment_final", "equilibrium_residual",
                   "velocity_decay"};
  return sc;
}

Scenario fig2(ModelVariant variant, KernelKind kind) {
  Scenario sc;
  sc.name = std::string("fig2_") +
            (variant == ModelVariant::Original ? "original" : "simplified") +
            "_" + (kind == KernelKind::Singular ? "singular" : "regular");
  sc.init.n = 10;
  sc.init.dim = 2;
  sc.init.seed = 42;  // identical initial data across the 2x2 grid
  sc.init.pos_box = uniform_box(-5.0, 5.0, 2);
  sc.init.vel_box = uniform_box(-5.0, 5.0, 2);
  sc.params.variant = variant;
  sc.params.kernel = {kind, 1.0};
  sc.params.big_r = 2.0;
  sc.params.n = 10;
  sc.params.dim = 2;
  sc.t_end = 500.0;
  sc.sample_every = 0.5;
  sc.acceptance = {"completed", "energy_monotone", "kinetic_decay"};
  return sc;
}

Scenario fig3(KernelKind kind) {
  Scenario sc;
  sc.name = std::string("fig3_") +
            (kind == KernelKind::Singular ? "singular" : "regular");
  sc.init.n = 10;
  sc.init.dim = 1;
  sc.init.seed = 42;
  sc.init.pos_box = uniform_box(-5.0, 5.0, 1);
  sc.init.vel_box = uniform_box(-2.0, 2.0, 1);
  sc.params.variant = ModelVariant::Simplified;
  sc.params.kernel = {kind, 1.0};
  sc.params.big_r = 0.5;
  sc.params.n = 10;
  sc.params.dim = 1;
  sc.t_end = 50.0;
  sc.sample_every = 1e-3;  // dense enough to catch crossings
  if (kind == KernelKind::Singular)
    sc.acceptance = {"completed", "min_distance_positive"};
  else
    sc.acceptance = {"near_zero_crossing"};
  return sc;
}

Scenario fig5() {
  Scenario sc = fig1(10);
  sc.name = "fig5";
  sc.acceptance = {"completed", "envelope_bounded", "envelope_decay"};
  return sc;
}

std::vector<Scenario> build_suite() {
  std::vector<Scenario> suite;
  for (int n : {10, 15, 20, 25}) suite.push_back(fig1(n));
  for (ModelVariant v : {ModelVariant::Original, ModelVariant::Simplified})
    for (KernelKind k : {KernelKind::Singular, KernelKind::Regular})
      suite.push_back(fig2(v, k));
  suite.push_back(fig3(KernelKind::Singular));
  suite.push_back(fig3(KernelKind::Regular));
  suite.push_back(fig5());
  return suite;
}

// max of f over samples with t in [lo, hi]; 0 when the window is empty
template <class F>
double window_max(const std::vector<Sample>& samples, double lo, double hi,
                  F&& f) {
  double m = 0.0;
  for (const Sample& smp : samples)
    if (smp.t >= lo && smp.t <= hi) m = std::max(m, f(smp));
  return m;
}

CheckResult make(const std::string& name, bool pass, std::string detail) {
  return CheckResult{name, pass, std::move(detail)};
}

}  // namespace

const std::vector<Scenario>& scenario_suite() {
  static const std::vector<Scenario> suite = build_suite();
  return suite;
}

const Scenario* find_scenario(const std::string& name) {
  for (const Scenario& sc : scenario_suite())
    if (sc.name == name) return &sc;
  return nullptr;
}

std::vector<const Scenario*> resolve_scenarios(const std::string& name) {
  if (const Scenario* sc = find_scenario(name)) return {sc};
  std::vector<const Scenario*> out;
  for (const Scenario& sc : scenario_suite())
    if (sc.name.rfind(name + "_", 0) == 0) out.push_back(&sc);
  return out;
}

RunConfig scenario_config(const Scenario& sc) {
  RunConfig cfg;
  cfg.init = sc.init;
  cfg.params = sc.params;
  cfg.ctl = sc.ctl;
  cfg.t_end = sc.t_end;
  cfg.sample_every = sc.sample_every;
  cfg.scenario = sc.name;
  return cfg;
}

ScenarioRun run_scenario_from(const Scenario& sc, const SimState& s0) {
  ScenarioRun run;
  run.scenario = sc;
  run.initial = s0;
  run.traj = integrate(s0, sc.params, sc.ctl, sc.t_end, sc.sample_every);
  if (!run.traj.samples.empty())
    run.cert = certificates(run.traj.samples, sc.params);
  return run;
}

ScenarioRun run_scenario(const Scenario& sc, std::uint64_t seed_override) {
  Scenario seeded = sc;
  seeded.init.seed = seed_override;
  return run_scenario_from(seeded,
                           galilean_normalize(sample_initial(seeded.init)));
}

ScenarioRun run_scenario(const Scenario& sc) {
  return run_scenario(sc, sc.init.seed);
}

std::vector<EnvelopePoint> envelope_series(const ScenarioRun& run) {
  std::vector<EnvelopePoint> out;
  out.reserve(run.traj.samples.size());
  for (const Sample& smp : run.traj.samples) {
    const double w = std::pow(smp.t, 1.5) * smp.distance.v_max;
    out.push_back({smp.t, smp.distance.v_max, w});
  }
  return out;
}

CheckResult evaluate_check(const std::string& name, const ScenarioRun& run) {
  const std::vector<Sample>& samples = run.traj.samples;
  const ModelParams& p = run.scenario.params;
  const double t_end = run.scenario.t_end;

  if (name == "completed") {
    return make(name, run.traj.completed(),
                std::string("status ") + (run.traj.completed()
                                              ? "completed"
                                              : "aborted before the horizon"));
  }
  if (samples.empty())
    return make(name, false, "no samples were produced");

  if (name == "containment_final") {
    const double slack = 0.05 * 2.0 * p.big_r;
    ContainmentResult res =
        containment_check(samples.back().state, p, slack);
    return make(name,
                run.traj.completed() && res.ok(),
                fmt(double(res.radius_violations.size())) +
                    " radius and " + fmt(double(res.pair_violations.size())) +
                    " pair violations at t = " + fmt(samples.back().t) +
                    " with slack " + fmt(slack));
  }
  if (name == "equilibrium_residual") {
    if (!run.cert) return make(name, false, "no certificates");
    const double bound = 1e-2 * p.n * p.big_r;
    return make(name, run.cert->equilibrium_residual <= bound,
                "residual " + fmt(run.cert->equilibrium_residual) +
                    " versus bound " + fmt(bound));
  }
  if (name == "velocity_decay") {
    const double v0 = samples.front().distance.v_max;
    const double late = window_max(
        samples, t_end / 10.0, t_end,
        [](const Sample& s) { return s.distance.v_max; });
    return make(name, late <= 1e-2 * v0,
                "late max " + fmt(late) + " versus 1e-2 * v_max(0) = " +
                    fmt(1e-2 * v0));
  }
  if (name == "energy_monotone") {
    const double eps =
        1e-8 * std::max(1.0, std::abs(samples.front().energy.e_tot));
    double worst = -1.0;
    size_t at = 0;
    for (size_t k = 1; k < samples.size(); ++k) {
      const double rise =
          samples[k].energy.e_tot - samples[k - 1].energy.e_tot;
      if (rise > worst) {
        worst = rise;
        at = k;
      }
    }
    return make(name, worst <= eps,
                "largest rise " + fmt(worst) + " at sample " +
                    std::to_string(at) + " versus eps " + fmt(eps));
  }
  if (name == "kinetic_decay") {
    const double k0 = samples.front().energy.e_kin;
    const double kT = samples.back().energy.e_kin;
    return make(name, kT <= 1e-3 * k0,
                "e_kin(end) " + fmt(kT) + " versus 1e-3 * e_kin(0) = " +
                    fmt(1e-3 * k0));
  }
  if (name == "min_distance_positive") {
    MinDistance md = min_distance_over(samples);
    return make(name, run.traj.completed() && md.global_min > 0.0,
                "global min " + fmt(md.global_min) + " at t = " +
                    fmt(md.t_at_min));
  }
  if (name == "near_zero_crossing") {
    MinDistance md = min_distance_over(samples);
    return make(name, md.global_min < 1e-3,
                "global min " + fmt(md.global_min) + " at t = " +
                    fmt(md.t_at_min) + " versus 1e-3");
  }
  if (name == "envelope_bounded") {
    const double c =
        window_max(samples, 10.0, t_end, [](const Sample& s) {
          return std::pow(s.t, 1.5) * s.distance.v_max;
        });
    bool tail_ok = true;
    for (const Sample& smp : samples)
      if (smp.t >= t_end / 2.0 &&
          std::pow(smp.t, 1.5) * smp.distance.v_max > c * (1.0 + 1e-12))
        tail_ok = false;
    return make(name, std::isfinite(c) && tail_ok,
                "envelope C = " + fmt(c) + " over [10, " + fmt(t_end) + "]");
  }
  if (name == "envelope_decay") {
    auto weighted = [](const Sample& s) {
      return std::pow(s.t, 1.5) * s.distance.v_max;
    };
    const double early = window_max(samples, 10.0, std::min(50.0, t_end),
                                    weighted);
    const double tail = window_max(samples, t_end / 2.0, t_end, weighted);
    return make(name, tail <= early,
                "tail max " + fmt(tail) + " versus early max " + fmt(early));
  }
  throw std::invalid_argument("unknown check: " + name);
}

std::vector<CheckResult> evaluate_scenario(const ScenarioRun& run) {
  std::vector<CheckResult> out;
  out.reserve(run.scenario.acceptance.size());
  for (const std::string& name : run.scenario.acceptance)
    out.push_back(evaluate_check(name, run));
  return out;
}

bool all_pass(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.pass; });
}

}  // namespace csb
