#include "csb/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace csb {

void StepControl::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
    throw std::invalid_argument("ctl: tolerances must be positive");
  if (!(0.0 < dt_min && dt_min <= dt_init && dt_init <= dt_max))
    throw std::invalid_argument("ctl: need 0 < dt_min <= dt_init <= dt_max");
  if (!(proximity_factor > 0.0 && proximity_factor <= 1.0))
    throw std::invalid_argument("ctl: proximity_factor must be in (0,1]");
  if (!(r_floor >= 0.0))
    throw std::invalid_argument("ctl: r_floor must be nonnegative");
}

CollisionAbortError::CollisionAbortError(double t_, int i_, int j_, double r_)
    : std::runtime_error("collision abort at t = " + std::to_string(t_) +
                         ": pair (" + std::to_string(i_) + "," +
                         std::to_string(j_) + "), r = " + std::to_string(r_)),
      t(t_), i(i_), j(j_), r(r_) {}

StiffnessAbortError::StiffnessAbortError(double t_, double min_r_)
    : std::runtime_error("step size underflow at t = " + std::to_string(t_) +
                         " (min r = " + std::to_string(min_r_) + ")"),
      t(t_), min_r(min_r_) {}

namespace {

// Dormand-Prince 5(4) tableau. The 5th-order solution (row a7) is
// propagated; e holds the embedded-difference coefficients.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kShrinkFloor = 0.2;
constexpr double kGrowCap = 5.0;
constexpr double kNearCollisionWarn = 1e-3;
constexpr int kMaxAttempts = 200;

// y = base + h * (sum of c[q] * k[q]), positions and velocities together
SimState combine(const SimState& base, double h, const double* c,
                 const Derivative* k, int m) {
  SimState out = base;
  for (int q = 0; q < m; ++q) {
    if (c[q] == 0.0) continue;
    const double hc = h * c[q];
    for (size_t idx = 0; idx < out.x.size(); ++idx) {
      out.x[idx] += hc * k[q].dx[idx];
      out.v[idx] += hc * k[q].dv[idx];
    }
  }
  return out;
}

double max_abs_component(const SimState& s) {
  double m = 0.0;
  for (double c : s.x) m = std::max(m, std::abs(c));
  for (double c : s.v) m = std::max(m, std::abs(c));
  return m;
}

double max_pair_speed(const SimState& s) {
  double m = 0.0;
  for (int i = 0; i < s.n; ++i)
    for (int j = i + 1; j < s.n; ++j) {
      double d2 = 0.0;
      for (int k = 0; k < s.dim; ++k) {
        const double dv = s.pv(i, k) - s.pv(j, k);
        d2 += dv * dv;
      }
      m = std::max(m, d2);
    }
  return std::sqrt(m);
}

struct AttemptResult {
  SimState state;
  double err;           // max-abs embedded difference; inf if a stage hit
                        // the singularity floor
};

AttemptResult attempt(const SimState& s, const ModelParams& p,
                      const StepControl& ctl, double h, const Derivative& k1) {
  std::array<Derivative, 7> k;
  k[0] = k1;
  auto stage = [&](int q, const double* row) {
    SimState y = combine(s, h, row, k.data(), q);
    eval_rhs(y, p, k[q], ctl.r_floor, ctl.exec);
  };
  try {
    const double r2[] = {a21};
    const double r3[] = {a31, a32};
    const double r4[] = {a41, a42, a43};
    const double r5[] = {a51, a52, a53, a54};
    const double r6[] = {a61, a62, a63, a64, a65};
    const double r7[] = {a71, 0.0, a73, a74, a75, a76};
    stage(1, r2);
    stage(2, r3);
    stage(3, r4);
    stage(4, r5);
    stage(5, r6);
    AttemptResult res;
    res.state = combine(s, h, r7, k.data(), 6);  // 5th-order solution
    res.state.t = s.t + h;
    eval_rhs(res.state, p, k[6], ctl.r_floor, ctl.exec);
    const double ec[] = {e1, 0.0, e3, e4, e5, e6, e7};
    double err = 0.0;
    for (size_t idx = 0; idx < s.x.size(); ++idx) {
      double dx = 0.0, dv = 0.0;
      for (int q = 0; q < 7; ++q) {
        if (ec[q] == 0.0) continue;
        dx += ec[q] * k[q].dx[idx];
        dv += ec[q] * k[q].dv[idx];
      }
      err = std::max(err, std::abs(h * dx));
      err = std::max(err, std::abs(h * dv));
    }
    res.err = err;
    return res;
  } catch (const SingularPairError&) {
    AttemptResult res;
    res.err = std::numeric_limits<double>::infinity();
    return res;
  }
}

StepResult step_impl(const SimState& s, const ModelParams& p,
                     const StepControl& ctl, double dt_try) {
  Derivative k1;
  try {
    eval_rhs(s, p, k1, ctl.r_floor, ctl.exec);
  } catch (const SingularPairError& e) {
    throw CollisionAbortError(s.t, e.i, e.j, e.r);  // precondition violated
  }

  double dt = std::min(dt_try, ctl.dt_max);
  double min_r = 0.0;
  if (p.kernel.kind == KernelKind::Singular) {
    PairTable tab(s);
    min_r = tab.min_r();
    const double vmax = max_pair_speed(s);
    if (vmax > 0.0) {
      const double cap = ctl.proximity_factor * min_r / vmax;
      if (cap < dt) {
        dt = cap;
        if (dt < ctl.dt_min) throw StiffnessAbortError(s.t, min_r);
      }
    }
  }

  const double tol = ctl.abs_tol + ctl.rel_tol * max_abs_component(s);
  for (int tries = 0; tries < kMaxAttempts; ++tries) {
    AttemptResult res = attempt(s, p, ctl, dt, k1);
    if (res.err <= tol) {
      PairTable tab(res.state);
      if (res.state.n >= 2 && tab.min_r() <= ctl.r_floor) {
        auto [i, j] = tab.min_pair();
        throw CollisionAbortError(res.state.t, i, j, tab.r(i, j));
      }
      double factor = kGrowCap;
      if (res.err > 0.0)
        factor = std::clamp(kSafety * std::pow(tol / res.err, 0.2),
                            kShrinkFloor, kGrowCap);
      const double dt_next =
          std::clamp(dt * factor, ctl.dt_min, ctl.dt_max);
      return {std::move(res.state), dt, dt_next, res.err};
    }
    const double shrink = std::isfinite(res.err)
                              ? std::max(kShrinkFloor,
                                         kSafety * std::pow(tol / res.err, 0.2))
                              : kShrinkFloor;
    dt *= shrink;
    if (dt < ctl.dt_min) {
      if (min_r == 0.0 && s.n >= 2) min_r = PairTable(s).min_r();
      throw StiffnessAbortError(s.t, min_r);
    }
  }
  if (min_r == 0.0 && s.n >= 2) min_r = PairTable(s).min_r();
  throw StiffnessAbortError(s.t, min_r);
}

}  // namespace

StepResult step(const SimState& s, const ModelParams& p, const StepControl& ctl,
                double dt_try) {
  p.validate();
  ctl.validate();
  if (!(dt_try > 0.0)) throw std::invalid_argument("step: dt_try must be positive");
  return step_impl(s, p, ctl, dt_try);
}

Trajectory integrate(const SimState& s0, const ModelParams& p,
                     const StepControl& ctl, double t_end, double sample_every) {
  p.validate();
  ctl.validate();
  if (!s0.all_finite()) throw std::invalid_argument("integrate: non-finite state");
  if (t_end < s0.t) throw std::invalid_argument("integrate: t_end before start");

  Trajectory traj;
  const double collapse_threshold = p.k2 * p.n * p.big_r * p.big_r / 2.0;
  bool crossed = false;
  bool near_warned = false;

  auto record = [&](const SimState& st) {
    Sample smp;
    smp.t = st.t;
    smp.state = st;
    smp.energy = energy_report(st, p, ctl.r_floor);
    smp.distance = distance_report(st);
    if (!crossed && smp.energy.e_tot < collapse_threshold) {
      crossed = true;
      traj.events.push_back(
          {EventKind::ThresholdCrossing, st.t, -1, -1, smp.energy.e_tot});
    }
    traj.samples.push_back(std::move(smp));
  };

  {
    PairTable tab(s0);
    if (s0.n >= 2) {
      traj.step_min_r = tab.min_r();
      traj.t_at_step_min_r = s0.t;
      if (tab.min_r() <= ctl.r_floor) {
        auto [i, j] = tab.min_pair();
        traj.events.push_back(
            {EventKind::CollisionAbort, s0.t, i, j, tab.r(i, j)});
        traj.status = RunStatus::CollisionAbort;
        return traj;
      }
    }
  }
  record(s0);
  if (t_end == s0.t) return traj;

  SimState cur = s0;
  double dt_ctrl = ctl.dt_init;
  long m = 1;
  auto sample_time = [&](long idx) {
    if (sample_every <= 0.0) return t_end;
    return std::min(s0.t + double(idx) * sample_every, t_end);
  };
  double next_sample = sample_time(m);

  while (cur.t < t_end) {
    const double gap = next_sample - cur.t;
    double dt_try = dt_ctrl;
    bool landing = false;
    if (dt_try >= gap) {
      dt_try = gap;
      landing = true;
    }
    StepResult res;
    try {
      res = step_impl(cur, p, ctl, dt_try);
    } catch (const CollisionAbortError& e) {
      traj.events.push_back({EventKind::CollisionAbort, e.t, e.i, e.j, e.r});
      traj.status = RunStatus::CollisionAbort;
      return traj;
    } catch (const StiffnessAbortError& e) {
      traj.events.push_back({EventKind::StiffnessAbort, e.t, -1, -1, e.min_r});
      traj.status = RunStatus::StiffnessAbort;
      return traj;
    }
    const bool full_step = res.dt_used == dt_try;
    cur = std::move(res.state);
    if (landing && full_step) cur.t = next_sample;

    PairTable tab(cur);
    if (cur.n >= 2) {
      if (tab.min_r() < traj.step_min_r) {
        traj.step_min_r = tab.min_r();
        traj.t_at_step_min_r = cur.t;
      }
      if (!near_warned && tab.min_r() < kNearCollisionWarn) {
        near_warned = true;
        auto [i, j] = tab.min_pair();
        traj.events.push_back(
            {EventKind::NearCollision, cur.t, i, j, tab.r(i, j)});
      }
    }

    if (landing && full_step) {
      record(cur);
      next_sample = sample_time(++m);
    }
    // keep the controller's step across truncated landings; adopt its
    // proposal whenever the attempt actually ran at the controller's size
    dt_ctrl = (landing && full_step) ? std::max(dt_ctrl, res.dt_next)
                                     : res.dt_next;
  }
  return traj;
}

SimState reference_integrate(const SimState& s0, const ModelParams& p,
                             double t_end, double dt_fixed, double r_floor,
                             Exec exec) {
  p.validate();
  if (!(dt_fixed > 0.0))
    throw std::invalid_argument("reference_integrate: dt_fixed must be positive");
  const double span = t_end - s0.t;
  if (span == 0.0) return s0;
  const double sign = span > 0.0 ? 1.0 : -1.0;
  const double total = std::abs(span);

  SimState y = s0;
  Derivative k1, k2, k3, k4;
  const long nsteps = long(std::ceil(total / dt_fixed - 1e-12));
  for (long step_i = 0; step_i < nsteps; ++step_i) {
    const double done = double(step_i) * dt_fixed;
    const double h = sign * std::min(dt_fixed, total - done);
    try {
      eval_rhs(y, p, k1, r_floor, exec);
      SimState y2 = y;
      for (size_t idx = 0; idx < y.x.size(); ++idx) {
        y2.x[idx] = y.x[idx] + 0.5 * h * k1.dx[idx];
        y2.v[idx] = y.v[idx] + 0.5 * h * k1.dv[idx];
      }
      eval_rhs(y2, p, k2, r_floor, exec);
      SimState y3 = y;
      for (size_t idx = 0; idx < y.x.size(); ++idx) {
        y3.x[idx] = y.x[idx] + 0.5 * h * k2.dx[idx];
        y3.v[idx] = y.v[idx] + 0.5 * h * k2.dv[idx];
      }
      eval_rhs(y3, p, k3, r_floor, exec);
      SimState y4 = y;
      for (size_t idx = 0; idx < y.x.size(); ++idx) {
        y4.x[idx] = y.x[idx] + h * k3.dx[idx];
        y4.v[idx] = y.v[idx] + h * k3.dv[idx];
      }
      eval_rhs(y4, p, k4, r_floor, exec);
      const double w = h / 6.0;
      for (size_t idx = 0; idx < y.x.size(); ++idx) {
        y.x[idx] += w * (k1.dx[idx] + 2.0 * k2.dx[idx] + 2.0 * k3.dx[idx] +
                         k4.dx[idx]);
        y.v[idx] += w * (k1.dv[idx] + 2.0 * k2.dv[idx] + 2.0 * k3.dv[idx] +
                         k4.dv[idx]);
      }
    } catch (const SingularPairError& e) {
      throw CollisionAbortError(y.t, e.i, e.j, e.r);
    }
    y.t = s0.t + sign * std::min(total, double(step_i + 1) * dt_fixed);
    if (y.n >= 2) {
      PairTable tab(y);
      if (tab.min_r() <= r_floor) {
        auto [i, j] = tab.min_pair();
        throw CollisionAbortError(y.t, i, j, tab.r(i, j));
      }
    }
  }
  y.t = t_end;
  return y;
}

}  // namespace csb
