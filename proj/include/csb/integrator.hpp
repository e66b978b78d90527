#pragma once

#include <limits>
#include <string>
#include <vector>

#include "csb/diagnostics.hpp"
#include "csb/model.hpp"

namespace csb {

// Adaptive-step controls. The error norm is the max-abs embedded difference
// over all position and velocity components; a step is accepted when
// err <= abs_tol + rel_tol * max-abs component of the pre-step state.
// The proximity cap dt <= proximity_factor * (min r_ij)/(max |v_i - v_j|)
// is applied only under the singular kernel: it resolves close approaches
// that the kernel must repel, while regular-kernel crossings (which the
// model permits) would otherwise stall the step size to nothing.
struct StepControl {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double dt_init = 1e-3;
  double dt_min = 1e-12;
  double dt_max = 1.0;
  double proximity_factor = 0.1;  // in (0,1]
  double r_floor = kDefaultRFloor;
  Exec exec = Exec::Serial;

  void validate() const;  // 0 < dt_min <= dt_init <= dt_max, tolerances > 0

  bool operator==(const StepControl&) const = default;
};

enum class EventKind {
  NearCollision,      // first time a step lands with min r_ij < 1e-3
  CollisionAbort,     // min r_ij fell to or below r_floor (terminal)
  StiffnessAbort,     // controller pushed dt below dt_min (terminal)
  ThresholdCrossing,  // first sample with e_tot < collapse threshold
};

struct Event {
  EventKind kind;
  double t = 0.0;
  int i = -1, j = -1;  // offending pair where applicable
  double value = 0.0;  // r at aborts/warnings, e_tot at threshold crossing
};

enum class RunStatus { Completed, CollisionAbort, StiffnessAbort };

struct Trajectory {
  std::vector<Sample> samples;  // strictly increasing times, first at t = 0
  std::vector<Event> events;
  RunStatus status = RunStatus::Completed;
  // min r_ij over every accepted step state (finer than the sample cadence)
  double step_min_r = std::numeric_limits<double>::infinity();
  double t_at_step_min_r = 0.0;

  bool completed() const { return status == RunStatus::Completed; }
};

// Terminal step failures, thrown by step()/reference_integrate() and turned
// into Trajectory events by integrate().
struct CollisionAbortError : std::runtime_error {
  double t;
  int i, j;
  double r;
  CollisionAbortError(double t_, int i_, int j_, double r_);
};

struct StiffnessAbortError : std::runtime_error {
  double t;
  double min_r;
  StiffnessAbortError(double t_, double min_r_);
};

struct StepResult {
  SimState state;   // accepted post-step state
  double dt_used;   // the step actually taken
  double dt_next;   // controller's proposal for the next attempt
  double err_est;   // embedded-difference estimate of the accepted step
};

// One accepted adaptive step of at most dt_try (further limited by dt_max
// and the proximity cap). Retries internally with shrinking dt on error
// rejections; throws StiffnessAbortError when dt would fall below dt_min
// and CollisionAbortError when an accepted state has min r_ij <= r_floor.
StepResult step(const SimState& s, const ModelParams& p, const StepControl& ctl,
                double dt_try);

// Repeated accepted steps until t_end, landing exactly on every sample time
// (multiples of sample_every, plus t_end itself) by truncating the step, not
// by interpolating. Aborts are recorded as terminal events and status; the
// samples gathered so far are kept. sample_every <= 0 records only t = 0 and
// t_end.
Trajectory integrate(const SimState& s0, const ModelParams& p,
                     const StepControl& ctl, double t_end, double sample_every);

// Independent fixed-step oracle: classical RK4 with constant dt (the final
// step is truncated to land on t_end). Integrates backwards when
// t_end < s0.t. Throws CollisionAbortError if any step state reaches
// min r_ij <= r_floor.
SimState reference_integrate(const SimState& s0, const ModelParams& p,
                             double t_end, double dt_fixed,
                             double r_floor = kDefaultRFloor,
                             Exec exec = Exec::Serial);

}  // namespace csb
