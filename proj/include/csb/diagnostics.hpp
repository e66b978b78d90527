#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "csb/model.hpp"

namespace csb {

// Instantaneous energies and dissipation rate:
//   e_kin = (1/2) sum_i |v_i|^2
//   e_pot = (K2/8N) sum_{i,j=1..N} (r_ij - 2R)^2   (both orders AND the
//           diagonal: the i = j terms contribute (2R)^2 each, a constant
//           K2 R^2/2 offset that makes the total-collapse value K2 N R^2/2)
//   dissipation = (K1/2N) sum_{i != j} psi(r_ij) |v_i - v_j|^2
// Along the simplified dynamics dE/dt = -dissipation exactly; the original
// variant's extra term only dissipates further, so dE/dt <= -dissipation.
struct EnergyReport {
  double e_kin = 0.0;
  double e_pot = 0.0;
  double e_tot = 0.0;  // e_kin + e_pot
  double dissipation = 0.0;
};

// Pairwise-distance statistics of one state.
struct DistanceReport {
  double r_min = 0.0;      // min over i != j
  double r_max = 0.0;      // max over i != j
  double ratio = 1.0;      // r_max / r_min (inf when r_min == 0)
  double agg_r = 0.0;      // sqrt(sum over ALL ordered pairs of |x_i-x_j|^2)
  double v_max = 0.0;      // max_i |v_i|
  double max_radius = 0.0; // max_i |x_i|
};

// One trajectory snapshot with its diagnostics attached.
struct Sample {
  double t = 0.0;
  SimState state;
  EnergyReport energy;
  DistanceReport distance;
};

// Certificates derived from a trajectory prefix:
//   d_m                   2R + sqrt(8 N E(0) / K2), the uniform bound on
//                         every r_ij (infinite when K2 = 0)
//   psi_m                 psi(d_m), the kernel floor on [0, d_m]
//   collapse_threshold    K2 N R^2 / 2; total energy below it rules out
//                         later total collapse
//   velocity_integral     trapezoid-rule integral of ||v||^2 = 2 e_kin over
//                         the samples; bounded by E(0)/(K1 psi_m)
//   threshold_crossing_time  first sample time with e_tot < collapse_threshold
//   equilibrium_residual  max_i | sum_{j != i} (1 - 2R/r_ij)(x_j - x_i) |
//                         evaluated on the latest sample; zero exactly at a
//                         bonding-equilibrium configuration
struct Certificates {
  double d_m = 0.0;
  double psi_m = 0.0;
  double collapse_threshold = 0.0;
  double velocity_integral = 0.0;
  std::optional<double> threshold_crossing_time;
  double equilibrium_residual = 0.0;
};

// Throws SingularPairError when the kernel is singular and some pair sits
// at or below r_floor (the dissipation sum would evaluate the singularity).
EnergyReport energy_report(const SimState& s, const ModelParams& p,
                           double r_floor = kDefaultRFloor);

DistanceReport distance_report(const SimState& s);

// Requires at least one sample; sample times must be nondecreasing.
Certificates certificates(const std::vector<Sample>& samples,
                          const ModelParams& p);

// Two-sided finite-difference check of the energy-dissipation identity at
// one state: lhs ~ dE/dt from micro-integrations of width h (fixed-step
// reference scheme, 32 substeps each way), rhs = -dissipation.
//   Simplified: gap = |lhs - rhs|            (identity, O(h^2) agreement)
//   Original:   gap = max(0, lhs - rhs)      (inequality lhs <= rhs)
struct DissipationCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
};

DissipationCheck check_dissipation_identity(const SimState& s,
                                            const ModelParams& p, double h);

// Late-time containment: every |x_i| <= 2R + slack and every
// r_ij <= 4R + 2 slack. Expects a Galilean-normalized state.
struct ContainmentResult {
  std::vector<int> radius_violations;
  std::vector<std::pair<int, int>> pair_violations;
  bool ok() const { return radius_violations.empty() && pair_violations.empty(); }
};

ContainmentResult containment_check(const SimState& s, const ModelParams& p,
                                    double slack);

// Minimum r_min over the samples and the time it occurred.
struct MinDistance {
  double global_min = 0.0;
  double t_at_min = 0.0;
};

MinDistance min_distance_over(const std::vector<Sample>& samples);

}  // namespace csb
