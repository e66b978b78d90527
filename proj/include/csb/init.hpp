#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "csb/model.hpp"

namespace csb {

// Closed interval for one coordinate axis.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const Interval&) const = default;
};

// Seeded uniform initial data: every position coordinate is drawn from the
// per-axis pos_box interval and every velocity coordinate from vel_box.
// Identical (seed, config) gives identical states on every platform.
struct InitConfig {
  int n = 10;
  int dim = 2;
  std::uint64_t seed = 42;
  std::vector<Interval> pos_box;  // size dim
  std::vector<Interval> vel_box;  // size dim

  void validate() const;  // n >= 2, dim >= 1, boxes sized dim with lo <= hi

  bool operator==(const InitConfig&) const = default;
};

// Convenience: the same [lo,hi] on every axis.
std::vector<Interval> uniform_box(double lo, double hi, int dim);

// Draw order is frozen and documented: all position coordinates first, then
// all velocity coordinates, particle-major and axis-minor within a particle.
// Tests pin a reference sequence of the underlying generator.
SimState sample_initial(const InitConfig& cfg);

// Subtract the arithmetic mean position and mean velocity so the returned
// state has sum x_i = 0 and sum v_i = 0 up to rounding.
SimState galilean_normalize(SimState s);

struct CollisionViolation {
  int i, j;
  double r;
};

// ok (nullopt) iff min over i != j of r_ij is strictly above the floor;
// otherwise identifies the closest offending pair. A violation is a normal
// return value, not an error.
std::optional<CollisionViolation> assert_noncollisional(const SimState& s,
                                                        double floor);

}  // namespace csb
