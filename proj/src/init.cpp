#include "csb/init.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "csb/rng.hpp"

namespace csb {

void InitConfig::validate() const {
  if (n < 2) throw std::invalid_argument("init.n must be >= 2");
  if (dim < 1) throw std::invalid_argument("init.dim must be >= 1");
  if (int(pos_box.size()) != dim)
    throw std::invalid_argument("init.pos_box must have one interval per axis");
  if (int(vel_box.size()) != dim)
    throw std::invalid_argument("init.vel_box must have one interval per axis");
  auto check = [](const std::vector<Interval>& box, const char* name) {
    for (size_t k = 0; k < box.size(); ++k) {
      if (!(box[k].lo <= box[k].hi) || !std::isfinite(box[k].lo) ||
          !std::isfinite(box[k].hi))
        throw std::invalid_argument(std::string("init.") + name + " axis " +
                                    std::to_string(k) + ": need finite lo <= hi");
    }
  };
  check(pos_box, "pos_box");
  check(vel_box, "vel_box");
}

std::vector<Interval> uniform_box(double lo, double hi, int dim) {
  return std::vector<Interval>(size_t(dim), Interval{lo, hi});
}

SimState sample_initial(const InitConfig& cfg) {
  cfg.validate();
  Xoshiro256pp rng(cfg.seed);
  SimState s(cfg.n, cfg.dim);
  s.t = 0.0;
  for (int i = 0; i < cfg.n; ++i)
    for (int k = 0; k < cfg.dim; ++k)
      s.px(i, k) = rng.uniform(cfg.pos_box[k].lo, cfg.pos_box[k].hi);
  for (int i = 0; i < cfg.n; ++i)
    for (int k = 0; k < cfg.dim; ++k)
      s.pv(i, k) = rng.uniform(cfg.vel_box[k].lo, cfg.vel_box[k].hi);
  return s;
}

SimState galilean_normalize(SimState s) {
  if (s.n == 0) return s;
  for (int k = 0; k < s.dim; ++k) {
    double mx = 0.0, mv = 0.0;
    for (int i = 0; i < s.n; ++i) {
      mx += s.px(i, k);
      mv += s.pv(i, k);
    }
    mx /= s.n;
    mv /= s.n;
    for (int i = 0; i < s.n; ++i) {
      s.px(i, k) -= mx;
      s.pv(i, k) -= mv;
    }
  }
  return s;
}

std::optional<CollisionViolation> assert_noncollisional(const SimState& s,
                                                        double floor) {
  PairTable tab(s);
  if (s.n >= 2 && !(tab.min_r() > floor)) {
    auto [i, j] = tab.min_pair();
    return CollisionViolation{i, j, tab.r(i, j)};
  }
  return std::nullopt;
}

}  // namespace csb
