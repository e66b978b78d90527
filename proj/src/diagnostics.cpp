#include "csb/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "csb/integrator.hpp"

namespace csb {

EnergyReport energy_report(const SimState& s, const ModelParams& p,
                           double r_floor) {
  EnergyReport rep;
  for (double c : s.v) rep.e_kin += c * c;
  rep.e_kin *= 0.5;

  const bool singular = p.kernel.kind == KernelKind::Singular;
  double pot = 0.0, diss = 0.0;
  for (int i = 0; i < s.n; ++i) {
    for (int j = i + 1; j < s.n; ++j) {
      double d2 = 0.0, w2 = 0.0;
      for (int k = 0; k < s.dim; ++k) {
        const double dx = s.px(i, k) - s.px(j, k);
        const double dv = s.pv(i, k) - s.pv(j, k);
        d2 += dx * dx;
        w2 += dv * dv;
      }
      const double r = std::sqrt(d2);
      const double dev = r - 2.0 * p.big_r;
      pot += 2.0 * dev * dev;  // ordered pairs, both directions
      if (singular && r <= r_floor) throw SingularPairError(i, j, r);
      const double psi = r > 0.0 ? kernel_eval(p.kernel, r) : 1.0;
      diss += 2.0 * psi * w2;
    }
  }
  // the i = j terms of the double sum: N copies of (0 - 2R)^2
  pot += double(s.n) * 4.0 * p.big_r * p.big_r;
  rep.e_pot = p.k2 / (8.0 * s.n) * pot;
  rep.dissipation = p.k1 / (2.0 * s.n) * diss;
  rep.e_tot = rep.e_kin + rep.e_pot;
  return rep;
}

DistanceReport distance_report(const SimState& s) {
  if (s.n < 2) throw std::invalid_argument("distance_report: need n >= 2");
  DistanceReport rep;
  PairTable tab(s);
  rep.r_min = tab.min_r();
  rep.r_max = tab.max_r();
  rep.ratio = rep.r_min > 0.0 ? rep.r_max / rep.r_min
                              : std::numeric_limits<double>::infinity();
  double sum_r2 = 0.0;
  for (int i = 0; i < s.n; ++i)
    for (int j = i + 1; j < s.n; ++j) sum_r2 += 2.0 * tab.r(i, j) * tab.r(i, j);
  rep.agg_r = std::sqrt(sum_r2);
  for (int i = 0; i < s.n; ++i) {
    double x2 = 0.0, v2 = 0.0;
    for (int k = 0; k < s.dim; ++k) {
      x2 += s.px(i, k) * s.px(i, k);
      v2 += s.pv(i, k) * s.pv(i, k);
    }
    rep.max_radius = std::max(rep.max_radius, std::sqrt(x2));
    rep.v_max = std::max(rep.v_max, std::sqrt(v2));
  }
  return rep;
}

// max_i | sum_{j != i} (1 - 2R/r_ij)(x_j - x_i) |; coincident pairs
// contribute zero (same convention as the force evaluation).
static double equilibrium_residual(const SimState& s, const ModelParams& p) {
  double worst = 0.0;
  std::vector<double> acc(size_t(s.dim));
  for (int i = 0; i < s.n; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int j = 0; j < s.n; ++j) {
      if (j == i) continue;
      double d2 = 0.0;
      for (int k = 0; k < s.dim; ++k) {
        const double dx = s.px(j, k) - s.px(i, k);
        d2 += dx * dx;
      }
      const double r = std::sqrt(d2);
      if (r == 0.0) continue;
      const double w = 1.0 - 2.0 * p.big_r / r;
      for (int k = 0; k < s.dim; ++k)
        acc[size_t(k)] += w * (s.px(j, k) - s.px(i, k));
    }
    double norm2 = 0.0;
    for (double c : acc) norm2 += c * c;
    worst = std::max(worst, std::sqrt(norm2));
  }
  return worst;
}

Certificates certificates(const std::vector<Sample>& samples,
                          const ModelParams& p) {
  if (samples.empty())
    throw std::invalid_argument("certificates: need at least one sample");
  Certificates cert;
  const double e0 = samples.front().energy.e_tot;
  if (p.k2 > 0.0) {
    cert.d_m = 2.0 * p.big_r + std::sqrt(8.0 * p.n * e0 / p.k2);
    cert.psi_m = kernel_eval(p.kernel, cert.d_m);
  } else {
    cert.d_m = std::numeric_limits<double>::infinity();
    cert.psi_m = 0.0;
  }
  cert.collapse_threshold = p.k2 * p.n * p.big_r * p.big_r / 2.0;
  for (size_t k = 0; k + 1 < samples.size(); ++k) {
    const double dt = samples[k + 1].t - samples[k].t;
    cert.velocity_integral +=
        dt * (samples[k].energy.e_kin + samples[k + 1].energy.e_kin);
    // trapezoid of ||v||^2 = 2 e_kin: dt * (2a + 2b)/2 = dt * (a + b)
  }
  for (const Sample& smp : samples) {
    if (smp.energy.e_tot < cert.collapse_threshold) {
      cert.threshold_crossing_time = smp.t;
      break;
    }
  }
  cert.equilibrium_residual = equilibrium_residual(samples.back().state, p);
  return cert;
}

DissipationCheck check_dissipation_identity(const SimState& s,
                                            const ModelParams& p, double h) {
  if (!(h > 0.0))
    throw std::invalid_argument("check_dissipation_identity: h must be positive");
  const double micro_dt = h / 32.0;
  const SimState fwd = reference_integrate(s, p, s.t + h, micro_dt);
  const SimState bwd = reference_integrate(s, p, s.t - h, micro_dt);
  const EnergyReport here = energy_report(s, p);
  const double e_fwd = energy_report(fwd, p).e_tot;
  const double e_bwd = energy_report(bwd, p).e_tot;
  DissipationCheck out;
  out.lhs = (e_fwd - e_bwd) / (2.0 * h);
  out.rhs = -here.dissipation;
  out.gap = p.variant == ModelVariant::Simplified
                ? std::abs(out.lhs - out.rhs)
                : std::max(0.0, out.lhs - out.rhs);
  return out;
}

ContainmentResult containment_check(const SimState& s, const ModelParams& p,
                                    double slack) {
  ContainmentResult res;
  const double radius_bound = 2.0 * p.big_r + slack;
  const double pair_bound = 4.0 * p.big_r + 2.0 * slack;
  for (int i = 0; i < s.n; ++i) {
    double x2 = 0.0;
    for (int k = 0; k < s.dim; ++k) x2 += s.px(i, k) * s.px(i, k);
    if (std::sqrt(x2) > radius_bound) res.radius_violations.push_back(i);
  }
  if (s.n >= 2) {
    PairTable tab(s);
    for (int i = 0; i < s.n; ++i)
      for (int j = i + 1; j < s.n; ++j)
        if (tab.r(i, j) > pair_bound) res.pair_violations.emplace_back(i, j);
  }
  return res;
}

MinDistance min_distance_over(const std::vector<Sample>& samples) {
  if (samples.empty())
    throw std::invalid_argument("min_distance_over: empty trajectory");
  MinDistance md{std::numeric_limits<double>::infinity(), samples.front().t};
  for (const Sample& smp : samples) {
    if (smp.distance.r_min < md.global_min) {
      md.global_min = smp.distance.r_min;
      md.t_at_min = smp.t;
    }
  }
  return md;
}

}  // namespace csb
