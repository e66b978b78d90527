#include "csb/model.hpp"

#include <cmath>
#include <exception>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace csb {

void KernelSpec::validate() const {
  if (!std::isfinite(alpha)) throw std::invalid_argument("kernel alpha must be finite");
  if (kind == KernelKind::Singular && alpha < 1.0)
    throw std::invalid_argument("singular kernel requires alpha >= 1");
  if (kind == KernelKind::Regular && alpha <= 0.0)
    throw std::invalid_argument("regular kernel requires alpha > 0");
}

double kernel_eval(const KernelSpec& spec, double s) {
  if (!(s > 0.0)) throw std::domain_error("kernel_eval: separation must be positive");
  const double base = spec.kind == KernelKind::Singular ? s : 1.0 + s;
  if (spec.alpha == 1.0) return 1.0 / base;
  return std::pow(base, -spec.alpha);
}

void ModelParams::validate() const {
  kernel.validate();
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (!(big_r > 0.0)) throw std::invalid_argument("big_r must be positive");
  if (k1 < 0.0 || k2 < 0.0 || k_tilde < 0.0)
    throw std::invalid_argument("coupling constants must be nonnegative");
}

bool SimState::all_finite() const {
  if (!std::isfinite(t)) return false;
  for (double c : x)
    if (!std::isfinite(c)) return false;
  for (double c : v)
    if (!std::isfinite(c)) return false;
  return true;
}

SingularPairError::SingularPairError(int i_, int j_, double r_)
    : std::runtime_error("pair separation at or below floor: pair (" +
                         std::to_string(i_) + "," + std::to_string(j_) +
                         "), r = " + std::to_string(r_)),
      i(i_), j(j_), r(r_) {}

PairTable::PairTable(const SimState& s)
    : n_(s.n), dim_(s.dim), r_(size_t(s.n) * s.n, 0.0), x_(s.x), v_(s.v) {
  min_r_ = std::numeric_limits<double>::infinity();
  max_r_ = 0.0;
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      double d2 = 0.0;
      for (int k = 0; k < dim_; ++k) {
        const double dxk = diff_x(i, j, k);
        d2 += dxk * dxk;
      }
      const double r = std::sqrt(d2);
      r_[size_t(i) * n_ + j] = r;
      r_[size_t(j) * n_ + i] = r;
      if (r < min_r_) {
        min_r_ = r;
        min_i_ = i;
        min_j_ = j;
      }
      if (r > max_r_) max_r_ = r;
    }
  }
}

PairTable pairwise_geometry(const SimState& s) { return PairTable(s); }

namespace {

// Per-pair force coefficients. Separation handling:
//   r <= r_floor with r_floor > 0          -> SingularPairError
//   r == 0 with r_floor == 0, Singular     -> SingularPairError
//   r == 0 with r_floor == 0, Regular      -> psi(0) = 1, bonding term zero
struct PairCoef {
  double align;  // multiplies (v_j - v_i)
  double bond;   // multiplies (x_j - x_i); includes the projection term
};

inline PairCoef pair_coef(const SimState& s, const ModelParams& p, int i, int j,
                          double inv_n, bool original, double r_floor) {
  double d2 = 0.0, dvdx = 0.0;
  for (int k = 0; k < s.dim; ++k) {
    const double dxk = s.px(i, k) - s.px(j, k);
    const double dvk = s.pv(i, k) - s.pv(j, k);
    d2 += dxk * dxk;
    dvdx += dvk * dxk;
  }
  const double r = std::sqrt(d2);
  if (r <= r_floor) {
    if (r_floor > 0.0 || p.kernel.kind == KernelKind::Singular)
      throw SingularPairError(i, j, r);
    // exact coincidence, regular kernel: alignment with psi(0) = 1 only
    return {p.k1 * inv_n, 0.0};
  }
  const double psi = kernel_eval(p.kernel, r);
  double bond = p.k2 * inv_n * (r - 2.0 * p.big_r) / (2.0 * r);
  if (original) bond += p.k_tilde * inv_n * dvdx / (2.0 * d2);
  return {p.k1 * inv_n * psi, bond};
}

void rhs_serial(const SimState& s, const ModelParams& p, Derivative& out,
                double r_floor, bool original) {
  const double inv_n = 1.0 / p.n;
  // one evaluation per unordered pair, applied with opposite signs; each
  // particle accumulates its partners in index order
  for (int i = 0; i < s.n; ++i) {
    for (int j = i + 1; j < s.n; ++j) {
      const auto c = pair_coef(s, p, i, j, inv_n, original, r_floor);
      for (int k = 0; k < s.dim; ++k) {
        const double f = c.align * (s.pv(j, k) - s.pv(i, k)) +
                         c.bond * (s.px(j, k) - s.px(i, k));
        out.dv[size_t(i) * s.dim + k] += f;
        out.dv[size_t(j) * s.dim + k] -= f;
      }
    }
  }
}

void rhs_parallel(const SimState& s, const ModelParams& p, Derivative& out,
                  double r_floor, bool original) {
  const double inv_n = 1.0 / p.n;
  const int n = s.n, dim = s.dim;
  // rows are independent; each dv_i is a partner-index-ordered sum, so the
  // result matches the serial path to rounding for any thread count.
  // exceptions must not escape the worker loop: capture the first one.
  std::exception_ptr err;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < n; ++i) {
    try {
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const auto c = pair_coef(s, p, i, j, inv_n, original, r_floor);
        for (int k = 0; k < dim; ++k) {
          out.dv[size_t(i) * dim + k] += c.align * (s.pv(j, k) - s.pv(i, k)) +
                                         c.bond * (s.px(j, k) - s.px(i, k));
        }
      }
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(csb_rhs_err)
#endif
      {
        if (!err) err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace

void eval_rhs(const SimState& s, const ModelParams& p, Derivative& out,
              double r_floor, Exec exec) {
  out.n = s.n;
  out.dim = s.dim;
  out.dx = s.v;
  out.dv.assign(s.x.size(), 0.0);
  const bool original = p.variant == ModelVariant::Original;
  if (exec == Exec::Parallel) {
    rhs_parallel(s, p, out, r_floor, original);
  } else {
    rhs_serial(s, p, out, r_floor, original);
  }
}

Derivative rhs_simplified(const SimState& s, const ModelParams& p, double r_floor) {
  ModelParams q = p;
  q.variant = ModelVariant::Simplified;
  Derivative d;
  eval_rhs(s, q, d, r_floor);
  return d;
}

Derivative rhs_original(const SimState& s, const ModelParams& p, double r_floor) {
  ModelParams q = p;
  q.variant = ModelVariant::Original;
  Derivative d;
  eval_rhs(s, q, d, r_floor);
  return d;
}

}  // namespace csb
