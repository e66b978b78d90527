#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Cucker-Smale system with bonding force. Motion of N particles in R^d:
//
//   dx_i/dt = v_i
//   dv_i/dt = (K1/N) sum_j psi(r_ij) (v_j - v_i)                  [alignment]
//           + (Kt/N) sum_j [ (v_i-v_j).(x_i-x_j) / (2 r_ij^2) ] (x_j - x_i)
//                                                  [velocity projection,
//                                                   original variant only]
//           + (K2/N) sum_j [ (r_ij - 2R) / (2 r_ij) ] (x_j - x_i)  [bonding]
//
// with r_ij = |x_i - x_j| and the j = i summand equal to zero. The
// communication weight psi is either singular, psi(s) = s^-alpha with
// alpha >= 1, or regular, psi(s) = (1+s)^-alpha with alpha > 0.

namespace csb {

enum class KernelKind { Singular, Regular };

struct KernelSpec {
  KernelKind kind = KernelKind::Singular;
  double alpha = 1.0;

  // Singular requires alpha >= 1 (collision avoidance needs a
  // non-integrable singularity); Regular requires alpha > 0.
  void validate() const;

  bool operator==(const KernelSpec&) const = default;
};

// psi(s). Throws std::domain_error for s <= 0: a non-positive separation
// reaching the kernel means a collided or invalid pair slipped through.
double kernel_eval(const KernelSpec& spec, double s);

enum class ModelVariant { Original, Simplified };

struct ModelParams {
  ModelVariant variant = ModelVariant::Simplified;
  KernelSpec kernel{};
  double k1 = 1.0;       // alignment strength
  double k2 = 1.0;       // bonding strength
  double k_tilde = 1.0;  // velocity-projection strength, Original only
  double big_r = 2.0;    // target half-distance R
  int n = 2;
  int dim = 1;

  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

struct SimState {
  double t = 0.0;
  int n = 0;
  int dim = 0;
  std::vector<double> x;  // n*dim, particle-major
  std::vector<double> v;  // n*dim

  SimState() = default;
  SimState(int n_, int dim_)
      : n(n_), dim(dim_), x(size_t(n_) * dim_, 0.0), v(size_t(n_) * dim_, 0.0) {}

  double& px(int i, int k) { return x[size_t(i) * dim + k]; }
  double px(int i, int k) const { return x[size_t(i) * dim + k]; }
  double& pv(int i, int k) { return v[size_t(i) * dim + k]; }
  double pv(int i, int k) const { return v[size_t(i) * dim + k]; }

  bool all_finite() const;
};

struct Derivative {
  int n = 0;
  int dim = 0;
  std::vector<double> dx;  // = v
  std::vector<double> dv;
};

// Raised when a pair separation at or below the configured floor reaches a
// force or diagnostic evaluation.
struct SingularPairError : std::runtime_error {
  int i, j;
  double r;
  SingularPairError(int i_, int j_, double r_);
};

inline constexpr double kDefaultRFloor = 1e-12;

// Pairwise geometry hoisted once per state: r_ij for every ordered pair,
// with the extremes over i != j tracked. r(i,j) == r(j,i) exactly and
// diff_x/diff_v are exact negations under swap.
class PairTable {
 public:
  explicit PairTable(const SimState& s);

  int n() const { return n_; }
  int dim() const { return dim_; }
  double r(int i, int j) const { return r_[size_t(i) * n_ + j]; }
  // x_i - x_j and v_i - v_j, component k
  double diff_x(int i, int j, int k) const {
    return x_[size_t(i) * dim_ + k] - x_[size_t(j) * dim_ + k];
  }
  double diff_v(int i, int j, int k) const {
    return v_[size_t(i) * dim_ + k] - v_[size_t(j) * dim_ + k];
  }

  double min_r() const { return min_r_; }
  double max_r() const { return max_r_; }
  std::pair<int, int> min_pair() const { return {min_i_, min_j_}; }

 private:
  int n_, dim_;
  std::vector<double> r_;
  std::vector<double> x_, v_;
  double min_r_, max_r_;
  int min_i_ = 0, min_j_ = 1;
};

PairTable pairwise_geometry(const SimState& s);

// Execution policy for the O(N^2) force kernel. Serial is the reference
// path and the default everywhere; Parallel runs the same row-ordered sums
// under OpenMP and agrees with Serial to rounding for any thread count.
enum class Exec { Serial, Parallel };

// Accelerations for the configured variant, written into out (resized as
// needed). Throws SingularPairError when some r_ij <= r_floor; with
// r_floor == 0 exactly, a coincident pair under the Regular kernel
// contributes psi(0) = 1 to alignment and zero to the bonding term, while
// the Singular kernel still throws.
void eval_rhs(const SimState& s, const ModelParams& p, Derivative& out,
              double r_floor = kDefaultRFloor, Exec exec = Exec::Serial);

// Forced-variant convenience wrappers (ignore p.variant).
Derivative rhs_simplified(const SimState& s, const ModelParams& p,
                          double r_floor = kDefaultRFloor);
Derivative rhs_original(const SimState& s, const ModelParams& p,
                        double r_floor = kDefaultRFloor);

}  // namespace csb
