// Times the force evaluation's serial half-pair kernel against the
// OpenMP row-parallel kernel and cross-checks their results. Usage:
//   csb_bench [repetition-scale]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "csb/init.hpp"
#include "csb/model.hpp"
#include "csb/rng.hpp"

using namespace csb;

namespace {

SimState random_state(int n, int dim, std::uint64_t seed) {
  Xoshiro256pp rng(seed);
  SimState s(n, dim);
  for (double& c : s.x) c = rng.uniform(-10.0, 10.0);
  for (double& c : s.v) c = rng.uniform(-1.0, 1.0);
  return s;
}

double time_eval(const SimState& s, const ModelParams& p, Exec exec,
                 int reps, double* checksum) {
  Derivative out;
  // warm-up also verifies the path runs clean
  eval_rhs(s, p, out, kDefaultRFloor, exec);
  const auto t0 = std::chrono::steady_clock::now();
  double acc = 0.0;
  for (int r = 0; r < reps; ++r) {
    eval_rhs(s, p, out, kDefaultRFloor, exec);
    acc += out.dv[0];  // keep the loop observable
  }
  const auto t1 = std::chrono::steady_clock::now();
  *checksum = acc;
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

double max_divergence(const SimState& s, const ModelParams& p) {
  Derivative a, b;
  eval_rhs(s, p, a, kDefaultRFloor, Exec::Serial);
  eval_rhs(s, p, b, kDefaultRFloor, Exec::Parallel);
  double scale = 1.0, diff = 0.0;
  for (size_t k = 0; k < a.dv.size(); ++k) {
    scale = std::max(scale, std::abs(a.dv[k]));
    diff = std::max(diff, std::abs(a.dv[k] - b.dv[k]));
  }
  return diff / scale;
}

}  // namespace

int main(int argc, char** argv) {
  const double scale = argc > 1 ? std::atof(argv[1]) : 1.0;
  if (!(scale > 0)) {
    std::fprintf(stderr, "repetition scale must be positive\n");
    return 1;
  }

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("force kernel benchmark: serial half-pair versus row-parallel "
              "(%d thread%s)\n\n",
              threads, threads == 1 ? "" : "s");
  std::printf("%8s %6s %10s %14s %14s %9s %12s\n", "variant", "n", "dim",
              "serial [us]", "parallel [us]", "speedup", "divergence");

  for (ModelVariant variant :
       {ModelVariant::Simplified, ModelVariant::Original}) {
    for (int n : {32, 128, 512, 1024}) {
      const int dim = 3;
      ModelParams p;
      p.variant = variant;
      p.kernel = {KernelKind::Regular, 1.0};
      p.n = n;
      p.dim = dim;
      SimState s = random_state(n, dim, 20260819 + std::uint64_t(n));

      const int reps = std::max(
          1, int(scale * std::max(1.0, 2e7 / (double(n) * n))));
      double chk_s = 0.0, chk_p = 0.0;
      const double ts = time_eval(s, p, Exec::Serial, reps, &chk_s);
      const double tp = time_eval(s, p, Exec::Parallel, reps, &chk_p);
      const double div = max_divergence(s, p);
      std::printf("%8s %6d %10d %14.2f %14.2f %8.2fx %12.2e\n",
                  variant == ModelVariant::Simplified ? "simpl" : "orig", n,
                  dim, ts * 1e6, tp * 1e6, ts / tp, div);
      if (div > 1e-12) {
        std::fprintf(stderr,
                     "serial and parallel kernels disagree beyond rounding\n");
        return 1;
      }
    }
  }
  std::printf("\ndivergence = max |serial - parallel| over components, "
              "relative to the largest force\n");
  return 0;
}
