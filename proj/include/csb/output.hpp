#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csb/config.hpp"
#include "csb/diagnostics.hpp"
#include "csb/integrator.hpp"

namespace csb {

// On-disk layout of one results directory:
//   trajectory.csv    t, x_1_1..x_N_d, v_1_1..v_N_d     (one row per sample)
//   diagnostics.csv   t, e_kin, e_pot, e_tot, dissipation,
//                     r_min, r_max, agg_r, v_max, max_radius
//   summary.json      config echo, status, events, certificates
//   manifest.json     file name -> SHA-256 of its bytes
// All numbers use shortest round-trip decimals, so reading a CSV back
// reproduces the written doubles bit for bit on any platform.

struct Manifest {
  std::map<std::string, std::string> files;  // name -> sha256 hex digest

  bool operator==(const Manifest&) const = default;
};

// Hex SHA-256 digests (lowercase, 64 chars).
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// Creates dir if needed, writes the four files, returns the manifest that
// was written (covering the three data files). cert is absent only for runs
// that aborted before producing a single sample. I/O failures surface as
// std::runtime_error naming the path.
Manifest write_outputs(const Trajectory& traj,
                       const std::optional<Certificates>& cert,
                       const RunConfig& cfg,
                       const std::filesystem::path& dir);

// Readers. Column headers are checked; a malformed file raises
// std::runtime_error with the file and the offending row or column.
std::vector<SimState> read_trajectory_csv(const std::filesystem::path& path);

struct DiagnosticsRow {
  double t, e_kin, e_pot, e_tot, dissipation;
  double r_min, r_max, agg_r, v_max, max_radius;
};
std::vector<DiagnosticsRow> read_diagnostics_csv(
    const std::filesystem::path& path);

Manifest read_manifest(const std::filesystem::path& path);

// Independent re-examination of a results directory:
//   - manifest digests match the bytes on disk,
//   - diagnostics rows reproduce from the trajectory states, including
//     e_tot = e_kin + e_pot,
//   - total energy never increases between samples beyond rounding (or is
//     conserved when every dissipative coupling is zero),
//   - r_max stays below the certified diameter bound d_m,
//   - certificates recomputed from the stored samples match the summary.
// Each violated check appends one human-readable line to failures.
struct VerifyReport {
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};
VerifyReport verify_results(const std::filesystem::path& dir);

// "scenario-seed-YYYYMMDDTHHMMSSZ" directory leaf for one run; time_utc is
// seconds since the epoch so callers (and tests) can pin it.
std::string results_dir_name(const std::string& scenario, std::uint64_t seed,
                             std::int64_t time_utc);

const char* status_name(RunStatus s);
const char* event_kind_name(EventKind k);

}  // namespace csb
