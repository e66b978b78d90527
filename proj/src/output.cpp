#include "csb/output.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace csb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const fs::path& file, int row, const std::string& tok) {
  double v = 0.0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc{} || res.ptr != e)
    throw std::runtime_error(file.string() + ": row " + std::to_string(row) +
                             ": bad number '" + tok + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t c = line.find(',', pos);
    if (c == std::string::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, c - pos));
    pos = c + 1;
  }
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string trajectory_header(int n, int dim) {
  std::string h = "t";
  for (int i = 1; i <= n; ++i)
    for (int k = 1; k <= dim; ++k)
      h += ",x_" + std::to_string(i) + "_" + std::to_string(k);
  for (int i = 1; i <= n; ++i)
    for (int k = 1; k <= dim; ++k)
      h += ",v_" + std::to_string(i) + "_" + std::to_string(k);
  return h;
}

constexpr const char* kDiagnosticsHeader =
    "t,e_kin,e_pot,e_tot,dissipation,r_min,r_max,agg_r,v_max,max_radius";

// JSON has no infinities; encode non-finite doubles as strings.
json num_or_str(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double json_num(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::runtime_error("summary: expected a number, got " + j.dump());
}

// equal up to rel in units of the larger magnitude; infinities must agree
bool close(double a, double b, double rel) {
  if (std::isnan(a) || std::isnan(b)) return false;
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(),
                 nullptr) != 1)
    throw std::runtime_error("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(size_t(len) * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  return sha256_hex(read_file(path));
}

const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Completed:
      return "completed";
    case RunStatus::CollisionAbort:
      return "collision_abort";
    case RunStatus::StiffnessAbort:
      return "stiffness_abort";
  }
  return "unknown";
}

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::NearCollision:
      return "near_collision";
    case EventKind::CollisionAbort:
      return "collision_abort";
    case EventKind::StiffnessAbort:
      return "stiffness_abort";
    case EventKind::ThresholdCrossing:
      return "threshold_crossing";
  }
  return "unknown";
}

Manifest write_outputs(const Trajectory& traj,
                       const std::optional<Certificates>& cert,
                       const RunConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  const int n = cfg.params.n;
  const int dim = cfg.params.dim;

  std::string tcsv = trajectory_header(n, dim);
  tcsv += "\n";
  for (const Sample& smp : traj.samples) {
    tcsv += fmt(smp.t);
    for (double c : smp.state.x) {
      tcsv += ",";
      tcsv += fmt(c);
    }
    for (double c : smp.state.v) {
      tcsv += ",";
      tcsv += fmt(c);
    }
    tcsv += "\n";
  }

  std::string dcsv = kDiagnosticsHeader;
  dcsv += "\n";
  for (const Sample& smp : traj.samples) {
    const EnergyReport& en = smp.energy;
    const DistanceReport& di = smp.distance;
    const double cols[10] = {smp.t,     en.e_kin, en.e_pot, en.e_tot,
                             en.dissipation, di.r_min, di.r_max, di.agg_r,
                             di.v_max,  di.max_radius};
    for (int c = 0; c < 10; ++c) {
      if (c) dcsv += ",";
      dcsv += fmt(cols[c]);
    }
    dcsv += "\n";
  }

  json s;
  s["schema"] = "csb-summary-v1";
  s["config"] = print_config(cfg);
  s["status"] = status_name(traj.status);
  s["sample_count"] = traj.samples.size();
  json events = json::array();
  for (const Event& ev : traj.events) {
    json e;
    e["kind"] = event_kind_name(ev.kind);
    e["t"] = num_or_str(ev.t);
    if (ev.i >= 0) e["i"] = ev.i;
    if (ev.j >= 0) e["j"] = ev.j;
    e["value"] = num_or_str(ev.value);
    events.push_back(e);
  }
  s["events"] = events;
  if (!traj.samples.empty()) {
    s["t_first"] = num_or_str(traj.samples.front().t);
    s["t_last"] = num_or_str(traj.samples.back().t);
    s["e_tot_initial"] = num_or_str(traj.samples.front().energy.e_tot);
    s["e_tot_final"] = num_or_str(traj.samples.back().energy.e_tot);
    s["e_kin_initial"] = num_or_str(traj.samples.front().energy.e_kin);
    s["e_kin_final"] = num_or_str(traj.samples.back().energy.e_kin);
  } else {
    s["t_first"] = nullptr;
    s["t_last"] = nullptr;
  }
  s["step_min_r"] = num_or_str(traj.step_min_r);
  s["t_at_step_min_r"] = num_or_str(traj.t_at_step_min_r);
  if (cert) {
    json c;
    c["d_m"] = num_or_str(cert->d_m);
    c["psi_m"] = num_or_str(cert->psi_m);
    c["collapse_threshold"] = num_or_str(cert->collapse_threshold);
    c["velocity_integral"] = num_or_str(cert->velocity_integral);
    c["threshold_crossing_time"] =
        cert->threshold_crossing_time
            ? num_or_str(*cert->threshold_crossing_time)
            : json(nullptr);
    c["equilibrium_residual"] = num_or_str(cert->equilibrium_residual);
    s["certificates"] = c;
  } else {
    s["certificates"] = nullptr;
  }
  const std::string sjson = s.dump(2) + "\n";

  Manifest man;
  man.files["trajectory.csv"] = sha256_hex(tcsv);
  man.files["diagnostics.csv"] = sha256_hex(dcsv);
  man.files["summary.json"] = sha256_hex(sjson);
  json m;
  m["schema"] = "csb-manifest-v1";
  m["files"] = man.files;

  write_file(dir / "trajectory.csv", tcsv);
  write_file(dir / "diagnostics.csv", dcsv);
  write_file(dir / "summary.json", sjson);
  write_file(dir / "manifest.json", m.dump(2) + "\n");
  return man;
}

std::vector<SimState> read_trajectory_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path.string() + ": empty file");
  std::vector<std::string> head = split_csv(line);
  if (head.empty() || head[0] != "t" || head.size() < 5 ||
      (head.size() - 1) % 2 != 0)
    throw std::runtime_error(path.string() + ": bad trajectory header");
  // infer n and dim from the last position column "x_N_d"
  const std::string& last_x = head[(head.size() - 1) / 2];
  int n = 0, dim = 0;
  if (std::sscanf(last_x.c_str(), "x_%d_%d", &n, &dim) != 2 || n < 1 ||
      dim < 1 || head.size() != 1 + 2 * size_t(n) * size_t(dim) ||
      line != trajectory_header(n, dim))
    throw std::runtime_error(path.string() + ": bad trajectory header");

  std::vector<SimState> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> toks = split_csv(line);
    if (toks.size() != head.size())
      throw std::runtime_error(path.string() + ": row " +
                               std::to_string(row) + ": wrong column count");
    SimState s(n, dim);
    s.t = parse_double(path, row, toks[0]);
    const size_t nd = size_t(n) * size_t(dim);
    for (size_t c = 0; c < nd; ++c) {
      s.x[c] = parse_double(path, row, toks[1 + c]);
      s.v[c] = parse_double(path, row, toks[1 + nd + c]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<DiagnosticsRow> read_diagnostics_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != kDiagnosticsHeader)
    throw std::runtime_error(path.string() + ": bad diagnostics header");
  std::vector<DiagnosticsRow> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> toks = split_csv(line);
    if (toks.size() != 10)
      throw std::runtime_error(path.string() + ": row " +
                               std::to_string(row) + ": wrong column count");
    DiagnosticsRow r{};
    double* fields[10] = {&r.t,     &r.e_kin, &r.e_pot, &r.e_tot,
                          &r.dissipation, &r.r_min, &r.r_max, &r.agg_r,
                          &r.v_max, &r.max_radius};
    for (int c = 0; c < 10; ++c)
      *fields[c] = parse_double(path, row, toks[size_t(c)]);
    out.push_back(r);
  }
  return out;
}

Manifest read_manifest(const fs::path& path) {
  json m = json::parse(read_file(path));
  if (!m.contains("files") || !m["files"].is_object())
    throw std::runtime_error(path.string() + ": missing files map");
  Manifest man;
  for (auto it = m["files"].begin(); it != m["files"].end(); ++it)
    man.files[it.key()] = it.value().get<std::string>();
  return man;
}

VerifyReport verify_results(const fs::path& dir) {
  VerifyReport rep;
  auto fail = [&rep](std::string msg) {
    rep.failures.push_back(std::move(msg));
  };

  Manifest man;
  try {
    man = read_manifest(dir / "manifest.json");
  } catch (const std::exception& e) {
    fail(std::string("manifest unreadable: ") + e.what());
    return rep;
  }
  for (const char* req : {"trajectory.csv", "diagnostics.csv", "summary.json"})
    if (man.files.find(req) == man.files.end())
      fail(std::string("manifest missing entry: ") + req);
  for (const auto& [name, digest] : man.files) {
    try {
      const std::string got = sha256_file(dir / name);
      if (got != digest) fail("digest mismatch: " + name);
    } catch (const std::exception& e) {
      fail(std::string("cannot hash ") + name + ": " + e.what());
    }
  }

  json summary;
  RunConfig cfg;
  try {
    summary = json::parse(read_file(dir / "summary.json"));
    cfg = parse_config(summary.at("config").get<std::string>());
  } catch (const std::exception& e) {
    fail(std::string("summary unreadable: ") + e.what());
    return rep;
  }

  std::vector<SimState> states;
  std::vector<DiagnosticsRow> rows;
  try {
    states = read_trajectory_csv(dir / "trajectory.csv");
    rows = read_diagnostics_csv(dir / "diagnostics.csv");
  } catch (const std::exception& e) {
    fail(std::string("series unreadable: ") + e.what());
    return rep;
  }
  if (states.size() != rows.size()) {
    fail("trajectory and diagnostics row counts differ");
    return rep;
  }
  if (states.empty()) return rep;  // aborted before the first sample

  // recompute every diagnostics row from the stored state
  std::vector<Sample> samples;
  samples.reserve(states.size());
  int bad_rows = 0;
  for (size_t k = 0; k < states.size(); ++k) {
    Sample smp;
    smp.t = states[k].t;
    smp.state = states[k];
    try {
      smp.energy = energy_report(states[k], cfg.params);
      smp.distance = distance_report(states[k]);
    } catch (const std::exception& e) {
      fail("row " + std::to_string(k) + ": diagnostics do not re-evaluate: " +
           e.what());
      return rep;
    }
    const DiagnosticsRow& r = rows[k];
    const double got[10] = {r.t,     r.e_kin, r.e_pot, r.e_tot,
                            r.dissipation, r.r_min, r.r_max, r.agg_r,
                            r.v_max, r.max_radius};
    const double want[10] = {smp.t,
                             smp.energy.e_kin,
                             smp.energy.e_pot,
                             smp.energy.e_tot,
                             smp.energy.dissipation,
                             smp.distance.r_min,
                             smp.distance.r_max,
                             smp.distance.agg_r,
                             smp.distance.v_max,
                             smp.distance.max_radius};
    for (int c = 0; c < 10; ++c)
      if (!close(got[c], want[c], 1e-12)) {
        ++bad_rows;
        if (bad_rows <= 3)
          fail("row " + std::to_string(k) + " column " + std::to_string(c) +
               ": stored " + fmt(got[c]) + " but states give " +
               fmt(want[c]));
        break;
      }
    samples.push_back(std::move(smp));
  }
  if (bad_rows > 3)
    fail(std::to_string(bad_rows - 3) + " further rows disagree");

  // energy behavior between consecutive samples
  const double e0 = samples.front().energy.e_tot;
  const bool dissipative =
      cfg.params.k1 > 0.0 || (cfg.params.variant == ModelVariant::Original &&
                              cfg.params.k_tilde > 0.0);
  if (dissipative) {
    const double eps = 1e-8 * std::max(1.0, std::abs(e0));
    for (size_t k = 1; k < samples.size(); ++k)
      if (samples[k].energy.e_tot > samples[k - 1].energy.e_tot + eps) {
        fail("total energy increases between samples " +
             std::to_string(k - 1) + " and " + std::to_string(k));
        break;
      }
  } else {
    const double span = samples.back().t - samples.front().t;
    const double eps = 1e-6 * std::max(1.0, std::abs(e0)) * (1.0 + span);
    for (size_t k = 1; k < samples.size(); ++k)
      if (!close(samples[k].energy.e_tot, e0, eps)) {
        fail("total energy drifts in a conservative run at sample " +
             std::to_string(k));
        break;
      }
  }

  // certificates: recompute and compare to the stored summary
  if (!summary.contains("certificates") || summary["certificates"].is_null())
    return rep;
  Certificates cert;
  try {
    cert = certificates(samples, cfg.params);
  } catch (const std::exception& e) {
    fail(std::string("certificates do not re-evaluate: ") + e.what());
    return rep;
  }
  if (std::isfinite(cert.d_m)) {
    for (size_t k = 0; k < samples.size(); ++k)
      if (samples[k].distance.r_max >=
          cert.d_m + 1e-9 * std::max(1.0, cert.d_m)) {
        fail("pair diameter exceeds the certified bound at sample " +
             std::to_string(k));
        break;
      }
  }
  const json& sc = summary["certificates"];
  auto check_cert = [&](const char* key, double want) {
    if (!sc.contains(key)) {
      fail(std::string("summary certificates missing key: ") + key);
      return;
    }
    if (!close(json_num(sc.at(key)), want, 1e-9))
      fail(std::string("certificate ") + key + " does not re-evaluate: " +
           "stored " + sc.at(key).dump() + ", recomputed " + fmt(want));
  };
  check_cert("d_m", cert.d_m);
  check_cert("psi_m", cert.psi_m);
  check_cert("collapse_threshold", cert.collapse_threshold);
  check_cert("velocity_integral", cert.velocity_integral);
  check_cert("equilibrium_residual", cert.equilibrium_residual);
  if (!sc.contains("threshold_crossing_time")) {
    fail("summary certificates missing key: threshold_crossing_time");
  } else if (cert.threshold_crossing_time.has_value() !=
             !sc.at("threshold_crossing_time").is_null()) {
    fail("threshold_crossing_time presence does not re-evaluate");
  } else if (cert.threshold_crossing_time &&
             !close(json_num(sc.at("threshold_crossing_time")),
                    *cert.threshold_crossing_time, 1e-9)) {
    fail("threshold_crossing_time does not re-evaluate");
  }
  return rep;
}

std::string results_dir_name(const std::string& scenario, std::uint64_t seed,
                             std::int64_t time_utc) {
  std::time_t tt = static_cast<std::time_t>(time_utc);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
  return scenario + "-seed" + std::to_string(seed) + "-" + buf;
}

}  // namespace csb
