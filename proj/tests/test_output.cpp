#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "csb/init.hpp"
#include "csb/output.hpp"

using namespace csb;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), std::streamsize(bytes.size()));
  REQUIRE(out.good());
}

struct RunFixture {
  RunConfig cfg;
  Trajectory traj;
  Certificates cert;

  RunFixture() {
    cfg = parse_config(
        "[init]\nn = 3\ndim = 2\nseed = 7\npos_box = -3 3\nvel_box = -1 1\n"
        "[model]\nkernel = regular\nalpha = 1\n"
        "[run]\nt_end = 0.5\nsample_every = 0.1\n");
    SimState s0 = galilean_normalize(sample_initial(cfg.init));
    traj = integrate(s0, cfg.params, cfg.ctl, cfg.t_end, cfg.sample_every);
    REQUIRE(traj.completed());
    REQUIRE(traj.samples.size() == 6);
    cert = certificates(traj.samples, cfg.params);
  }
};

struct TempDir {
  fs::path dir;
  explicit TempDir(const char* leaf) : dir(fs::path("ttout_tmp") / leaf) {
    fs::remove_all(dir);
  }
  ~TempDir() { fs::remove_all(dir.parent_path()); }
};

}  // namespace

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("trajectory and diagnostics round-trip bit for bit") {
  RunFixture fx;
  TempDir tmp("roundtrip");
  write_outputs(fx.traj, fx.cert, fx.cfg, tmp.dir);

  std::vector<SimState> back = read_trajectory_csv(tmp.dir / "trajectory.csv");
  REQUIRE(back.size() == fx.traj.samples.size());
  for (size_t k = 0; k < back.size(); ++k) {
    const SimState& a = fx.traj.samples[k].state;
    CHECK(back[k].t == fx.traj.samples[k].t);
    CHECK(back[k].n == a.n);
    CHECK(back[k].dim == a.dim);
    CHECK(back[k].x == a.x);  // exact: shortest round-trip decimals
    CHECK(back[k].v == a.v);
  }

  std::vector<DiagnosticsRow> rows =
      read_diagnostics_csv(tmp.dir / "diagnostics.csv");
  REQUIRE(rows.size() == fx.traj.samples.size());
  for (size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].e_tot == fx.traj.samples[k].energy.e_tot);
    CHECK(rows[k].dissipation == fx.traj.samples[k].energy.dissipation);
    CHECK(rows[k].agg_r == fx.traj.samples[k].distance.agg_r);
    CHECK(rows[k].max_radius == fx.traj.samples[k].distance.max_radius);
  }
}

TEST_CASE("summary schema and config echo") {
  RunFixture fx;
  TempDir tmp("summary");
  write_outputs(fx.traj, fx.cert, fx.cfg, tmp.dir);

  nlohmann::json s = nlohmann::json::parse(slurp(tmp.dir / "summary.json"));
  CHECK(s.at("status") == "completed");
  CHECK(s.at("sample_count") == 6);
  const nlohmann::json& c = s.at("certificates");
  for (const char* key :
       {"d_m", "psi_m", "collapse_threshold", "velocity_integral",
        "threshold_crossing_time", "equilibrium_residual"})
    CHECK(c.contains(key));
  CHECK(c.at("d_m").get<double>() == doctest::Approx(fx.cert.d_m));
  CHECK(parse_config(s.at("config").get<std::string>()) == fx.cfg);
}

TEST_CASE("manifest digests track the bytes") {
  RunFixture fx;
  TempDir tmp("manifest");
  Manifest man = write_outputs(fx.traj, fx.cert, fx.cfg, tmp.dir);
  REQUIRE(man.files.size() == 3);
  for (const auto& [name, digest] : man.files)
    CHECK(sha256_file(tmp.dir / name) == digest);
  CHECK(read_manifest(tmp.dir / "manifest.json") == man);

  SUBCASE("identical inputs give identical manifests") {
    fs::path other = tmp.dir.parent_path() / "manifest_b";
    Manifest man2 = write_outputs(fx.traj, fx.cert, fx.cfg, other);
    CHECK(man2 == man);
  }

  SUBCASE("one flipped byte changes exactly that digest") {
    std::string bytes = slurp(tmp.dir / "trajectory.csv");
    bytes[bytes.size() / 2] ^= 1;
    spit(tmp.dir / "trajectory.csv", bytes);
    CHECK(sha256_file(tmp.dir / "trajectory.csv") !=
          man.files["trajectory.csv"]);
    CHECK(sha256_file(tmp.dir / "diagnostics.csv") ==
          man.files["diagnostics.csv"]);
  }
}

TEST_CASE("verify accepts untouched outputs") {
  RunFixture fx;
  TempDir tmp("verify_ok");
  write_outputs(fx.traj, fx.cert, fx.cfg, tmp.dir);
  VerifyReport rep = verify_results(tmp.dir);
  CHECK(rep.failures.empty());
}

TEST_CASE("verify flags a tampered energy sample") {
  RunFixture fx;
  TempDir tmp("verify_tamper");
  write_outputs(fx.traj, fx.cert, fx.cfg, tmp.dir);

  SUBCASE("naive tamper trips the digest check") {
    std::string bytes = slurp(tmp.dir / "diagnostics.csv");
    bytes[bytes.find('\n') + 1] = '9';  // clobber the first data row's t
    spit(tmp.dir / "diagnostics.csv", bytes);
    VerifyReport rep = verify_results(tmp.dir);
    REQUIRE(!rep.ok());
    bool digest = false;
    for (const std::string& f : rep.failures)
      digest |= f.find("digest mismatch") != std::string::npos;
    CHECK(digest);
  }

  SUBCASE("tamper with a refreshed manifest still fails re-evaluation") {
    // add +1 to e_tot (column 3) of the last data row
    std::string bytes = slurp(tmp.dir / "diagnostics.csv");
    std::vector<std::string> lines;
    {
      std::istringstream in(bytes);
      std::string l;
      while (std::getline(in, l)) lines.push_back(l);
    }
    REQUIRE(lines.size() >= 3);
    std::string& row = lines.back();
    size_t start = 0;
    for (int c = 0; c < 3; ++c) start = row.find(',', start) + 1;
    size_t end = row.find(',', start);
    const double e_tot = std::stod(row.substr(start, end - start));
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), e_tot + 1.0);
    row = row.substr(0, start) + std::string(buf, res.ptr) + row.substr(end);
    std::string tampered;
    for (const std::string& l : lines) tampered += l + "\n";
    spit(tmp.dir / "diagnostics.csv", tampered);

    nlohmann::json m = nlohmann::json::parse(slurp(tmp.dir / "manifest.json"));
    m["files"]["diagnostics.csv"] = sha256_hex(tampered);
    spit(tmp.dir / "manifest.json", m.dump(2) + "\n");

    VerifyReport rep = verify_results(tmp.dir);
    REQUIRE(!rep.ok());
    bool semantic = false;
    for (const std::string& f : rep.failures)
      semantic |= f.find("digest") == std::string::npos;
    CHECK(semantic);  // caught by re-evaluation, not just hashing
  }
}

TEST_CASE("empty trajectory still produces a verifiable directory") {
  RunConfig cfg = parse_config("[init]\nn = 2\ndim = 1\n");
  Trajectory traj;
  traj.status = RunStatus::CollisionAbort;
  traj.events.push_back({EventKind::CollisionAbort, 0.0, 0, 1, 0.0});
  TempDir tmp("empty");
  write_outputs(traj, std::nullopt, cfg, tmp.dir);
  CHECK(read_trajectory_csv(tmp.dir / "trajectory.csv").empty());
  nlohmann::json s = nlohmann::json::parse(slurp(tmp.dir / "summary.json"));
  CHECK(s.at("status") == "collision_abort");
  CHECK(s.at("certificates").is_null());
  CHECK(verify_results(tmp.dir).ok());
}

TEST_CASE("results directory naming") {
  CHECK(results_dir_name("fig1_n10", 42, 0) ==
        "fig1_n10-seed42-19700101T000000Z");
  CHECK(results_dir_name("fig3_singular", 7, 1767225600) ==
        "fig3_singular-seed7-20260101T000000Z");
}

TEST_CASE("readers reject malformed files") {
  TempDir tmp("malformed");
  fs::create_directories(tmp.dir);
  spit(tmp.dir / "a.csv", "t,x_1_1\n");  // no velocity columns
  CHECK_THROWS_AS(read_trajectory_csv(tmp.dir / "a.csv"),
                  std::runtime_error);
  spit(tmp.dir / "b.csv",
       "t,x_1_1,v_1_1\n0,1\n");  // wrong column count in a row
  CHECK_THROWS_AS(read_trajectory_csv(tmp.dir / "b.csv"),
                  std::runtime_error);
  spit(tmp.dir / "c.csv", "t,x_1_1,v_1_1\n0,one,2\n");
  CHECK_THROWS_AS(read_trajectory_csv(tmp.dir / "c.csv"),
                  std::runtime_error);
  spit(tmp.dir / "d.csv", "time,energy\n");
  CHECK_THROWS_AS(read_diagnostics_csv(tmp.dir / "d.csv"),
                  std::runtime_error);
  CHECK_THROWS_AS(read_trajectory_csv(tmp.dir / "missing.csv"),
                  std::runtime_error);
}
