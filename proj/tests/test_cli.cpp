#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "csb/output.hpp"

using namespace csb;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// run the installed binary through the shell, capturing both streams
CliResult run_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const fs::path dir = fs::path("ttcli_tmp") / "streams";
  fs::create_directories(dir);
  const fs::path out = dir / ("out" + std::to_string(counter));
  const fs::path err = dir / ("err" + std::to_string(counter));
  ++counter;
  std::string cmd = env;
  if (!cmd.empty()) cmd += " ";
  cmd += std::string("\"") + CSB_CLI_PATH + "\" " + args + " > " +
         out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  CliResult res;
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  res.out = slurp(out);
  res.err = slurp(err);
  return res;
}

// the directory named on the "results: <path>" stdout line
fs::path results_dir(const CliResult& res) {
  const std::string tag = "results: ";
  size_t at = res.out.find(tag);
  REQUIRE(at != std::string::npos);
  size_t end = res.out.find('\n', at);
  return fs::path(res.out.substr(at + tag.size(), end - at - tag.size()));
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(text.data(), std::streamsize(text.size()));
  REQUIRE(out.good());
}

const char* kSmallConfig =
    "[init]\nn = 3\ndim = 2\nseed = 5\npos_box = -3 3\nvel_box = -1 1\n"
    "[model]\nkernel = regular\n"
    "[run]\nt_end = 1\nsample_every = 0.25\noutput_dir = ttcli_tmp/sim\n";

struct Cleanup {
  ~Cleanup() { fs::remove_all("ttcli_tmp"); }
} cleanup_on_exit;

}  // namespace

TEST_CASE("simulate runs, writes a results directory, and verifies") {
  write_text("ttcli_tmp/small.cfg", kSmallConfig);
  CliResult res = run_cli("simulate ttcli_tmp/small.cfg");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("status: completed") != std::string::npos);
  CHECK(res.out.find("certificates: ok") != std::string::npos);

  const fs::path dir = results_dir(res);
  for (const char* name :
       {"trajectory.csv", "diagnostics.csv", "summary.json", "manifest.json"})
    CHECK(fs::exists(dir / name));

  CliResult ver = run_cli("verify " + dir.string());
  CHECK(ver.exit_code == 0);
  CHECK(ver.out.find("verify: ok") != std::string::npos);

  SUBCASE("tampering turns verify into exit 1") {
    std::ifstream in(dir / "diagnostics.csv", std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string bytes = buf.str();
    bytes[bytes.find('\n') + 1] = '9';
    write_text(dir / "diagnostics.csv", bytes);
    CliResult bad = run_cli("verify " + dir.string());
    CHECK(bad.exit_code == 1);
    CHECK(bad.err.find("verify failure") != std::string::npos);
  }
}

TEST_CASE("config errors exit 3") {
  write_text("ttcli_tmp/bad.cfg", "[model]\nkernel = singular\nalpha = 0.5\n");
  CliResult res = run_cli("simulate ttcli_tmp/bad.cfg");
  CHECK(res.exit_code == 3);
  CHECK(res.err.find("alpha >= 1") != std::string::npos);

  CHECK(run_cli("simulate ttcli_tmp/absent.cfg").exit_code == 3);
  CHECK(run_cli("scenario not_a_study").exit_code == 3);
  CHECK(run_cli("bogus_subcommand").exit_code == 3);
  CHECK(run_cli("").exit_code == 3);  // a subcommand is required

  SUBCASE("flag overrides hit the same validation") {
    write_text("ttcli_tmp/small.cfg", kSmallConfig);
    CliResult flag = run_cli(
        "simulate ttcli_tmp/small.cfg --kernel singular --alpha 0.5");
    CHECK(flag.exit_code == 3);
    CHECK(flag.err.find("alpha >= 1") != std::string::npos);
    CHECK(run_cli("simulate ttcli_tmp/small.cfg --n 1").exit_code == 3);
  }
}

TEST_CASE("simulation abort exits 2") {
  // every particle is drawn from a degenerate box at the origin, so the
  // initial state is already collided
  write_text("ttcli_tmp/collide.cfg",
             "[init]\nn = 2\ndim = 1\npos_box = 0 0\n"
             "[run]\nt_end = 1\noutput_dir = ttcli_tmp/collide_out\n");
  CliResult res = run_cli("simulate ttcli_tmp/collide.cfg");
  CHECK(res.exit_code == 2);
  CHECK(res.out.find("collision_abort") != std::string::npos);
  // the aborted run still leaves a verifiable directory behind
  CliResult ver = run_cli("verify " + results_dir(res).string());
  CHECK(ver.exit_code == 0);
}

TEST_CASE("flag overrides reshape the run") {
  write_text("ttcli_tmp/small.cfg", kSmallConfig);
  CliResult res = run_cli(
      "simulate ttcli_tmp/small.cfg --n 4 --t-end 0.5 --seed 9 "
      "--out ttcli_tmp/override_out");
  REQUIRE(res.exit_code == 0);
  const fs::path dir = results_dir(res);
  CHECK(dir.string().find("ttcli_tmp/override_out") == 0);
  CHECK(dir.string().find("seed9") != std::string::npos);
  std::vector<SimState> states = read_trajectory_csv(dir / "trajectory.csv");
  REQUIRE(!states.empty());
  CHECK(states[0].n == 4);
  CHECK(states.back().t == 0.5);

  SUBCASE("the seed is what varies the data") {
    CliResult again = run_cli(
        "simulate ttcli_tmp/small.cfg --n 4 --t-end 0.5 --seed 10 "
        "--out ttcli_tmp/override_out2");
    REQUIRE(again.exit_code == 0);
    std::vector<SimState> other =
        read_trajectory_csv(results_dir(again) / "trajectory.csv");
    CHECK(other[0].x != states[0].x);
  }
}

TEST_CASE("scenario command smoke-runs a named study") {
  CliResult res = run_cli(
      "scenario fig3_regular --t-end 5 --out ttcli_tmp/scen_out");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("[fig3_regular] near_zero_crossing: pass") !=
        std::string::npos);
  CHECK(res.out.find("overall: pass") != std::string::npos);
  const fs::path dir = results_dir(res);
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(run_cli("verify " + dir.string()).exit_code == 0);

  SUBCASE("a shrunken horizon fails the long-run gates with exit 1") {
    CliResult fail = run_cli(
        "scenario fig1_n10 --t-end 2 --out ttcli_tmp/scen_fail");
    CHECK(fail.exit_code == 1);
    CHECK(fail.out.find("FAIL") != std::string::npos);
  }
}

TEST_CASE("environment overrides: output root and threads") {
  write_text("ttcli_tmp/small.cfg", kSmallConfig);
  CliResult res = run_cli("simulate ttcli_tmp/small.cfg",
                          "CSB_OUTPUT_ROOT=ttcli_tmp/env_root");
  REQUIRE(res.exit_code == 0);
  CHECK(results_dir(res).string().find("ttcli_tmp/env_root") == 0);

  SUBCASE("threaded runs reproduce themselves") {
    CliResult a = run_cli("simulate ttcli_tmp/small.cfg --out ttcli_tmp/t2a",
                          "CSB_THREADS=2");
    CliResult b = run_cli("simulate ttcli_tmp/small.cfg --out ttcli_tmp/t2b",
                          "CSB_THREADS=2");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(sha256_file(results_dir(a) / "trajectory.csv") ==
          sha256_file(results_dir(b) / "trajectory.csv"));
  }

  SUBCASE("a malformed thread count is a config error") {
    CHECK(run_cli("simulate ttcli_tmp/small.cfg", "CSB_THREADS=abc")
              .exit_code == 3);
    CHECK(run_cli("simulate ttcli_tmp/small.cfg", "CSB_THREADS=0")
              .exit_code == 3);
  }
}

TEST_CASE("help exits cleanly") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("simulate --help").exit_code == 0);
}
