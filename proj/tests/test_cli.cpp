#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "delaystab/cli.hpp"
#include "delaystab/system_model.hpp"
#include "oracles.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "json.hpp"

using namespace delaystab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("delaystab_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int counter;
};
int TempDir::counter = 0;

std::string write_spec(const TempDir& dir, const SystemFile& file, const std::string& name) {
  const std::string p = dir.file(name);
  save_system(file, p);
  return p;
}

// capture stdout of a run_cli invocation
int run_capture(const std::vector<std::string>& args, std::string& out) {
  std::stringstream buffer;
  std::streambuf* old = std::cout.rdbuf(buffer.rdbuf());
  const int rc = run_cli(args);
  std::cout.rdbuf(old);
  out = buffer.str();
  return rc;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("analyze prints the windowed abscissa") {
  TempDir dir;
  SystemFile file;
  file.spec = oracles::scalar_ide(0.5, 1.0);
  const std::string spec = write_spec(dir, file, "spec.json");
  std::string out;
  const int rc = run_capture({"analyze", spec, "--window", "-2", "1", "20", "--out", dir.file("o")}, out);
  CHECK(rc == 0);
  CHECK(out.find("abscissa=-0.693147") != std::string::npos);
  CHECK(out.find("windowed=true") != std::string::npos);
  CHECK(fs::exists(dir.file("o") + "/spectrum.csv"));
}

TEST_CASE("analyze on empty dynamics reports none-in-window") {
  TempDir dir;
  SystemFile file;
  file.spec.kind = Kind::IDE;
  file.spec.dimension = 1;
  file.spec.tau_star = 1.0;
  const std::string spec = write_spec(dir, file, "spec.json");
  std::string out;
  const int rc = run_capture({"analyze", spec, "--window", "-2", "1", "10", "--out", dir.file("o")}, out);
  CHECK(rc == 0);
  CHECK(out.find("abscissa=none-in-window") != std::string::npos);
}

TEST_CASE("malformed JSON exits 2 with a parse error") {
  TempDir dir;
  const std::string bad = dir.file("bad.json");
  std::ofstream(bad) << "{ this is not json";
  std::string out;
  const int rc = run_capture({"analyze", bad}, out);
  CHECK(rc == 2);
}

TEST_CASE("validation failures exit 2 and name the field") {
  TempDir dir;
  SystemFile file;
  file.spec = oracles::scalar_ide(0.5, 1.0);
  file.spec.delay_terms[0].tau = 2.5;  // outside (0, tau*]
  const std::string spec = write_spec(dir, file, "spec.json");
  std::string out;
  CHECK(run_capture({"analyze", spec}, out) == 2);
}

TEST_CASE("simulate writes trajectory and the staircase norm series") {
  TempDir dir;
  SystemFile file;
  file.spec = oracles::scalar_ide(0.5, 1.0);
  file.history = oracles::constant_history(file.spec, 0.01, 1.0);
  const std::string spec = write_spec(dir, file, "spec.json");
  std::string out;
  const int rc = run_capture(
      {"simulate", spec, "--horizon", "5", "--norm", "sup", "--out", dir.file("o")}, out);
  CHECK(rc == 0);
  CHECK(out.find("nu_hat=") != std::string::npos);
  CHECK(out.find("C_hat=") != std::string::npos);

  const std::string norms = slurp(dir.file("o") + "/norms.csv");
  REQUIRE(!norms.empty());
  CHECK(norms.substr(0, 7) == "t,norm\n");
  // the sup series steps 1, 0.5, 0.25, 0.125, 0.0625 at t = 0+, 1, 2, 3, 4
  std::istringstream in(norms);
  std::string line;
  std::getline(in, line);
  double expect_at[5] = {1.0, 0.5, 0.25, 0.125, 0.0625};
  int seen = 0;
  while (std::getline(in, line)) {
    double t, v;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &t, &v) == 2);
    for (int k = 0; k < 5; ++k)
      if (std::abs(t - (0.25 + k)) < 1e-9) {  // interior of each unit interval
        CHECK(v == doctest::Approx(expect_at[k]).epsilon(1e-10));
        ++seen;
      }
  }
  CHECK(seen == 5);

  const std::string traj = slurp(dir.file("o") + "/trajectory.csv");
  CHECK(traj.substr(0, 5) == "t,x1\n");
}

TEST_CASE("simulate without a history exits 2") {
  TempDir dir;
  SystemFile file;
  file.spec = oracles::scalar_ide(0.5, 1.0);
  const std::string spec = write_spec(dir, file, "spec.json");
  std::string out;
  CHECK(run_capture({"simulate", spec}, out) == 2);
}

TEST_CASE("DDE spec without x0 fails validation on load") {
  TempDir dir;
  SystemFile file;
  file.spec = oracles::scalar_dde(0.1, 1.0);
  file.history = oracles::constant_history(file.spec, 0.05, 1.0);
  file.history->x0.reset();  // serializer omits the field, loader then rejects
  const std::string spec = write_spec(dir, file, "spec.json");
  std::string out;
  CHECK(run_capture({"simulate", spec, "--horizon", "5"}, out) == 2);
}

TEST_CASE("zero history produces all-zero CSVs") {
  TempDir dir;
  SystemFile file;
  file.spec = oracles::scalar_ide(0.5, 1.0);
  file.history = oracles::constant_history(file.spec, 0.05, 0.0);
  const std::string spec = write_spec(dir, file, "spec.json");
  std::string out;
  const int rc = run_capture({"simulate", spec, "--horizon", "6", "--out", dir.file("o")}, out);
  CHECK(rc == 0);
  std::istringstream in(slurp(dir.file("o") + "/trajectory.csv"));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    double t, v;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &t, &v) == 2);
    CHECK(v == 0.0);
  }
}

TEST_CASE("verify emits the criterion report") {
  TempDir dir;
  SystemFile file;
  file.spec = oracles::scalar_ide(0.5, 1.0);
  const std::string spec = write_spec(dir, file, "spec.json");
  std::string out;
  const int rc = run_capture({"verify", spec, "--window", "-2", "1", "20", "--horizon", "20",
                              "--step", "0.01", "--out", dir.file("o")},
                             out);
  CHECK(rc == 0);
  CHECK(out.find("verdict=stable") != std::string::npos);

  const auto j = nlohmann::json::parse(slurp(dir.file("o") + "/report.json"));
  CHECK(j.at("verdict") == "stable");
  CHECK(j.at("windowed_abscissa").get<double>() == doctest::Approx(std::log(0.5)).epsilon(1e-6));
  CHECK(j.at("per_history").size() == 3);
  for (const auto& e : j.at("per_history")) {
    CHECK(e.at("norm_kind") == "sup");
    CHECK(e.at("nu_hat").get<double>() > 0.0);
    CHECK(e.at("C_hat").get<double>() >= 1.0);
  }
  CHECK(fs::exists(dir.file("o") + "/spectrum.csv"));
  CHECK(fs::exists(dir.file("o") + "/norms_constant.csv"));
  CHECK(fs::exists(dir.file("o") + "/norms_sawtooth.csv"));
  CHECK(fs::exists(dir.file("o") + "/norms_modal.csv"));
}

TEST_CASE("verify flags the unstable fixture") {
  TempDir dir;
  SystemFile file;
  file.spec = oracles::scalar_ide(2.0, 1.0);
  const std::string spec = write_spec(dir, file, "spec.json");
  std::string out;
  const int rc = run_capture({"verify", spec, "--window", "-2", "1", "20", "--horizon", "15",
                              "--step", "0.01", "--out", dir.file("o")},
                             out);
  CHECK(rc == 0);
  CHECK(out.find("verdict=unstable") != std::string::npos);
}

TEST_CASE("probe subcommands write their CSVs") {
  TempDir dir;
  SystemFile file;
  file.spec = oracles::scalar_ide(0.5, 1.0);
  oracles::add_const_kernel(file.spec, 0.2, 0.0, 1.0);
  const std::string spec = write_spec(dir, file, "spec.json");

  std::string out;
  int rc = run_capture({"probe", spec, "--probe", "rl", "--beta", "1", "--out", dir.file("o")}, out);
  CHECK(rc == 0);
  const std::string rl = slurp(dir.file("o") + "/rl.csv");
  CHECK(rl.substr(0, 13) == "y,sup_x_absR\n");

  SystemFile atom;
  atom.spec = oracles::scalar_ide(0.5, 1.0);
  const std::string atom_spec = write_spec(dir, atom, "atom.json");
  rc = run_capture({"probe", atom_spec, "--probe", "levin", "--beta", "1", "--delta", "0.3",
                    "--out", dir.file("o")},
                   out);
  CHECK(rc == 0);
  CHECK(slurp(dir.file("o") + "/levin.csv").substr(0, 22) == "y_max,empirical_min\n20");
}

TEST_CASE("probe with delta >= beta exits 2") {
  TempDir dir;
  SystemFile file;
  file.spec = oracles::scalar_ide(0.5, 1.0);
  const std::string spec = write_spec(dir, file, "spec.json");
  std::string out;
  CHECK(run_capture({"probe", spec, "--probe", "levin", "--beta", "1", "--delta", "1.5"}, out) == 2);
}

TEST_CASE("char-eval prints the determinant") {
  TempDir dir;
  SystemFile file;
  file.spec = oracles::scalar_ide(0.5, 1.0);
  const std::string spec = write_spec(dir, file, "spec.json");
  std::string out;
  const int rc = run_capture({"char-eval", spec, "--z", "0", "0"}, out);
  CHECK(rc == 0);
  CHECK(out.find("det=(1.5,") != std::string::npos);
  CHECK(out.find("abs_det=1.5") != std::string::npos);
}

TEST_CASE("identical runs produce byte-identical outputs") {
  TempDir dir;
  SystemFile file;
  file.spec = oracles::scalar_ide(0.5, 1.0);
  file.history = oracles::constant_history(file.spec, 0.02, 1.0);
  const std::string spec = write_spec(dir, file, "spec.json");
  std::string out;
  REQUIRE(run_capture({"simulate", spec, "--horizon", "8", "--out", dir.file("a")}, out) == 0);
  REQUIRE(run_capture({"simulate", spec, "--horizon", "8", "--out", dir.file("b")}, out) == 0);
  CHECK(slurp(dir.file("a") + "/trajectory.csv") == slurp(dir.file("b") + "/trajectory.csv"));
  CHECK(slurp(dir.file("a") + "/norms.csv") == slurp(dir.file("b") + "/norms.csv"));

  REQUIRE(run_capture({"analyze", spec, "--window", "-2", "1", "20", "--out", dir.file("c")}, out) == 0);
  REQUIRE(run_capture({"analyze", spec, "--window", "-2", "1", "20", "--out", dir.file("d")}, out) == 0);
  CHECK(slurp(dir.file("c") + "/spectrum.csv") == slurp(dir.file("d") + "/spectrum.csv"));
}

TEST_CASE("unknown subcommand or missing spec exit 2") {
  std::string out;
  CHECK(run_capture({"frobnicate", "x.json"}, out) == 2);
  CHECK(run_capture({"analyze", "/nonexistent/spec.json"}, out) == 2);
}
