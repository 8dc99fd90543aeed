#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "chsd/driver.hpp"

using namespace chsd;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("chsd_driver_" + name);
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Config small(const fs::path& dir) {
  Config c = parse_config_text(
      "nx = 4\nny = 4\nepsilon = 0.2\ndt = 1e-3\nT = 5e-3\nic = random\n"
      "ic_amplitude = 0.1\nseed = 11\nsnapshot_every = 2\n");
  c.output_dir = dir.string();
  return c;
}

}  // namespace

TEST_CASE("a run leaves a complete output directory") {
  const fs::path d = scratch("run");
  const RunSummary s = run_config(small(d));
  CHECK(s.result.complete);
  CHECK(s.result.reports.size() == 5);
  CHECK(slurp(d / "run_status") == "complete\n");
  CHECK(fs::exists(d / "config.used"));
  CHECK(!fs::exists(d / ".lock"));
  // Steps 0, 2, 4 and the final step 5.
  REQUIRE(s.snapshots.size() == 4);
  for (const auto& f : s.snapshots) CHECK(fs::exists(f));
  CHECK(fs::path(s.snapshots.front()).filename() == "snapshot_000000.vtk");
  CHECK(fs::path(s.snapshots.back()).filename() == "snapshot_000005.vtk");

  const Config echoed = parse_config((d / "config.used").string());
  CHECK(serialize(echoed) == serialize(small(d)));
}

TEST_CASE("a locked directory is refused") {
  const fs::path d = scratch("lock");
  fs::create_directories(d);
  {
    RunLock held(d.string());
    CHECK_THROWS_AS(run_config(small(d)), OutputError);
    CHECK_THROWS_AS(RunLock(d.string()), OutputError);
  }
  CHECK(!fs::exists(d / ".lock"));
  CHECK_NOTHROW(run_config(small(d)));
}

TEST_CASE("invalid config is refused before any output") {
  const fs::path d = scratch("invalid");
  Config c = small(d);
  c.epsilon = -1.0;
  CHECK_THROWS_AS(run_config(c), ConfigError);
  CHECK(!fs::exists(d));
}

TEST_CASE("a failing run is marked incomplete") {
  const fs::path d = scratch("fail");
  Config c = small(d);
  c.picard.max_iter = 1;
  c.picard.max_dt_halvings = 0;
  const RunSummary s = run_config(c);
  CHECK(!s.result.complete);
  CHECK(slurp(d / "run_status").rfind("incomplete", 0) == 0);
  CHECK(!s.snapshots.empty());
  CHECK_THROWS_AS(run_quiet(c), NumericalFailure);
}

TEST_CASE("self-convergence of a stationary state is exact") {
  Config c = parse_config_text("nx = 4\nny = 4\nepsilon = 0.2\ndt = 4e-3\nT = 8e-3\nic = uniform\nic_value = 1\n");
  const ConvergenceResult r = self_convergence(c, {4e-3, 2e-3, 1e-3});
  CHECK(r.exact);
  CHECK(r.ratios.empty());
  CHECK(r.differences.size() == 2);
}

TEST_CASE("self-convergence input checks") {
  const Config c = parse_config_text("nx = 4\nny = 4\nepsilon = 0.2\ndt = 4e-3\nT = 8e-3\nic = random\n");
  CHECK_THROWS_AS(self_convergence(c, {4e-3, 2e-3}), ConfigError);
  CHECK_THROWS_AS(self_convergence(c, {4e-3, 3e-3, 1e-3}), ConfigError);
  std::vector<Config> cs(3, c);
  cs[1].dt = 2e-3;
  cs[2].dt = 1e-3;
  cs[2].ic.seed = 1;
  CHECK_THROWS_AS(self_convergence(cs), ConfigError);
  cs[2].ic.seed = c.ic.seed;
  cs[2].mesh.nx = 8;
  CHECK_THROWS_AS(self_convergence(cs), ConfigError);
}

TEST_CASE("phase norm") {
  const Mesh m = build_rect_karst(4, 4, 1.0, 1.0, 0.5, false);
  const SpaceSet s(m);
  CHECK(phase_l2(s, Vector::Constant(s.phase.size(), 2.0)) == doctest::Approx(2.0).epsilon(1e-13));
}
