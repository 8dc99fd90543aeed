#include <doctest.h>

#include <stdexcept>

#include <string>

#include "chsd/config.hpp"

using namespace chsd;

namespace {

const std::string kMinimal =
    "# smallest valid file\n"
    "nx = 8\nny = 8\nepsilon = 0.1\ndt = 1e-3\nT = 0.01\nic = uniform\n";

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal file takes documented defaults") {
  const Config c = parse_config_text(kMinimal);
  CHECK_NOTHROW(c.validate());
  CHECK(c.mesh.nx == 8);
  CHECK(c.epsilon == 0.1);
  CHECK(c.varpi == 1.0);
  CHECK(c.alpha_bjsj == 1.0);
  CHECK(c.kappa_model == "constant");
  CHECK(c.mesh.y_interface == 0.5);
  CHECK(c.picard.tol_rel == 1e-8);
  CHECK(c.picard.max_iter == 50);
  CHECK(c.picard.max_dt_halvings == 5);
  CHECK(c.picard.cubic == CubicLinearization::Newton);
  CHECK(c.ic.kind == InitialCondition::Kind::Uniform);
  CHECK(c.ic.seed == 42);
  CHECK(c.output_dir == "output");
  CHECK(c.csv_name == "timeseries.csv");
  CHECK(c.steps() == 10);
}

TEST_CASE("defaults follow the domain size") {
  const Config c = parse_config_text(kMinimal + "Lx = 2\nLy = 4\n");
  CHECK(c.mesh.y_interface == 2.0);
  CHECK(c.ic.width == 1.0);
  CHECK(c.ic.center.x == 1.0);
  CHECK(c.ic.center.y == 2.0);
  CHECK(c.ic.radius == 0.5);
}

TEST_CASE("constraint violations name the key") {
  const std::string neg = "nx = 8\nny = 8\nepsilon = -0.1\ndt = 1e-3\nT = 0.01\nic = uniform\n";
  const std::string msg = error_of(neg);
  CHECK(msg.find("epsilon") != std::string::npos);
  CHECK(msg.find("epsilon > 0") != std::string::npos);

  CHECK(error_of(kMinimal + "kappa = 0\n").find("kappa") != std::string::npos);
  CHECK(error_of(kMinimal + "nu1 = 0\n").find("nu1") != std::string::npos);
  CHECK(error_of(kMinimal + "alpha_bjsj = -1\n").find("alpha_bjsj") != std::string::npos);
  CHECK(error_of(kMinimal + "ic_value = 5\n").find("ic_value") != std::string::npos);
  CHECK(error_of(kMinimal + "csv_name = a/b.csv\n").find("csv_name") != std::string::npos);
  CHECK(error_of(kMinimal + "snapshot_every = -1\n").find("snapshot_every") != std::string::npos);
}

TEST_CASE("inertialess flow is admissible") {
  const Config c = parse_config_text(kMinimal + "varpi = 0\n");
  CHECK_NOTHROW(c.validate());
  CHECK(c.params().varpi == 0.0);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_config_text(kMinimal + "bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(kMinimal + "nx = 9\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(kMinimal + "varpi\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(kMinimal + "varpi = \n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(kMinimal + "varpi = 1x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(kMinimal + "picard_cubic = exact\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("nx = 8\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("/nonexistent/run.cfg"), ConfigError);
  try {
    parse_config_text(kMinimal + "bogus = 1\n", "run.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("run.cfg:8") != std::string::npos);
  }
}

TEST_CASE("final time must be a whole number of steps") {
  const std::string t = "nx = 8\nny = 8\nepsilon = 0.1\ndt = 3e-3\nT = 0.01\nic = uniform\n";
  CHECK(error_of(t).find("T") != std::string::npos);
}

TEST_CASE("interface must lie on a grid line") {
  const std::string msg = error_of(kMinimal + "y_interface = 0.3\n");
  CHECK(msg.find("grid spacing") != std::string::npos);
}

TEST_CASE("serialization round-trips") {
  const Config c = parse_config_text(kMinimal + "kappa_model = linear_x\nkappa_slope = 0.5\n"
                                                "picard_cubic = lagged\nic_mean = 0.1\nseed = 7\n");
  const std::string once = serialize(c);
  const Config back = parse_config_text(once);
  CHECK(serialize(back) == once);
  CHECK(back.kappa_slope == 0.5);
  CHECK(back.picard.cubic == CubicLinearization::Lagged);
  CHECK(back.ic.seed == 7);
  CHECK(back.dt == c.dt);
}

TEST_CASE("linear permeability bounds") {
  const Config c = parse_config_text(kMinimal + "kappa_model = linear_x\nkappa = 2\nkappa_slope = -0.5\n");
  const Params p = c.params();
  CHECK(p.kappa.lower() == doctest::Approx(1.0));
  CHECK(p.kappa.upper() == doctest::Approx(2.0));
  CHECK(p.kappa(QPoint{0, {}, Vec2{1.0, 0.0}}) == doctest::Approx(1.0));
}
