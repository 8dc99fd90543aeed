#pragma once

#include <stdexcept>
#include <string>

#include "chsd/mesh.hpp"
#include "chsd/model.hpp"

namespace chsd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run configuration. Parsed from a flat `key = value` file; `#` starts a
/// comment. Keys and defaults:
///
///   mesh     nx, ny (required, >= 2); Lx = 1; Ly = 1; y_interface = Ly/2;
///            conduit_enclosed = false; conduit_x0 = Lx/4; conduit_x1 = 3Lx/4;
///            conduit_y0 = Ly/4 (enclosed conduit is [x0,x1] x [y0,y_interface])
///   physics  epsilon (required, > 0); varpi = 1; alpha_bjsj = 1;
///            kappa_model = constant | linear_x; kappa = 1; kappa_slope = 0
///            (linear_x: kappa (1 + kappa_slope x / Lx)); nu1 = nu2 = 1; m1 = m2 = 1
///            (nu(phi) = nu1 (1+phi)/2 + nu2 (1-phi)/2, phi clamped to [-1,1]; same for M)
///   scheme   dt, T (required; T an integer multiple of dt); picard_tol = 1e-8;
///            picard_max_iter = 50; picard_max_halvings = 5;
///            picard_cubic = newton | lagged; energy_tol_factor = 100
///   ic       ic = uniform | random | stripe | bubble (required); ic_value = 0;
///            ic_mean = 0; ic_amplitude = 0.05; seed = 42; ic_width = Lx/2;
///            ic_center_x = Lx/2; ic_center_y = Ly/2; ic_radius = min(Lx,Ly)/4
///   output   output_dir = output; snapshot_every = 0 (0: first and last only);
///            csv_name = timeseries.csv
struct Config {
  KarstLayout mesh;

  double varpi = 1.0;
  double epsilon = 0.05;
  double alpha_bjsj = 1.0;
  std::string kappa_model = "constant";
  double kappa = 1.0;
  double kappa_slope = 0.0;
  double nu1 = 1.0, nu2 = 1.0;
  double m1 = 1.0, m2 = 1.0;

  double dt = 1e-4;
  double T = 0.0;
  PicardControls picard;
  double energy_tol_factor = 100.0;

  InitialCondition ic;

  std::string output_dir = "output";
  int snapshot_every = 0;
  std::string csv_name = "timeseries.csv";

  /// Number of base time steps, T / dt.
  int steps() const;
  Params params() const;
  /// Throws ConfigError naming the key and the violated constraint.
  void validate() const;
};

/// Largest admissible |phase| in initial-condition parameters.
constexpr double kPhaseRangeSlack = 0.1;

Config parse_config(const std::string& path);
Config parse_config_text(const std::string& text, const std::string& origin = "<string>");
/// Every key, sorted, one per line, shortest round-trip numbers.
std::string serialize(const Config& config);

}  // namespace chsd
