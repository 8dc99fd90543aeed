#include "chsd/driver.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "chsd/output.hpp"
#include "quad_loops.hpp"

namespace chsd {

namespace fs = std::filesystem;

RunLock::RunLock(const std::string& dir) : path_((fs::path(dir) / ".lock").string()) {
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) {
    if (errno == EEXIST)
      throw OutputError("output directory is locked by another run (remove '" + path_ +
                        "' if stale)");
    throw OutputError("cannot create lock file '" + path_ + "': " + std::strerror(errno));
  }
  std::fclose(f);
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

namespace {

void write_status(const fs::path& dir, const std::string& text) {
  std::ofstream out(dir / "run_status", std::ios::binary | std::ios::trunc);
  out << text << '\n';
  if (!out) throw OutputError("cannot write '" + (dir / "run_status").string() + "'");
}

std::string snapshot_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%06d.vtk", k);
  return buf;
}

bool same_ic(const InitialCondition& a, const InitialCondition& b) {
  return a.kind == b.kind && a.value == b.value && a.mean == b.mean && a.amplitude == b.amplitude &&
         a.seed == b.seed && a.width == b.width && a.center == b.center && a.radius == b.radius;
}

bool same_mesh(const KarstLayout& a, const KarstLayout& b) {
  return a.nx == b.nx && a.ny == b.ny && a.Lx == b.Lx && a.Ly == b.Ly &&
         a.y_interface == b.y_interface && a.conduit_enclosed == b.conduit_enclosed &&
         a.x0 == b.x0 && a.x1 == b.x1 && a.y0 == b.y0;
}

}  // namespace

RunSummary run_config(const Config& config, const ProgressCallback& progress) {
  config.validate();
  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw OutputError("cannot create output directory '" + dir.string() + "': " + ec.message());
  RunLock lock(dir.string());
  write_status(dir, "running");

  const Mesh mesh = build_rect_karst(config.mesh);
  const SpaceSet spaces(mesh);
  const Params params = config.params();
  Stepper stepper(spaces, params);

  {
    std::ofstream echo(dir / "config.used", std::ios::binary | std::ios::trunc);
    echo << serialize(config);
  }

  RunSummary summary;
  summary.csv_path = (dir / config.csv_name).string();
  TimeseriesWriter csv(summary.csv_path);

  State init = stepper.initial_state(config.ic);
  auto snapshot = [&](const State& s, const Vector& phi_coeff) {
    const std::string path = (dir / snapshot_name(s.k)).string();
    write_snapshot(path, s, spaces, darcy_velocity(s, phi_coeff, params, spaces));
    summary.snapshots.push_back(path);
  };
  snapshot(init, init.phi);

  Vector phi_prev = init.phi;
  const double t_end = init.t + config.T;
  summary.result = run(stepper, std::move(init), config.T, [&](const State& s, const StepReport& r) {
    csv.append(r);
    const bool last = t_end - s.t <= 1e-9 * params.dt;
    const bool periodic = config.snapshot_every > 0 && s.k % config.snapshot_every == 0;
    if (last || periodic) snapshot(s, phi_prev);
    phi_prev = s.phi;
    if (progress) progress(r);
  });

  const RunResult& res = summary.result;
  if (res.complete) {
    write_status(dir, "complete");
  } else {
    write_status(dir, "incomplete: " + res.failure);
    // Keep the last accepted state for inspection.
    if (summary.snapshots.back() != (dir / snapshot_name(res.final_state.k)).string())
      snapshot(res.final_state, phi_prev);
  }
  return summary;
}

State run_quiet(const Config& config) {
  config.validate();
  const Mesh mesh = build_rect_karst(config.mesh);
  const SpaceSet spaces(mesh);
  Stepper stepper(spaces, config.params());
  RunResult res = run(stepper, stepper.initial_state(config.ic), config.T);
  if (!res.complete) throw NumericalFailure("run with dt = " + std::to_string(config.dt) + " failed: " + res.failure);
  return std::move(res.final_state);
}

double phase_l2(const SpaceSet& spaces, const Vector& phi) {
  const Space& X = spaces.phase;
  double r = 0.0;
  detail::for_each_cell_point(spaces.mesh, std::nullopt,
                              [&](const detail::CellPoint& cp, const CellFrame&) {
                                const double v = detail::field_at(phi, X.cell_nodes(cp.p.cell), cp.N);
                                r += cp.w * v * v;
                              });
  return std::sqrt(r);
}

ConvergenceResult self_convergence(const Config& config, const std::vector<double>& dt_list) {
  std::vector<Config> configs;
  for (double dt : dt_list) {
    Config c = config;
    c.dt = dt;
    configs.push_back(c);
  }
  return self_convergence(configs);
}

ConvergenceResult self_convergence(const std::vector<Config>& configs) {
  if (configs.size() < 3)
    throw ConfigError("self-convergence needs at least three time steps");
  const Config& ref = configs.front();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const Config& c = configs[i];
    if (c.ic.seed != ref.ic.seed) throw ConfigError("self-convergence: mismatched seeds");
    if (!same_ic(c.ic, ref.ic)) throw ConfigError("self-convergence: mismatched initial conditions");
    if (!same_mesh(c.mesh, ref.mesh)) throw ConfigError("self-convergence: mismatched meshes");
    if (c.T != ref.T) throw ConfigError("self-convergence: mismatched final times");
    if (i > 0 && std::abs(configs[i - 1].dt / c.dt - 2.0) > 1e-12)
      throw ConfigError("self-convergence: each dt must halve the previous one");
    c.validate();
  }

  const Mesh mesh = build_rect_karst(ref.mesh);
  const SpaceSet spaces(mesh);
  ConvergenceResult r;
  std::vector<Vector> finals;
  for (const Config& c : configs) {
    r.dts.push_back(c.dt);
    finals.push_back(run_quiet(c).phi);
  }
  double scale = 0.0;
  for (const Vector& phi : finals) scale = std::max(scale, phase_l2(spaces, phi));
  for (std::size_t i = 0; i + 1 < finals.size(); ++i)
    r.differences.push_back(phase_l2(spaces, finals[i] - finals[i + 1]));

  const double floor = 1e-13 * std::max(1.0, scale);
  r.exact = std::all_of(r.differences.begin(), r.differences.end(),
                        [&](double d) { return d <= floor; });
  if (!r.exact)
    for (std::size_t i = 0; i + 1 < r.differences.size(); ++i)
      r.ratios.push_back(r.differences[i] / r.differences[i + 1]);
  r.monotone = true;
  for (std::size_t i = 0; i + 1 < r.differences.size(); ++i)
    if (!(r.differences[i + 1] < r.differences[i])) r.monotone = false;
  return r;
}

}  // namespace chsd
