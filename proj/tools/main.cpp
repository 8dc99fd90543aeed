#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chsd/config.hpp"
#include "chsd/driver.hpp"
#include "chsd/output.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericalFailure = 2;

void print_dofs(const chsd::Config& cfg) {
  const chsd::Mesh mesh = chsd::build_rect_karst(cfg.mesh);
  const chsd::SpaceSet s(mesh);
  const int total = s.velocity.size() + s.conduit_pressure.size() + s.matrix_pressure.size() + 1 +
                    2 * s.phase.size();
  std::cerr << "dofs: u_c " << s.velocity.size() << ", P_c " << s.conduit_pressure.size()
            << ", P_m " << s.matrix_pressure.size() << " (+1 mean multiplier), phi "
            << s.phase.size() << ", mu " << s.phase.size() << ", total " << total << '\n';
}

void print_mesh_info(const chsd::Config& cfg) {
  using chsd::FacetTag;
  using chsd::Subdomain;
  const chsd::Mesh mesh = chsd::build_rect_karst(cfg.mesh);
  std::cerr << "vertices " << mesh.vertices.size() << ", cells " << mesh.cells.size() << " ("
            << mesh.count_cells(Subdomain::Conduit) << " conduit, "
            << mesh.count_cells(Subdomain::Matrix) << " matrix)\n"
            << "facets " << mesh.facets.size() << ": GammaC " << mesh.count_facets(FacetTag::GammaC)
            << ", GammaM " << mesh.count_facets(FacetTag::GammaM) << ", GammaCM "
            << mesh.count_facets(FacetTag::GammaCM) << ", interior "
            << mesh.count_facets(FacetTag::Interior) << '\n'
            << "|Omega_c| " << chsd::format_number(mesh.measure(Subdomain::Conduit))
            << ", |Omega_m| " << chsd::format_number(mesh.measure(Subdomain::Matrix)) << '\n';
  const auto violations = chsd::validate(mesh);
  for (const auto& v : violations)
    std::cerr << "violation: " << v.invariant << " [" << v.index << "] " << v.detail << '\n';
  if (!violations.empty()) throw std::runtime_error("mesh failed validation");
}

int cmd_run(const chsd::Config& cfg, bool quiet) {
  const int n = cfg.steps();
  const auto summary = chsd::run_config(cfg, [&](const chsd::StepReport& r) {
    if (quiet) return;
    std::fprintf(stderr, "step %d/%d t=%.6g E=%.12g picard=%d slack=%.3e%s\n", r.step, n, r.t,
                 r.energy_after, r.picard_iters, r.slack, r.halvings ? " (dt halved)" : "");
  });
  const auto& res = summary.result;
  if (!res.complete) {
    std::cerr << "run stopped after " << res.reports.size() << " accepted steps: " << res.failure
              << '\n';
    return kNumericalFailure;
  }
  std::cerr << "wrote " << summary.csv_path << " and " << summary.snapshots.size()
            << " snapshots\n";
  return kOk;
}

int cmd_convergence(const chsd::Config& cfg, const std::vector<double>& dts) {
  const auto r = chsd::self_convergence(cfg, dts);
  for (std::size_t i = 0; i < r.differences.size(); ++i)
    std::cerr << "dt " << chsd::format_number(r.dts[i]) << " vs " << chsd::format_number(r.dts[i + 1])
              << ": ||dphi||_L2 = " << chsd::format_number(r.differences[i]) << '\n';
  if (r.exact) std::cerr << "differences at roundoff: exact in time, order undefined\n";
  for (double q : r.ratios) std::cerr << "ratio " << chsd::format_number(q) << '\n';
  std::cerr << (r.monotone ? "monotone decreasing differences\n" : "differences not monotone\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cahn-Hilliard-Stokes-Darcy simulator for karstic geometry"};
  app.require_subcommand(1);
  std::string path;
  bool quiet = false;
  std::vector<double> dts;

  auto* run = app.add_subcommand("run", "Run a simulation");
  run->add_option("config", path, "Config file")->required();
  run->add_flag("-q,--quiet", quiet, "No per-step progress");
  auto* validate = app.add_subcommand("validate", "Check a config and print dof counts");
  validate->add_option("config", path, "Config file")->required();
  auto* info = app.add_subcommand("mesh-info", "Print mesh statistics and validate the mesh");
  info->add_option("config", path, "Config file")->required();
  auto* conv = app.add_subcommand("convergence", "Time-step self-convergence study");
  conv->add_option("config", path, "Config file")->required();
  conv->add_option("--dt-list", dts, "Time steps, each half the previous")->required()->expected(3, -1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const chsd::Config cfg = chsd::parse_config(path);
    if (*run) return cmd_run(cfg, quiet);
    if (*validate) {
      print_dofs(cfg);
      return kOk;
    }
    if (*info) {
      print_mesh_info(cfg);
      return kOk;
    }
    if (*conv) return cmd_convergence(cfg, dts);
  } catch (const chsd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const chsd::OutputError& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kConfigError;
  } catch (const chsd::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const chsd::SolverError& e) {
    std::cerr << "linear solver failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kOk;
}
