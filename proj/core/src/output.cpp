#include "chsd/output.hpp"

#include <charconv>
#include <cmath>

namespace chsd {

std::string format_number(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string timeseries_row(const StepReport& r, double m0) {
  const auto& d = r.dissipation;
  std::string s = std::to_string(r.step);
  for (double v : {r.t, r.dt_used, r.energy_after, d.darcy, d.visc, d.mobility, d.bjsj, r.mass_after,
                   std::abs(r.mass_after - m0), r.div_defect, r.z_norm}) {
    s += ',';
    s += format_number(v);
  }
  s += ',' + std::to_string(r.picard_iters) + ',' + format_number(r.slack);
  return s;
}

TimeseriesWriter::TimeseriesWriter(const std::string& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw OutputError("cannot write time series '" + path + "'");
  out_ << kTimeseriesHeader << '\n' << std::flush;
}

void TimeseriesWriter::append(const StepReport& report) {
  if (!m0_) m0_ = report.mass_before;
  out_ << timeseries_row(report, *m0_) << '\n' << std::flush;
  if (!out_) throw OutputError("write failed on '" + path_ + "'");
}

void write_timeseries(const std::vector<StepReport>& reports, const std::string& path) {
  TimeseriesWriter w(path);
  for (const auto& r : reports) w.append(r);
}

void write_snapshot(const std::string& path, const State& s, const SpaceSet& S,
                    const DarcyField& um) {
  const Mesh& mesh = S.mesh;
  const int nv = static_cast<int>(mesh.vertices.size());

  // Darcy cell averages accumulated on the vertices of matrix cells.
  std::vector<Vec2> u_sum(nv);
  std::vector<int> u_count(nv, 0);
  for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
    if (mesh.cells[c].tag != Subdomain::Matrix) continue;
    const Vec2 avg = um.cell_average(c);
    for (int v : mesh.cells[c].v) {
      u_sum[v] = u_sum[v] + avg;
      ++u_count[v];
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot write snapshot '" + path + "'");
  out << "# vtk DataFile Version 2.0\n"
      << "chsd snapshot step " << s.k << " t " << format_number(s.t) << "\n"
      << "ASCII\nDATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << nv << " double\n";
  for (const Vec2& p : mesh.vertices) out << format_number(p.x) << ' ' << format_number(p.y) << " 0\n";
  const auto nc = mesh.cells.size();
  out << "CELLS " << nc << ' ' << 4 * nc << '\n';
  for (const Cell& c : mesh.cells) out << "3 " << c.v[0] << ' ' << c.v[1] << ' ' << c.v[2] << '\n';
  out << "CELL_TYPES " << nc << '\n';
  for (std::size_t c = 0; c < nc; ++c) out << "5\n";

  const Space& X = S.phase;
  const Space& V = S.velocity;
  const Space& Pc = S.conduit_pressure;
  const Space& Pm = S.matrix_pressure;
  auto scalar = [&](const char* name, auto&& at) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int v = 0; v < nv; ++v) out << format_number(at(v)) << '\n';
  };
  out << "POINT_DATA " << nv << '\n';
  scalar("phi", [&](int v) { return s.phi[X.node_of_mesh_node(v)]; });
  scalar("mu", [&](int v) { return s.mu[X.node_of_mesh_node(v)]; });
  scalar("P", [&](int v) {
    const int m = Pm.node_of_mesh_node(v);
    if (m >= 0) return s.p_m[m];
    const int c = Pc.node_of_mesh_node(v);
    return c >= 0 ? s.p_c[c] : 0.0;
  });
  out << "VECTORS u double\n";
  for (int v = 0; v < nv; ++v) {
    Vec2 u{};
    const int n = V.node_of_mesh_node(v);
    if (n >= 0)
      u = {s.u[V.dof(0, n)], s.u[V.dof(1, n)]};
    else if (u_count[v] > 0)
      u = (1.0 / u_count[v]) * u_sum[v];
    out << format_number(u.x) << ' ' << format_number(u.y) << " 0\n";
  }
  if (!out) throw OutputError("write failed on '" + path + "'");
}

}  // namespace chsd
