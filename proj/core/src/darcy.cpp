#include "chsd/darcy.hpp"

#include "quad_loops.hpp"

namespace chsd {

using detail::CellPoint;

Vec2 DarcyField::cell_average(int cell) const {
  const auto& c = p1[cell];
  return (1.0 / 3.0) * (c[0] + c[1] + c[2]);
}

DarcyField darcy_velocity(const State& s, const Vector& phi_coeff, const Params& params,
                          const SpaceSet& S) {
  const Mesh& mesh = S.mesh;
  const Space& X = S.phase;
  const Space& P = S.matrix_pressure;
  const int nq = static_cast<int>(cell_rule().points.size());
  const CoeffField nu = CoeffField::from_phase(X, phi_coeff, params.nu);

  DarcyField out;
  out.cell_offset.assign(mesh.cells.size(), -1);
  out.p1.assign(mesh.cells.size(), {});
  int off = 0;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c)
    if (mesh.cells[c].tag == Subdomain::Matrix) {
      out.cell_offset[c] = off;
      off += nq;
    }
  out.qp.resize(off);

  // rhs[c][i] = int_c u_m lambda_i
  std::vector<std::array<Vec2, 3>> rhs(mesh.cells.size());
  int q = 0, last = -1;
  detail::for_each_cell_point(mesh, Subdomain::Matrix, [&](const CellPoint& cp, const CellFrame&) {
    const int c = cp.p.cell;
    if (c != last) {
      q = 0;
      last = c;
    }
    const auto& xn = X.cell_nodes(c);
    const Vec2 gp = detail::grad_at(s.p_m, P.cell_nodes(c), cp.G);
    const double mu = detail::field_at(s.mu, xn, cp.N);
    const Vec2 gphi = detail::grad_at(s.phi_force, xn, cp.G);
    const double kn = params.kappa(cp.p) / nu(cp.p);
    const Vec2 u = -kn * (gp - mu * gphi);
    out.qp[out.cell_offset[c] + q] = u;
    for (int i = 0; i < 3; ++i) rhs[c][i] = rhs[c][i] + (cp.w * cp.p.bary[i]) * u;
    ++q;
  });

  // Local P1 mass matrix is area/12 [[2,1,1],[1,2,1],[1,1,2]]; its inverse is
  // (3/area) [[3,-1,-1],[-1,3,-1],[-1,-1,3]].
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    if (out.cell_offset[c] < 0) continue;
    const double s3 = 3.0 / mesh.cell_area(static_cast<int>(c));
    const auto& r = rhs[c];
    for (int i = 0; i < 3; ++i) {
      Vec2 v{};
      for (int j = 0; j < 3; ++j) v = v + ((i == j ? 3.0 : -1.0) * s3) * r[j];
      out.p1[c][i] = v;
    }
  }
  return out;
}

Vector weak_divergence_residual(const DarcyField& um, const State& s, const SpaceSet& S) {
  const Space& P = S.matrix_pressure;
  const Space& V = S.velocity;
  Vector r = Vector::Zero(P.size());
  int q = 0, last = -1;
  detail::for_each_cell_point(S.mesh, Subdomain::Matrix, [&](const CellPoint& cp, const CellFrame&) {
    const int c = cp.p.cell;
    if (c != last) {
      q = 0;
      last = c;
    }
    const Vec2 u = um.at(c, q++);
    const auto& pn = P.cell_nodes(c);
    for (int i = 0; i < 6; ++i) r[pn[i]] += cp.w * dot(u, cp.G[i]);
  });
  detail::for_each_interface_point(S.mesh, [&](const FacetPoint& fp, double w) {
    const auto Nc = p2_values(fp.side[0].bary);
    const auto Nm = p2_values(fp.side[1].bary);
    const auto& vn = V.cell_nodes(fp.side[0].cell);
    Vec2 u{};
    for (int j = 0; j < 6; ++j)
      u = u + Nc[j] * Vec2{s.u[V.dof(0, vn[j])], s.u[V.dof(1, vn[j])]};
    const double un = dot(u, fp.n_cm);
    const auto& pn = P.cell_nodes(fp.side[1].cell);
    for (int i = 0; i < 6; ++i) r[pn[i]] += w * un * Nm[i];
  });
  return r;
}

}  // namespace chsd
