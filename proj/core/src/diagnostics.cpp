#include "chsd/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "quad_loops.hpp"

namespace chsd {

using detail::CellPoint;
using detail::field_at;
using detail::grad_at;

namespace {

Vec2 velocity_at(const Space& V, const Vector& u, int cell, const std::array<double, 6>& N) {
  const auto& vn = V.cell_nodes(cell);
  Vec2 r{};
  for (int j = 0; j < 6; ++j) r = r + N[j] * Vec2{u[V.dof(0, vn[j])], u[V.dof(1, vn[j])]};
  return r;
}

/// Velocity gradient rows: g[a] = grad u_a.
std::array<Vec2, 2> velocity_grad(const Space& V, const Vector& u, int cell,
                                  const std::array<Vec2, 6>& G) {
  const auto& vn = V.cell_nodes(cell);
  std::array<Vec2, 2> g{};
  for (int j = 0; j < 6; ++j)
    for (int a = 0; a < 2; ++a) g[a] = g[a] + u[V.dof(a, vn[j])] * G[j];
  return g;
}

/// |D(u)|^2 for the symmetric part of the velocity gradient.
double strain_sq(const std::array<Vec2, 2>& g) {
  const double dxy = 0.5 * (g[0].y + g[1].x);
  return g[0].x * g[0].x + g[1].y * g[1].y + 2.0 * dxy * dxy;
}

double tangential_integral(const State& s, const SpaceSet& S,
                           const std::function<double(const FacetPoint&)>& weight) {
  const Space& V = S.velocity;
  double r = 0.0;
  detail::for_each_interface_point(S.mesh, [&](const FacetPoint& fp, double w) {
    const Vec2 u = velocity_at(V, s.u, fp.side[0].cell, p2_values(fp.side[0].bary));
    const double ut = dot(u, fp.tau);
    r += w * weight(fp) * ut * ut;
  });
  return r;
}

}  // namespace

double energy(const State& s, const Params& params, const SpaceSet& S) {
  const Space& X = S.phase;
  const Space& V = S.velocity;
  const double eps = params.epsilon;
  double e = 0.0;
  detail::for_each_cell_point(S.mesh, std::nullopt, [&](const CellPoint& cp, const CellFrame&) {
    const int c = cp.p.cell;
    const auto& xn = X.cell_nodes(c);
    const double ph = field_at(s.phi, xn, cp.N);
    const Vec2 g = grad_at(s.phi, xn, cp.G);
    double local = 0.5 * eps * dot(g, g) + potential_F(ph) / eps;
    if (params.varpi != 0.0 && S.mesh.cells[c].tag == Subdomain::Conduit) {
      const Vec2 u = velocity_at(V, s.u, c, cp.N);
      local += 0.5 * params.varpi * dot(u, u);
    }
    e += cp.w * local;
  });
  return e;
}

Dissipation dissipation(const State& prev, const State& next, const Params& params,
                        const SpaceSet& S) {
  return dissipation(prev, next, params, S, darcy_velocity(next, prev.phi, params, S));
}

Dissipation dissipation(const State& prev, const State& next, const Params& params,
                        const SpaceSet& S, const DarcyField& um) {
  const Space& X = S.phase;
  const Space& V = S.velocity;
  const CoeffField nu = CoeffField::from_phase(X, prev.phi, params.nu);
  const CoeffField mob = CoeffField::from_phase(X, prev.phi, params.mobility);
  Dissipation d;
  int q = 0, last = -1;
  detail::for_each_cell_point(S.mesh, std::nullopt, [&](const CellPoint& cp, const CellFrame&) {
    const int c = cp.p.cell;
    if (c != last) {
      q = 0;
      last = c;
    }
    const Vec2 gm = grad_at(next.mu, X.cell_nodes(c), cp.G);
    d.mobility += cp.w * mob(cp.p) * dot(gm, gm);
    if (S.mesh.cells[c].tag == Subdomain::Conduit) {
      d.visc += cp.w * 2.0 * nu(cp.p) * strain_sq(velocity_grad(V, next.u, c, cp.G));
    } else {
      const Vec2 u = um.at(c, q);
      d.darcy += cp.w * nu(cp.p) / params.kappa(cp.p) * dot(u, u);
    }
    ++q;
  });
  if (params.alpha_bjsj != 0.0)
    d.bjsj = tangential_integral(next, S, [&](const FacetPoint& fp) {
      return params.alpha_bjsj * nu(fp.side[1]) / std::sqrt(2.0 * params.kappa(fp.side[1]));
    });
  return d;
}

StepCheck check_step(const State& prev, const State& next, const Params& params,
                     const SpaceSet& S, double tol) {
  StepCheck r;
  r.energy_before = energy(prev, params, S);
  r.energy_after = energy(next, params, S);
  r.dissipation = dissipation(prev, next, params, S);

  const Space& X = S.phase;
  const Space& V = S.velocity;
  const Vector dphi = next.phi - prev.phi;
  const Vector du = next.u - prev.u;
  const double eps = params.epsilon;
  double inc = 0.0;
  detail::for_each_cell_point(S.mesh, std::nullopt, [&](const CellPoint& cp, const CellFrame&) {
    const int c = cp.p.cell;
    const auto& xn = X.cell_nodes(c);
    const double d = field_at(dphi, xn, cp.N);
    const Vec2 g = grad_at(dphi, xn, cp.G);
    double local = 0.5 * eps * dot(g, g) + 0.5 / eps * d * d;
    if (params.varpi != 0.0 && S.mesh.cells[c].tag == Subdomain::Conduit) {
      const Vec2 u = velocity_at(V, du, c, cp.N);
      local += 0.5 * params.varpi * dot(u, u);
    }
    inc += cp.w * local;
  });
  r.increments = inc;
  r.slack = r.energy_after + params.dt * r.dissipation.total() + inc - r.energy_before;
  r.tol = tol >= 0.0 ? tol
                     : params.energy_tol_factor * params.picard.tol_rel * (1.0 + std::abs(r.energy_before));
  r.pass = r.slack <= r.tol;
  return r;
}

double mass(const Space& X, const Vector& phi) {
  if (phi.size() != X.size()) throw std::invalid_argument("mass: vector length mismatch");
  double m = 0.0;
  detail::for_each_cell_point(X.mesh(), std::nullopt, [&](const CellPoint& cp, const CellFrame&) {
    m += cp.w * field_at(phi, X.cell_nodes(cp.p.cell), cp.N);
  });
  return m;
}

std::vector<double> mass_drift(const std::vector<double>& masses) {
  std::vector<double> d;
  d.reserve(masses.size());
  for (double m : masses) d.push_back(std::abs(m - masses.front()));
  return d;
}

double div_defect(const State& s, const SpaceSet& S) {
  const Space& Q = S.conduit_pressure;
  const Space& X = S.phase;
  const Space& V = S.velocity;

  // L2 projection of phi onto the conduit pressure space.
  Triplets t;
  Vector b = Vector::Zero(Q.size());
  detail::for_each_cell_point(S.mesh, Subdomain::Conduit, [&](const CellPoint& cp, const CellFrame&) {
    const auto& qn = Q.cell_nodes(cp.p.cell);
    const double ph = field_at(s.phi, X.cell_nodes(cp.p.cell), cp.N);
    for (int i = 0; i < 3; ++i) {
      b[qn[i]] += cp.w * cp.p.bary[i] * ph;
      for (int j = 0; j < 3; ++j) t.emplace_back(qn[i], qn[j], cp.w * cp.p.bary[i] * cp.p.bary[j]);
    }
  });
  Eigen::SparseMatrix<double> m(Q.size(), Q.size());
  m.setFromTriplets(t.begin(), t.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(m);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("div_defect: projection mass matrix is singular");
  const Vector pq = ldlt.solve(b);

  double r = 0.0;
  detail::for_each_cell_point(S.mesh, Subdomain::Conduit, [&](const CellPoint& cp, const CellFrame&) {
    const int c = cp.p.cell;
    const auto g = velocity_grad(V, s.u, c, cp.G);
    const auto& qn = Q.cell_nodes(c);
    double proj = 0.0;
    for (int i = 0; i < 3; ++i) proj += cp.p.bary[i] * pq[qn[i]];
    r += cp.w * (g[0].x + g[1].y) * (field_at(s.phi, X.cell_nodes(c), cp.N) - proj);
  });
  return std::abs(r);
}

ZNorm z_norm_terms(const State& s, const DarcyField& um, const SpaceSet& S) {
  const Space& V = S.velocity;
  ZNorm z;
  int q = 0, last = -1;
  detail::for_each_cell_point(S.mesh, std::nullopt, [&](const CellPoint& cp, const CellFrame&) {
    const int c = cp.p.cell;
    if (c != last) {
      q = 0;
      last = c;
    }
    if (S.mesh.cells[c].tag == Subdomain::Conduit) {
      z.strain += cp.w * strain_sq(velocity_grad(V, s.u, c, cp.G));
    } else {
      const Vec2 u = um.at(c, q);
      z.darcy += cp.w * dot(u, u);
    }
    ++q;
  });
  z.tangential = tangential_integral(s, S, [](const FacetPoint&) { return 1.0; });
  return z;
}

double z_norm(const State& s, const DarcyField& um, const SpaceSet& S) {
  return std::sqrt(z_norm_terms(s, um, S).squared());
}

double velocity_l2(const State& s, const SpaceSet& S) {
  double r = 0.0;
  detail::for_each_cell_point(S.mesh, Subdomain::Conduit, [&](const CellPoint& cp, const CellFrame&) {
    const Vec2 u = velocity_at(S.velocity, s.u, cp.p.cell, cp.N);
    r += cp.w * dot(u, u);
  });
  return std::sqrt(r);
}

}  // namespace chsd
