#include "chsd/fespace.hpp"

#include <algorithm>
#include <stdexcept>

namespace chsd {

const char* to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::VectorP2_Conduit: return "VectorP2_Conduit";
    case SpaceKind::ScalarP1_Conduit: return "ScalarP1_Conduit";
    case SpaceKind::ScalarP2_Matrix_zero_mean: return "ScalarP2_Matrix_zero_mean";
    case SpaceKind::ScalarP2_Global: return "ScalarP2_Global";
  }
  return "?";
}

CellFrame cell_frame(const Mesh& mesh, int cell) {
  CellFrame f;
  const auto& v = mesh.cells[cell].v;
  for (int i = 0; i < 3; ++i) f.x[i] = mesh.vertices[v[i]];
  const double two_area =
      (f.x[1].x - f.x[0].x) * (f.x[2].y - f.x[0].y) - (f.x[2].x - f.x[0].x) * (f.x[1].y - f.x[0].y);
  f.area = 0.5 * two_area;
  for (int i = 0; i < 3; ++i) {
    const Vec2 a = f.x[(i + 1) % 3], b = f.x[(i + 2) % 3];
    f.grad_lambda[i] = {(a.y - b.y) / two_area, (b.x - a.x) / two_area};
  }
  return f;
}

std::array<double, 6> p2_values(const std::array<double, 3>& l) {
  return {l[0] * (2.0 * l[0] - 1.0), l[1] * (2.0 * l[1] - 1.0), l[2] * (2.0 * l[2] - 1.0),
          4.0 * l[1] * l[2], 4.0 * l[2] * l[0], 4.0 * l[0] * l[1]};
}

std::array<Vec2, 6> p2_gradients(const std::array<double, 3>& l, const CellFrame& f) {
  const auto& g = f.grad_lambda;
  std::array<Vec2, 6> out;
  for (int i = 0; i < 3; ++i) out[i] = (4.0 * l[i] - 1.0) * g[i];
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    out[3 + i] = 4.0 * (l[j] * g[k] + l[k] * g[j]);
  }
  return out;
}

Space::Space(const Mesh& mesh, SpaceKind kind) : mesh_(&mesh), kind_(kind) {
  switch (kind) {
    case SpaceKind::VectorP2_Conduit:
      degree_ = 2; components_ = 2; domain_ = Subdomain::Conduit; break;
    case SpaceKind::ScalarP1_Conduit:
      degree_ = 1; components_ = 1; domain_ = Subdomain::Conduit; break;
    case SpaceKind::ScalarP2_Matrix_zero_mean:
      degree_ = 2; components_ = 1; domain_ = Subdomain::Matrix; break;
    case SpaceKind::ScalarP2_Global:
      degree_ = 2; components_ = 1; domain_ = std::nullopt; break;
  }

  const int nv = static_cast<int>(mesh.vertices.size());
  const int nf = static_cast<int>(mesh.facets.size());
  const int ncells = static_cast<int>(mesh.cells.size());
  node_of_mesh_node_.assign(nv + nf, -1);
  cell_nodes_.assign(ncells, {-1, -1, -1, -1, -1, -1});

  // Number nodes in mesh-node order so numbering is independent of cell order.
  std::vector<char> used(nv + nf, 0);
  for (int c = 0; c < ncells; ++c) {
    if (domain_ && mesh.cells[c].tag != *domain_) continue;
    for (int i = 0; i < 3; ++i) used[mesh.cells[c].v[i]] = 1;
    if (degree_ == 2)
      for (int i = 0; i < 3; ++i) used[nv + mesh.cell_facets[c][i]] = 1;
  }
  for (int m = 0; m < nv + nf; ++m) {
    if (!used[m]) continue;
    node_of_mesh_node_[m] = static_cast<int>(mesh_node_.size());
    mesh_node_.push_back(m);
    node_coords_.push_back(m < nv ? mesh.vertices[m] : mesh.facet_midpoint(m - nv));
  }
  node_owner_.assign(mesh_node_.size(), {-1, -1});
  for (int c = 0; c < ncells; ++c) {
    if (domain_ && mesh.cells[c].tag != *domain_) continue;
    auto& cn = cell_nodes_[c];
    for (int i = 0; i < 3; ++i) cn[i] = node_of_mesh_node_[mesh.cells[c].v[i]];
    if (degree_ == 2)
      for (int i = 0; i < 3; ++i) cn[3 + i] = node_of_mesh_node_[nv + mesh.cell_facets[c][i]];
    for (int i = 0; i < nodes_per_cell(); ++i)
      if (node_owner_[cn[i]].first < 0) node_owner_[cn[i]] = {c, i};
  }

  std::array<std::vector<char>, 4> on_tag;
  for (auto& v : on_tag) v.assign(num_nodes(), 0);
  for (int f = 0; f < nf; ++f) {
    auto& mark = on_tag[static_cast<int>(mesh.facets[f].tag)];
    const int ends[2] = {mesh.facets[f].v[0], mesh.facets[f].v[1]};
    for (int m : ends)
      if (node_of_mesh_node_[m] >= 0) mark[node_of_mesh_node_[m]] = 1;
    if (degree_ == 2 && node_of_mesh_node_[nv + f] >= 0) mark[node_of_mesh_node_[nv + f]] = 1;
  }
  for (int t = 0; t < 4; ++t) {
    for (int comp = 0; comp < components_; ++comp)
      for (int n = 0; n < num_nodes(); ++n)
        if (on_tag[t][n]) boundary_[t].push_back(dof(comp, n));
  }

  essential_mask_.assign(size(), 0);
  if (kind_ == SpaceKind::VectorP2_Conduit) {
    essential_ = boundary_[static_cast<int>(FacetTag::GammaC)];
    for (int d : essential_) essential_mask_[d] = 1;
  }
}

std::array<double, 6> Space::shape_values(const std::array<double, 3>& bary) const {
  if (degree_ == 2) return p2_values(bary);
  return {bary[0], bary[1], bary[2], 0.0, 0.0, 0.0};
}

std::array<Vec2, 6> Space::shape_gradients(const std::array<double, 3>& bary,
                                           const CellFrame& frame) const {
  if (degree_ == 2) return p2_gradients(bary, frame);
  return {frame.grad_lambda[0], frame.grad_lambda[1], frame.grad_lambda[2], Vec2{}, Vec2{}, Vec2{}};
}

SpaceSet::SpaceSet(const Mesh& m)
    : mesh(m),
      velocity(m, SpaceKind::VectorP2_Conduit),
      conduit_pressure(m, SpaceKind::ScalarP1_Conduit),
      matrix_pressure(m, SpaceKind::ScalarP2_Matrix_zero_mean),
      phase(m, SpaceKind::ScalarP2_Global) {}

SpaceSet build_spaces(const Mesh& mesh) { return SpaceSet(mesh); }

Vector interpolate(const Space& space, const ScalarFunction& f) {
  if (space.components() != 1)
    throw std::invalid_argument("interpolate: scalar function given for a vector space");
  Vector out(space.size());
  for (int n = 0; n < space.num_nodes(); ++n) out[n] = f(space.node_coords()[n]);
  return out;
}

Vector interpolate(const Space& space, const VectorFunction& f) {
  if (space.components() != 2)
    throw std::invalid_argument("interpolate: vector function given for a scalar space");
  Vector out(space.size());
  for (int n = 0; n < space.num_nodes(); ++n) {
    const Vec2 v = f(space.node_coords()[n]);
    out[space.dof(0, n)] = v.x;
    out[space.dof(1, n)] = v.y;
  }
  return out;
}

double value(const Space& space, const Vector& dofs, const QPoint& p, int component) {
  const auto& cn = space.cell_nodes(p.cell);
  if (cn[0] < 0) throw std::out_of_range("value: cell is outside the space's subdomain");
  const auto N = space.shape_values(p.bary);
  double s = 0.0;
  for (int i = 0; i < space.nodes_per_cell(); ++i) s += N[i] * dofs[space.dof(component, cn[i])];
  return s;
}

Vec2 gradient(const Space& space, const Vector& dofs, const QPoint& p, int component) {
  const auto& cn = space.cell_nodes(p.cell);
  if (cn[0] < 0) throw std::out_of_range("gradient: cell is outside the space's subdomain");
  const auto G = space.shape_gradients(p.bary, cell_frame(space.mesh(), p.cell));
  Vec2 s{};
  for (int i = 0; i < space.nodes_per_cell(); ++i) s = s + dofs[space.dof(component, cn[i])] * G[i];
  return s;
}

QPoint locate(const Mesh& mesh, Vec2 x, std::optional<Subdomain> region) {
  constexpr double tol = 1e-12;
  for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
    if (region && mesh.cells[c].tag != *region) continue;
    const CellFrame f = cell_frame(mesh, c);
    std::array<double, 3> l{};
    bool inside = true;
    for (int i = 0; i < 3; ++i) {
      l[i] = 1.0 / 3.0 + dot(f.grad_lambda[i], x - mesh.centroid(c));
      if (l[i] < -tol) { inside = false; break; }
    }
    if (inside) return {c, l, x};
  }
  return {};
}

double eval_field(const Space& space, const Vector& dofs, Vec2 x, int component) {
  const QPoint p = locate(space.mesh(), x, space.domain());
  if (p.cell < 0) throw std::out_of_range("eval_field: point outside the space's subdomain");
  return value(space, dofs, p, component);
}

double integrate(const Mesh& mesh, std::optional<Subdomain> region,
                 const std::function<double(const QPoint&)>& integrand) {
  const CellRule& rule = cell_rule();
  double sum = 0.0;
  for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
    if (region && mesh.cells[c].tag != *region) continue;
    const CellFrame f = cell_frame(mesh, c);
    double cs = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const QPoint p{c, rule.points[q], f.map(rule.points[q])};
      cs += rule.weights[q] * integrand(p);
    }
    sum += 2.0 * f.area * cs;
  }
  return sum;
}

namespace {

QPoint facet_image(const Mesh& mesh, int cell, int va, int vb, double s, Vec2 x) {
  QPoint p{cell, {0.0, 0.0, 0.0}, x};
  const auto& v = mesh.cells[cell].v;
  for (int i = 0; i < 3; ++i) {
    if (v[i] == va) p.bary[i] = 1.0 - s;
    if (v[i] == vb) p.bary[i] = s;
  }
  return p;
}

}  // namespace

FacetPoint facet_point(const Mesh& mesh, int facet, double s) {
  const Facet& f = mesh.facets[facet];
  const Vec2 a = mesh.vertices[f.v[0]], b = mesh.vertices[f.v[1]];
  FacetPoint fp;
  fp.facet = facet;
  fp.x = (1.0 - s) * a + s * b;
  fp.n_cm = f.n_cm;
  fp.tau = f.tau;
  if (f.tag == FacetTag::GammaCM) {
    fp.side[0] = facet_image(mesh, f.conduit_cell, f.v[0], f.v[1], s, fp.x);
    fp.side[1] = facet_image(mesh, f.matrix_cell, f.v[0], f.v[1], s, fp.x);
  } else {
    fp.side[0] = facet_image(mesh, f.cells[0], f.v[0], f.v[1], s, fp.x);
    if (f.cells[1] >= 0) fp.side[1] = facet_image(mesh, f.cells[1], f.v[0], f.v[1], s, fp.x);
  }
  return fp;
}

double integrate_facets(const Mesh& mesh, FacetTag tag,
                        const std::function<double(const FacetPoint&)>& integrand) {
  const FacetRule& rule = facet_rule();
  double sum = 0.0;
  for (int f = 0; f < static_cast<int>(mesh.facets.size()); ++f) {
    if (mesh.facets[f].tag != tag) continue;
    double fs = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q)
      fs += rule.weights[q] * integrand(facet_point(mesh, f, rule.points[q]));
    sum += mesh.facet_length(f) * fs;
  }
  return sum;
}

}  // namespace chsd
