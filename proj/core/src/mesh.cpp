#include "chsd/mesh.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace chsd {

const char* to_string(Subdomain s) {
  return s == Subdomain::Conduit ? "Conduit" : "Matrix";
}

const char* to_string(FacetTag t) {
  switch (t) {
    case FacetTag::GammaC: return "GammaC";
    case FacetTag::GammaM: return "GammaM";
    case FacetTag::GammaCM: return "GammaCM";
    case FacetTag::Interior: return "Interior";
  }
  return "?";
}

Subdomain KarstLayout::classify(Vec2 p) const {
  if (!conduit_enclosed) return p.y < y_interface ? Subdomain::Conduit : Subdomain::Matrix;
  const bool inside = p.x > x0 && p.x < x1 && p.y > y0 && p.y < y_interface;
  return inside ? Subdomain::Conduit : Subdomain::Matrix;
}

double Mesh::cell_area(int c) const {
  const auto& v = cells[c].v;
  const Vec2 a = vertices[v[0]], b = vertices[v[1]], d = vertices[v[2]];
  return 0.5 * ((b.x - a.x) * (d.y - a.y) - (d.x - a.x) * (b.y - a.y));
}

Vec2 Mesh::centroid(int c) const {
  const auto& v = cells[c].v;
  return (1.0 / 3.0) * (vertices[v[0]] + vertices[v[1]] + vertices[v[2]]);
}

double Mesh::measure(Subdomain s) const {
  double sum = 0.0;
  for (int c = 0; c < static_cast<int>(cells.size()); ++c)
    if (cells[c].tag == s) sum += cell_area(c);
  return sum;
}

double Mesh::facet_length(int f) const {
  return norm(vertices[facets[f].v[1]] - vertices[facets[f].v[0]]);
}

Vec2 Mesh::facet_midpoint(int f) const {
  return 0.5 * (vertices[facets[f].v[0]] + vertices[facets[f].v[1]]);
}

int Mesh::count_cells(Subdomain s) const {
  return static_cast<int>(
      std::count_if(cells.begin(), cells.end(), [s](const Cell& c) { return c.tag == s; }));
}

int Mesh::count_facets(FacetTag t) const {
  return static_cast<int>(
      std::count_if(facets.begin(), facets.end(), [t](const Facet& f) { return f.tag == t; }));
}

namespace {

bool grid_aligned(double value, double spacing) {
  const double r = value / spacing;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::abs(r));
}

[[noreturn]] void reject(const std::string& msg) {
  throw std::invalid_argument("build_rect_karst: " + msg);
}

void check_layout(const KarstLayout& L) {
  if (L.nx < 2 || L.ny < 2) reject("nx and ny must be >= 2");
  if (!(L.Lx > 0.0) || !(L.Ly > 0.0)) reject("Lx and Ly must be positive");
  const double hx = L.Lx / L.nx, hy = L.Ly / L.ny;
  if (!(L.y_interface > 0.0 && L.y_interface < L.Ly))
    reject("y_interface must lie strictly inside (0, Ly)");
  if (!grid_aligned(L.y_interface, hy)) {
    std::ostringstream os;
    os << "y_interface = " << L.y_interface << " is not a multiple of the grid spacing Ly/ny = " << hy;
    reject(os.str());
  }
  if (L.conduit_enclosed) {
    if (!(L.x0 > 0.0 && L.x0 < L.x1 && L.x1 < L.Lx))
      reject("enclosed conduit requires 0 < x0 < x1 < Lx");
    if (!(L.y0 > 0.0 && L.y0 < L.y_interface))
      reject("enclosed conduit requires 0 < y0 < y_interface");
    if (!grid_aligned(L.x0, hx) || !grid_aligned(L.x1, hx) || !grid_aligned(L.y0, hy))
      reject("enclosed conduit corners must be aligned to the grid");
  }
}

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

Mesh build_rect_karst(const KarstLayout& layout) {
  check_layout(layout);
  Mesh m;
  m.layout = layout;
  const int nx = layout.nx, ny = layout.ny;
  const double hx = layout.Lx / nx, hy = layout.Ly / ny;

  m.vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) m.vertices.push_back({i * hx, j * hy});

  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  m.cells.reserve(static_cast<std::size_t>(2) * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      if ((i + j) % 2 == 0) {
        m.cells.push_back({{a, b, c}});
        m.cells.push_back({{a, c, d}});
      } else {
        m.cells.push_back({{a, b, d}});
        m.cells.push_back({{b, c, d}});
      }
    }
  }
  for (int c = 0; c < static_cast<int>(m.cells.size()); ++c)
    m.cells[c].tag = layout.classify(m.centroid(c));

  std::unordered_map<std::uint64_t, int> edge_index;
  edge_index.reserve(m.cells.size() * 2);
  m.cell_facets.resize(m.cells.size());
  for (int c = 0; c < static_cast<int>(m.cells.size()); ++c) {
    const auto& v = m.cells[c].v;
    for (int k = 0; k < 3; ++k) {
      const int a = v[(k + 1) % 3], b = v[(k + 2) % 3];
      auto [it, inserted] = edge_index.try_emplace(edge_key(a, b), static_cast<int>(m.facets.size()));
      if (inserted) {
        Facet f;
        f.v = {std::min(a, b), std::max(a, b)};
        f.cells = {c, -1};
        m.facets.push_back(f);
      } else {
        m.facets[it->second].cells[1] = c;
      }
      m.cell_facets[c][k] = it->second;
    }
  }

  for (auto& f : m.facets) {
    const Subdomain s0 = m.cells[f.cells[0]].tag;
    if (f.cells[1] < 0) {
      f.tag = s0 == Subdomain::Conduit ? FacetTag::GammaC : FacetTag::GammaM;
      continue;
    }
    const Subdomain s1 = m.cells[f.cells[1]].tag;
    if (s0 == s1) {
      f.tag = FacetTag::Interior;
      continue;
    }
    f.tag = FacetTag::GammaCM;
    f.conduit_cell = s0 == Subdomain::Conduit ? f.cells[0] : f.cells[1];
    f.matrix_cell = s0 == Subdomain::Conduit ? f.cells[1] : f.cells[0];
    const Vec2 e = m.vertices[f.v[1]] - m.vertices[f.v[0]];
    const double len = norm(e);
    Vec2 n{e.y / len, -e.x / len};
    if (dot(n, m.centroid(f.matrix_cell) - m.centroid(f.conduit_cell)) < 0.0) n = -1.0 * n;
    f.n_cm = n;
    f.tau = {n.y, -n.x};
  }
  return m;
}

Mesh build_rect_karst(int nx, int ny, double Lx, double Ly, double y_interface,
                      bool conduit_enclosed) {
  KarstLayout L;
  L.nx = nx;
  L.ny = ny;
  L.Lx = Lx;
  L.Ly = Ly;
  L.y_interface = y_interface;
  L.conduit_enclosed = conduit_enclosed;
  L.x0 = 0.25 * Lx;
  L.x1 = 0.75 * Lx;
  L.y0 = 0.25 * Ly;
  return build_rect_karst(L);
}

std::vector<Violation> validate(const Mesh& mesh) {
  std::vector<Violation> out;
  auto report = [&out](std::string inv, std::string entity, int idx, std::string detail) {
    out.push_back({std::move(inv), std::move(entity), idx, std::move(detail)});
  };
  const int ncells = static_cast<int>(mesh.cells.size());
  std::vector<char> bad_cell(ncells, 0);

  for (int c = 0; c < ncells; ++c) {
    if (!(mesh.cell_area(c) > 0.0)) {
      report("cell-orientation", "cell", c, "non-positive signed area");
      bad_cell[c] = 1;
      continue;
    }
    const Subdomain expect = mesh.layout.classify(mesh.centroid(c));
    if (mesh.cells[c].tag != expect) {
      report("tag-consistency", "cell", c,
             std::string("tagged ") + to_string(mesh.cells[c].tag) + " but lies in " +
                 to_string(expect));
      bad_cell[c] = 1;
    }
  }

  const double total = mesh.measure(Subdomain::Conduit) + mesh.measure(Subdomain::Matrix);
  const double domain = mesh.layout.Lx * mesh.layout.Ly;
  if (std::abs(total - domain) > 1e-12 * domain) {
    std::ostringstream os;
    os.precision(17);
    os << "cell areas sum to " << total << ", domain is " << domain;
    report("area-partition", "mesh", -1, os.str());
  }

  for (int fi = 0; fi < static_cast<int>(mesh.facets.size()); ++fi) {
    const Facet& f = mesh.facets[fi];
    const bool boundary = f.cells[1] < 0;
    if (f.cells[0] < 0 || f.cells[0] >= ncells || f.cells[1] >= ncells) {
      report("facet-adjacency", "facet", fi, "adjacent cell index out of range");
      continue;
    }
    if (bad_cell[f.cells[0]] || (!boundary && bad_cell[f.cells[1]])) continue;

    const bool wants_two = f.tag == FacetTag::Interior || f.tag == FacetTag::GammaCM;
    if (wants_two == boundary) {
      report("facet-adjacency", "facet", fi,
             std::string(to_string(f.tag)) + " facet has " + (boundary ? "one" : "two") +
                 " adjacent cells");
      continue;
    }
    const Subdomain s0 = mesh.cells[f.cells[0]].tag;
    switch (f.tag) {
      case FacetTag::GammaC:
        if (s0 != Subdomain::Conduit) report("boundary-tag", "facet", fi, "GammaC facet next to a Matrix cell");
        break;
      case FacetTag::GammaM:
        if (s0 != Subdomain::Matrix) report("boundary-tag", "facet", fi, "GammaM facet next to a Conduit cell");
        break;
      case FacetTag::Interior:
        if (mesh.cells[f.cells[1]].tag != s0)
          report("interior-tag", "facet", fi, "Interior facet separates Conduit and Matrix cells");
        break;
      case FacetTag::GammaCM: {
        const bool sides_ok =
            f.conduit_cell >= 0 && f.matrix_cell >= 0 &&
            ((f.conduit_cell == f.cells[0] && f.matrix_cell == f.cells[1]) ||
             (f.conduit_cell == f.cells[1] && f.matrix_cell == f.cells[0])) &&
            mesh.cells[f.conduit_cell].tag == Subdomain::Conduit &&
            mesh.cells[f.matrix_cell].tag == Subdomain::Matrix;
        if (!sides_ok) {
          report("interface-sides", "facet", fi, "GammaCM facet is not shared by one Conduit and one Matrix cell");
          break;
        }
        const double nn = norm(f.n_cm), tt = norm(f.tau), tn = dot(f.tau, f.n_cm);
        if (std::abs(nn - 1.0) > 1e-14 || std::abs(tt - 1.0) > 1e-14 || std::abs(tn) > 1e-14) {
          report("interface-frame", "facet", fi, "n_cm and tau are not an orthonormal pair");
          break;
        }
        const Vec2 e = mesh.vertices[f.v[1]] - mesh.vertices[f.v[0]];
        const bool along_edge = std::abs(dot(f.n_cm, e)) <= 1e-12 * norm(e);
        const Vec2 cm = mesh.centroid(f.matrix_cell) - mesh.centroid(f.conduit_cell);
        if (!along_edge || dot(f.n_cm, cm) <= 0.0)
          report("interface-orientation", "facet", fi, "n_cm does not point from the conduit cell into the matrix cell");
        break;
      }
    }
  }
  return out;
}

}  // namespace chsd
