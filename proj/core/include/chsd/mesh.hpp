#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace chsd {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

enum class Subdomain : std::uint8_t { Conduit, Matrix };
enum class FacetTag : std::uint8_t { GammaC, GammaM, GammaCM, Interior };

const char* to_string(Subdomain s);
const char* to_string(FacetTag t);

/// Rectangular karst layout. Either a flat interface at `y_interface` with
/// the conduit below it, or an enclosed rectangular conduit
/// [x0, x1] x [y0, y_interface] fully surrounded by matrix.
struct KarstLayout {
  int nx = 2;
  int ny = 2;
  double Lx = 1.0;
  double Ly = 1.0;
  double y_interface = 0.5;
  bool conduit_enclosed = false;
  double x0 = 0.25;
  double x1 = 0.75;
  double y0 = 0.25;

  Subdomain classify(Vec2 p) const;
};

struct Cell {
  std::array<int, 3> v{};
  Subdomain tag = Subdomain::Matrix;
};

struct Facet {
  std::array<int, 2> v{};
  FacetTag tag = FacetTag::Interior;
  /// Adjacent cells; cells[1] == -1 on the outer boundary.
  std::array<int, 2> cells{-1, -1};
  /// Only meaningful for GammaCM facets.
  int conduit_cell = -1;
  int matrix_cell = -1;
  Vec2 n_cm{};
  Vec2 tau{};
};

/// Tagged triangulation. Treated as immutable after construction; the data
/// members are public so diagnostics and tests can inspect (and, in tests,
/// deliberately corrupt) them.
struct Mesh {
  KarstLayout layout;
  std::vector<Vec2> vertices;
  std::vector<Cell> cells;
  std::vector<Facet> facets;
  /// cell_facets[c][i] is the facet opposite local vertex i.
  std::vector<std::array<int, 3>> cell_facets;

  double cell_area(int c) const;
  Vec2 centroid(int c) const;
  double measure(Subdomain s) const;
  double facet_length(int f) const;
  Vec2 facet_midpoint(int f) const;
  int count_cells(Subdomain s) const;
  int count_facets(FacetTag t) const;
};

/// Builds a structured union-jack triangulation (two triangles per grid
/// quad, diagonal direction alternating with the quad parity).
/// Throws std::invalid_argument for degenerate or misaligned input.
Mesh build_rect_karst(const KarstLayout& layout);
Mesh build_rect_karst(int nx, int ny, double Lx, double Ly, double y_interface,
                      bool conduit_enclosed);

struct Violation {
  std::string invariant;
  std::string entity;  // "cell", "facet" or "mesh"
  int index = -1;
  std::string detail;
};

/// Empty iff every mesh invariant holds. Facet checks are skipped for facets
/// touching a cell whose own tag is already reported inconsistent, so a
/// single mistagged cell yields a single violation.
std::vector<Violation> validate(const Mesh& mesh);

}  // namespace chsd
