#pragma once

// Quadrature loops shared by the assembly and diagnostics translation units.

#include <array>
#include <optional>
#include <vector>

#include "chsd/fespace.hpp"
#include "chsd/quadrature.hpp"

namespace chsd::detail {

/// Per-quadrature-point data of one cell.
struct CellPoint {
  QPoint p;
  double w = 0.0;  // physical weight
  std::array<double, 6> N{};
  std::array<Vec2, 6> G{};
};

template <class Fn>
void for_each_cell_point(const Mesh& mesh, std::optional<Subdomain> region, Fn&& fn) {
  const CellRule& rule = cell_rule();
  const int ncells = static_cast<int>(mesh.cells.size());
  CellPoint cp;
  for (int c = 0; c < ncells; ++c) {
    if (region && mesh.cells[c].tag != *region) continue;
    const CellFrame f = cell_frame(mesh, c);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      cp.p = {c, rule.points[q], f.map(rule.points[q])};
      cp.w = 2.0 * f.area * rule.weights[q];
      cp.N = p2_values(rule.points[q]);
      cp.G = p2_gradients(rule.points[q], f);
      fn(cp, f);
    }
  }
}

/// Calls fn(cell, frame, points) once per cell with all its quadrature points.
template <class Fn>
void for_each_cell(const Mesh& mesh, std::optional<Subdomain> region, Fn&& fn) {
  const CellRule& rule = cell_rule();
  const int ncells = static_cast<int>(mesh.cells.size());
  std::vector<CellPoint> pts(rule.points.size());
  for (int c = 0; c < ncells; ++c) {
    if (region && mesh.cells[c].tag != *region) continue;
    const CellFrame f = cell_frame(mesh, c);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      CellPoint& cp = pts[q];
      cp.p = {c, rule.points[q], f.map(rule.points[q])};
      cp.w = 2.0 * f.area * rule.weights[q];
      cp.N = p2_values(rule.points[q]);
      cp.G = p2_gradients(rule.points[q], f);
    }
    fn(c, f, static_cast<const std::vector<CellPoint>&>(pts));
  }
}

/// Dense element matrix, accumulated over quadrature points and scattered once.
template <int R, int C>
struct LocalMatrix {
  std::array<int, R> rows{};
  std::array<int, C> cols{};
  std::array<double, R * C> a{};

  double& operator()(int i, int j) { return a[i * C + j]; }
  void clear() { a.fill(0.0); }
  template <class Triplets>
  void scatter(Triplets& t, double scale = 1.0) const {
    for (int i = 0; i < R; ++i)
      for (int j = 0; j < C; ++j)
        if (a[i * C + j] != 0.0) t.emplace_back(rows[i], cols[j], scale * a[i * C + j]);
  }
};

template <class Fn>
void for_each_interface_point(const Mesh& mesh, Fn&& fn) {
  const FacetRule& rule = facet_rule();
  for (int f = 0; f < static_cast<int>(mesh.facets.size()); ++f) {
    if (mesh.facets[f].tag != FacetTag::GammaCM) continue;
    const double len = mesh.facet_length(f);
    for (std::size_t q = 0; q < rule.points.size(); ++q)
      fn(facet_point(mesh, f, rule.points[q]), len * rule.weights[q]);
  }
}

inline double field_at(const Vector& v, const std::array<int, 6>& cn, const std::array<double, 6>& N) {
  double r = 0.0;
  for (int i = 0; i < 6; ++i) r += N[i] * v[cn[i]];
  return r;
}

inline Vec2 grad_at(const Vector& v, const std::array<int, 6>& cn, const std::array<Vec2, 6>& G) {
  Vec2 r{};
  for (int i = 0; i < 6; ++i) r = r + v[cn[i]] * G[i];
  return r;
}

}  // namespace chsd::detail
