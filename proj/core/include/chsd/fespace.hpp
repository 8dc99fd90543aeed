#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "chsd/mesh.hpp"
#include "chsd/quadrature.hpp"

namespace chsd {

using Vector = Eigen::VectorXd;

enum class SpaceKind {
  VectorP2_Conduit,           // u_c
  ScalarP1_Conduit,           // P_c
  ScalarP2_Matrix_zero_mean,  // P_m
  ScalarP2_Global             // phi, mu
};

const char* to_string(SpaceKind k);

/// Affine data of one triangle.
struct CellFrame {
  std::array<Vec2, 3> x{};
  std::array<Vec2, 3> grad_lambda{};
  double area = 0.0;

  Vec2 map(const std::array<double, 3>& bary) const {
    return {bary[0] * x[0].x + bary[1] * x[1].x + bary[2] * x[2].x,
            bary[0] * x[0].y + bary[1] * x[1].y + bary[2] * x[2].y};
  }
};

CellFrame cell_frame(const Mesh& mesh, int cell);

/// Local P2 ordering: vertices 0..2, then edge nodes 3..5 where node 3+i sits
/// on the edge opposite vertex i.
std::array<double, 6> p2_values(const std::array<double, 3>& bary);
std::array<Vec2, 6> p2_gradients(const std::array<double, 3>& bary, const CellFrame& frame);

/// A point inside a cell, addressed by its barycentric coordinates.
struct QPoint {
  int cell = -1;
  std::array<double, 3> bary{};
  Vec2 x{};
};

/// A point on a facet together with its images in the adjacent cells.
/// side[0] is the conduit cell for GammaCM facets (the only cell on the outer
/// boundary); side[1] is the matrix cell, or cell == -1.
struct FacetPoint {
  int facet = -1;
  Vec2 x{};
  Vec2 n_cm{};
  Vec2 tau{};
  std::array<QPoint, 2> side{};
};

class Space {
 public:
  Space(const Mesh& mesh, SpaceKind kind);

  SpaceKind kind() const { return kind_; }
  int degree() const { return degree_; }
  int components() const { return components_; }
  std::optional<Subdomain> domain() const { return domain_; }
  bool zero_mean() const { return kind_ == SpaceKind::ScalarP2_Matrix_zero_mean; }
  const Mesh& mesh() const { return *mesh_; }

  int num_nodes() const { return static_cast<int>(node_coords_.size()); }
  int size() const { return components_ * num_nodes(); }
  int nodes_per_cell() const { return degree_ == 2 ? 6 : 3; }
  int dof(int component, int node) const { return component * num_nodes() + node; }

  bool on_cell(int cell) const { return cell_nodes_[cell][0] >= 0; }
  /// Space-local node ids of a cell (first nodes_per_cell() entries), or -1.
  const std::array<int, 6>& cell_nodes(int cell) const { return cell_nodes_[cell]; }
  const std::vector<Vec2>& node_coords() const { return node_coords_; }
  /// Mesh-level P2 node id: a vertex index, or num_vertices + facet index.
  int mesh_node(int node) const { return mesh_node_[node]; }
  int node_of_mesh_node(int mesh_node) const { return node_of_mesh_node_[mesh_node]; }
  /// A (cell, local index) pair owning each node.
  std::pair<int, int> node_owner(int node) const { return node_owner_[node]; }

  /// Dofs carrying a homogeneous essential condition (sorted).
  const std::vector<int>& essential_dofs() const { return essential_; }
  bool is_essential(int dof) const { return essential_mask_[dof] != 0; }
  /// Dofs (all components) lying on facets with the given tag (sorted).
  const std::vector<int>& boundary_dofs(FacetTag tag) const {
    return boundary_[static_cast<int>(tag)];
  }

  /// Basis values of the scalar element at a point of a cell.
  std::array<double, 6> shape_values(const std::array<double, 3>& bary) const;
  std::array<Vec2, 6> shape_gradients(const std::array<double, 3>& bary,
                                      const CellFrame& frame) const;

 private:
  const Mesh* mesh_;
  SpaceKind kind_;
  int degree_;
  int components_;
  std::optional<Subdomain> domain_;
  std::vector<std::array<int, 6>> cell_nodes_;
  std::vector<Vec2> node_coords_;
  std::vector<int> mesh_node_;
  std::vector<int> node_of_mesh_node_;
  std::vector<std::pair<int, int>> node_owner_;
  std::vector<int> essential_;
  std::vector<char> essential_mask_;
  std::array<std::vector<int>, 4> boundary_;
};

/// The four spaces of the coupled problem. Holds a non-owning reference to
/// the mesh, which must outlive it.
struct SpaceSet {
  explicit SpaceSet(const Mesh& mesh);

  const Mesh& mesh;
  Space velocity;         // VectorP2_Conduit
  Space conduit_pressure; // ScalarP1_Conduit
  Space matrix_pressure;  // ScalarP2_Matrix_zero_mean
  Space phase;            // ScalarP2_Global (phi and mu)
};

SpaceSet build_spaces(const Mesh& mesh);

using ScalarFunction = std::function<double(Vec2)>;
using VectorFunction = std::function<Vec2(Vec2)>;

/// Nodal interpolants.
Vector interpolate(const Space& space, const ScalarFunction& f);
Vector interpolate(const Space& space, const VectorFunction& f);

/// Field evaluation at a point given in cell-local form.
double value(const Space& space, const Vector& dofs, const QPoint& p, int component = 0);
Vec2 gradient(const Space& space, const Vector& dofs, const QPoint& p, int component = 0);

/// Finds the cell containing `x` (first match), or cell == -1 when outside.
QPoint locate(const Mesh& mesh, Vec2 x, std::optional<Subdomain> region = std::nullopt);

/// Evaluation at an arbitrary point; throws std::out_of_range if the point is
/// outside the space's subdomain.
double eval_field(const Space& space, const Vector& dofs, Vec2 x, int component = 0);

/// Cell quadrature over the whole domain or one subdomain.
double integrate(const Mesh& mesh, std::optional<Subdomain> region,
                 const std::function<double(const QPoint&)>& integrand);

/// Facet quadrature over all facets with the given tag.
double integrate_facets(const Mesh& mesh, FacetTag tag,
                        const std::function<double(const FacetPoint&)>& integrand);

/// Maps a facet rule abscissa to a FacetPoint.
FacetPoint facet_point(const Mesh& mesh, int facet, double s);

}  // namespace chsd
