#pragma once

#include <array>
#include <vector>

#include "chsd/model.hpp"

namespace chsd {

/// Post-processed Darcy velocity u_m = -kappa/nu(phi^k) (grad P_m - mu grad phi)
/// on matrix cells.
struct DarcyField {
  /// Values at the cell quadrature points, cell_offset[c] + q; conduit cells have offset -1.
  std::vector<Vec2> qp;
  std::vector<int> cell_offset;
  /// Cellwise L2 projection onto P1, coefficients at the three cell vertices.
  std::vector<std::array<Vec2, 3>> p1;

  Vec2 at(int cell, int q) const { return qp[cell_offset[cell] + q]; }
  Vec2 cell_average(int cell) const;
};

/// `phi_coeff` is the phase field the viscosity is frozen at (phi^k); the
/// elastic-force gradient uses state.phi_force.
DarcyField darcy_velocity(const State& state, const Vector& phi_coeff, const Params& params,
                          const SpaceSet& spaces);

/// r_i = (u_m, grad q_i)_m + int_Gcm (u_c . n_cm) q_i over the matrix-pressure basis.
Vector weak_divergence_residual(const DarcyField& um, const State& state, const SpaceSet& spaces);

}  // namespace chsd
