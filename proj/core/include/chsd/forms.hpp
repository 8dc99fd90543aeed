#pragma once

#include <Eigen/SparseCore>

#include "chsd/coefficients.hpp"
#include "chsd/fespace.hpp"

namespace chsd {

/// Unknowns of the coupled system, in block order.
enum class Field {
  Velocity,          // u_c
  ConduitPressure,   // P_c
  MatrixPressure,    // P_m
  MeanMultiplier,    // enforces zero mean of P_m
  Phase,             // phi
  ChemicalPotential  // mu
};

constexpr int kFieldCount = 6;
const char* to_string(Field f);

/// Number of unknowns carried by a field.
int field_size(const SpaceSet& spaces, Field f);

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// A sparse operator between two fields. Explicit zeros are pruned.
struct SparseBlock {
  Field row = Field::Velocity;
  Field col = Field::Velocity;
  SparseMatrix matrix;

  int rows() const { return static_cast<int>(matrix.rows()); }
  int cols() const { return static_cast<int>(matrix.cols()); }
};

SparseBlock make_block(Field row, Field col, int rows, int cols, const Triplets& triplets);

/// (u, v)_c on the velocity space.
SparseBlock asm_velocity_mass(const SpaceSet& spaces);

/// 2 (nu D(u), D(v))_c. Throws if nu is not positive at some quadrature point.
SparseBlock asm_stokes_visc(const SpaceSet& spaces, const CoeffField& nu);

struct PressureDivergence {
  SparseBlock div;   // (P_c, u_c): -(q, div v)
  SparseBlock grad;  // (u_c, P_c): transpose of div
};
PressureDivergence asm_pressure_div(const SpaceSet& spaces);

/// (kappa / nu grad P, grad q)_m. kappa must lie within its declared bounds
/// and those bounds must be positive.
SparseBlock asm_darcy(const SpaceSet& spaces, const CoeffField& kappa, const CoeffField& nu);

struct InterfaceCoupling {
  SparseBlock pressure_on_velocity;  // (u_c, P_m): + int_Gcm P (v . n_cm)
  SparseBlock flux_on_pressure;      // (P_m, u_c): - int_Gcm (u . n_cm) q
};
/// Throws if the mesh has no GammaCM facets.
InterfaceCoupling asm_interface_coupling(const SpaceSet& spaces);

/// alpha / sqrt(2 kappa) int_Gcm nu (u . tau)(v . tau), with nu taken on the
/// matrix side. Throws for alpha < 0.
SparseBlock asm_bjsj(const SpaceSet& spaces, double alpha, const CoeffField& nu,
                     const CoeffField& kappa);

/// Row of int_m q, coupling P_m to the mean multiplier.
SparseBlock asm_mean_constraint(const SpaceSet& spaces);

/// (psi, phi) and (grad psi, c grad phi) on the global phase space.
SparseBlock asm_phase_mass(const SpaceSet& spaces, Field row, Field col);
SparseBlock asm_phase_stiffness(const SpaceSet& spaces, const CoeffField& c, Field row, Field col);

/// How the cubic part of the chemical potential is linearized around the
/// Picard iterate phi_l. Both have the same fixed point.
enum class CubicLinearization {
  Lagged,  // (phi_l^2 phi, psi)
  Newton   // (3 phi_l^2 phi, psi) - (2 phi_l^3, psi)
};

struct CahnHilliardInput {
  const CoeffField* mobility = nullptr;  // M(phi^k)
  const CoeffField* kappa = nullptr;
  const CoeffField* nu = nullptr;        // nu(phi^k), used for the Darcy velocity
  double epsilon = 1.0;
  double dt = 1.0;
  const Vector* phi_lag = nullptr;       // Picard iterate phi_l
  CubicLinearization cubic = CubicLinearization::Lagged;
};

/// Every block of the Cahn-Hilliard rows plus the elastic-force blocks, for
/// one Picard iterate. Blocks sharing a slot are summed by the composer.
struct CahnHilliardBlocks {
  SparseBlock phase_phase;          // (phi, phi):  (phi, psi) / dt
  SparseBlock phase_chem;           // (phi, mu):   (M grad mu, grad psi)
  SparseBlock phase_chem_darcy;     // (phi, mu):   (kappa/nu |grad phi_l|^2 mu, psi)_m
  SparseBlock phase_velocity;       // (phi, u_c):  (u . grad phi_l, psi)_c
  SparseBlock phase_pressure;       // (phi, P_m): -(kappa/nu grad P . grad phi_l, psi)_m
  SparseBlock chem_chem;            // (mu, mu):    (mu, psi)
  SparseBlock chem_phase_gradient;  // (mu, phi):  -eps (grad phi, grad psi)
  SparseBlock chem_phase_cubic;     // (mu, phi):  -(c/eps)(phi_l^2 phi, psi), c = 1 or 3
  SparseBlock velocity_chem;        // (u_c, mu):  -(mu grad phi_l, v)_c
  SparseBlock pressure_chem;        // (P_m, mu):  -(kappa/nu mu grad phi_l, grad q)_m
  /// Newton only: -(2/eps)(phi_l^3, psi) on the mu rows; zero otherwise.
  Vector chem_rhs;
};

CahnHilliardBlocks asm_ch_blocks(const SpaceSet& spaces, const CahnHilliardInput& in);

/// The lag-dependent subset (everything involving phi_l), for Picard rebuilds.
struct CahnHilliardLagged {
  SparseBlock phase_chem_darcy;
  SparseBlock phase_velocity;
  SparseBlock phase_pressure;
  SparseBlock chem_phase_cubic;
  SparseBlock velocity_chem;
  SparseBlock pressure_chem;
  Vector chem_rhs;
};
CahnHilliardLagged asm_ch_lagged(const SpaceSet& spaces, const CahnHilliardInput& in);

}  // namespace chsd
