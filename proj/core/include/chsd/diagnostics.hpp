#pragma once

#include <vector>

#include "chsd/darcy.hpp"
#include "chsd/model.hpp"

namespace chsd {

/// The four dissipation integrals, coefficients frozen at phi^k.
struct Dissipation {
  double darcy = 0.0;     // (nu / kappa u_m, u_m)_m
  double visc = 0.0;      // 2 (nu D(u_c), D(u_c))_c
  double mobility = 0.0;  // (M grad mu, grad mu)
  double bjsj = 0.0;      // alpha / sqrt(2 kappa) int_Gcm nu (u_c . tau)^2

  double total() const { return darcy + visc + mobility + bjsj; }
};

/// int_c varpi/2 |u_c|^2 + int eps/2 |grad phi|^2 + F(phi) / eps.
double energy(const State& state, const Params& params, const SpaceSet& spaces);

/// `prev` supplies phi^k for the frozen coefficients; flow fields come from `next`.
Dissipation dissipation(const State& prev, const State& next, const Params& params,
                        const SpaceSet& spaces);
Dissipation dissipation(const State& prev, const State& next, const Params& params,
                        const SpaceSet& spaces, const DarcyField& um);

struct StepCheck {
  bool pass = false;
  double slack = 0.0;  // LHS - RHS of the discrete energy inequality
  double tol = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  Dissipation dissipation;
  double increments = 0.0;  // varpi/2 |du|^2 + eps/2 |grad dphi|^2 + 1/(2 eps) |dphi|^2
};

/// E^{k+1} + dt D + increments <= E^k + tol. params.dt must be the step actually
/// taken. A negative `tol` selects energy_tol_factor * tol_rel * (1 + |E^k|).
StepCheck check_step(const State& prev, const State& next, const Params& params,
                     const SpaceSet& spaces, double tol = -1.0);

/// int phi.
double mass(const Space& phase, const Vector& phi);
/// Cumulative |m^k - m^0| for a sequence of masses starting at m^0.
std::vector<double> mass_drift(const std::vector<double>& masses);

/// |(div u_c, phi - Pi_Q phi)_c|, Pi_Q the L2 projection onto the conduit pressure space.
double div_defect(const State& state, const SpaceSet& spaces);

struct ZNorm {
  double strain = 0.0;      // ||D(u_c)||^2
  double tangential = 0.0;  // ||u_c . tau||^2 on Gcm
  double darcy = 0.0;       // ||u_m||^2
  double squared() const { return strain + tangential + darcy; }
};
ZNorm z_norm_terms(const State& state, const DarcyField& um, const SpaceSet& spaces);
double z_norm(const State& state, const DarcyField& um, const SpaceSet& spaces);

/// ||u_c||_{L2(conduit)}.
double velocity_l2(const State& state, const SpaceSet& spaces);

}  // namespace chsd
