#pragma once

#include <cstdint>
#include <string>

#include "chsd/coefficients.hpp"
#include "chsd/forms.hpp"

namespace chsd {

/// Double-well potential F(phi) = (phi^2 - 1)^2 / 4.
double potential_F(double phi);
/// f = F'(phi) = phi^3 - phi.
double potential_f(double phi);
/// Convex-concave splitting f~(a, b) = a^3 - b: convex part implicit, concave explicit.
double convex_split_f(double phi_new, double phi_old);

struct PicardControls {
  double tol_rel = 1e-8;
  int max_iter = 50;
  int max_dt_halvings = 5;
  CubicLinearization cubic = CubicLinearization::Newton;
};

struct Params {
  double varpi = 1.0;        // inertia switch; 0 selects stationary Stokes
  double epsilon = 0.05;
  double dt = 1e-4;
  double alpha_bjsj = 1.0;
  CoeffField kappa = CoeffField::constant(1.0);
  PhaseBlend nu{1.0, 1.0};
  PhaseBlend mobility{1.0, 1.0};
  PicardControls picard;
  /// tol_E = energy_tol_factor * picard.tol_rel * (1 + |E^k|).
  double energy_tol_factor = 100.0;

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;
};

/// Coefficient vectors of all unknowns at one time level.
struct State {
  Vector u;         // u_c, blocked by component
  Vector p_c;
  Vector p_m;
  double lambda = 0.0;
  Vector phi;
  Vector mu;
  /// Phase iterate that entered the convection and elastic-force terms of the
  /// last solve (equals phi at a Picard fixed point, up to tolerance).
  Vector phi_force;
  double t = 0.0;
  int k = 0;
};

State zero_state(const SpaceSet& spaces);

struct InitialCondition {
  enum class Kind { Uniform, Random, Stripe, Bubble };
  Kind kind = Kind::Uniform;
  double value = 0.0;  // uniform
  double mean = 0.0;   // random
  double amplitude = 0.05;
  std::uint64_t seed = 42;
  double width = 0.5;  // stripe: vertical band of phase +1 centred in x
  Vec2 center{0.5, 0.5};
  double radius = 0.25;

  static Kind parse_kind(const std::string& name);
};
const char* to_string(InitialCondition::Kind k);

/// Nodal phase field of a preset; interfaces get the tanh profile of width epsilon.
Vector initial_phase(const InitialCondition& ic, const Space& phase, double epsilon);

}  // namespace chsd
