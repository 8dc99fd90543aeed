#include "chsd/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace chsd {

double potential_F(double phi) {
  const double s = phi * phi - 1.0;
  return 0.25 * s * s;
}

double potential_f(double phi) { return phi * phi * phi - phi; }

double convex_split_f(double phi_new, double phi_old) { return phi_new * phi_new * phi_new - phi_old; }

namespace {
void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

void Params::validate() const {
  require(epsilon > 0.0, "epsilon must be > 0");
  require(dt > 0.0, "dt must be > 0");
  require(varpi >= 0.0, "varpi must be >= 0");
  require(alpha_bjsj >= 0.0, "alpha_bjsj must be >= 0");
  require(kappa.lower() > 0.0, "permeability lower bound must be > 0");
  require(nu.lower() > 0.0, "viscosity values must be > 0");
  require(mobility.lower() > 0.0, "mobility values must be > 0");
  require(picard.tol_rel > 0.0, "picard_tol must be > 0");
  require(picard.max_iter >= 1, "picard_max_iter must be >= 1");
  require(picard.max_dt_halvings >= 0, "picard_max_halvings must be >= 0");
  require(energy_tol_factor > 0.0, "energy_tol_factor must be > 0");
}

State zero_state(const SpaceSet& S) {
  State s;
  s.u = Vector::Zero(S.velocity.size());
  s.p_c = Vector::Zero(S.conduit_pressure.size());
  s.p_m = Vector::Zero(S.matrix_pressure.size());
  s.phi = Vector::Zero(S.phase.size());
  s.mu = Vector::Zero(S.phase.size());
  s.phi_force = s.phi;
  return s;
}

InitialCondition::Kind InitialCondition::parse_kind(const std::string& name) {
  if (name == "uniform") return Kind::Uniform;
  if (name == "random") return Kind::Random;
  if (name == "stripe") return Kind::Stripe;
  if (name == "bubble") return Kind::Bubble;
  throw std::invalid_argument("unknown initial-condition preset '" + name +
                              "' (expected uniform, random, stripe or bubble)");
}

const char* to_string(InitialCondition::Kind k) {
  switch (k) {
    case InitialCondition::Kind::Uniform: return "uniform";
    case InitialCondition::Kind::Random: return "random";
    case InitialCondition::Kind::Stripe: return "stripe";
    case InitialCondition::Kind::Bubble: return "bubble";
  }
  return "?";
}

Vector initial_phase(const InitialCondition& ic, const Space& X, double epsilon) {
  require(epsilon > 0.0, "initial_phase: epsilon must be > 0");
  const double w = std::sqrt(2.0) * epsilon;
  switch (ic.kind) {
    case InitialCondition::Kind::Uniform:
      return Vector::Constant(X.size(), ic.value);
    case InitialCondition::Kind::Random: {
      // Portable: mt19937_64 is fully specified, and the uniform variate is
      // built from the top 53 bits instead of a library distribution.
      std::mt19937_64 gen(ic.seed);
      Vector phi(X.size());
      for (int i = 0; i < X.size(); ++i) {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        phi[i] = ic.mean + ic.amplitude * (2.0 * u - 1.0);
      }
      return phi;
    }
    case InitialCondition::Kind::Stripe: {
      require(ic.width > 0.0, "stripe width must be > 0");
      const double mid = 0.5 * X.mesh().layout.Lx;
      const double a = mid - 0.5 * ic.width, b = mid + 0.5 * ic.width;
      return interpolate(X, [&](Vec2 p) { return -std::tanh((p.x - a) / w) * std::tanh((p.x - b) / w); });
    }
    case InitialCondition::Kind::Bubble: {
      require(ic.radius > 0.0, "bubble radius must be > 0");
      return interpolate(X, [&](Vec2 p) { return std::tanh((ic.radius - norm(p - ic.center)) / w); });
    }
  }
  throw std::invalid_argument("initial_phase: unknown preset");
}

}  // namespace chsd
