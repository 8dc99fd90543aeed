#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "chsd/diagnostics.hpp"
#include "chsd/lsolve.hpp"
#include "chsd/model.hpp"

namespace chsd {

struct StepReport {
  int step = 0;  // index of the new time level
  double t = 0.0;
  double dt_used = 0.0;
  int halvings = 0;
  bool converged = false;

  int picard_iters = 0;
  double picard_residual = 0.0;  // final relative update
  std::vector<double> linear_residuals;
  double residual_bound = 0.0;  // certified bound of the last linear solve
  int factorizations = 0;       // fresh LU factorizations in this step
  bool degraded = false;        // some linear solve missed the residual target

  double energy_before = 0.0;
  double energy_after = 0.0;
  Dissipation dissipation;
  double increments = 0.0;
  double slack = 0.0;
  double tol_E = 0.0;
  double mass_before = 0.0;
  double mass_after = 0.0;
  double div_defect = 0.0;
  double z_norm = 0.0;
  double weak_div_residual = 0.0;  // max over the matrix-pressure basis
  /// Relative residual of the fully implicit system at the accepted iterate
  /// (only filled when StepperOptions::check_fixed_point is set).
  double fixed_point_residual = -1.0;
};

class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, StepReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const StepReport& report() const { return report_; }

 private:
  StepReport report_;
};

struct StepperOptions {
  bool check_fixed_point = false;
};

/// Advances the coupled system. Holds the time-independent blocks and the
/// factorization cache, so one instance serves a whole run.
class Stepper {
 public:
  Stepper(const SpaceSet& spaces, Params params, StepperOptions options = {});
  ~Stepper();
  Stepper(const Stepper&) = delete;
  Stepper& operator=(const Stepper&) = delete;

  const Params& params() const { return params_; }
  const SpaceSet& spaces() const { return spaces_; }
  const BlockLayout& layout() const { return layout_; }

  /// u = 0, pressures 0, phi from the preset, mu solving the chemical-potential
  /// equation with phi^{k+1} = phi^k = phi_0.
  State initial_state(const InitialCondition& ic) const;
  State initial_state_from_phase(Vector phi) const;

  /// One step of length min(params.dt, dt_max), halving on Picard failure.
  /// Throws StepFailure after all halvings, SolverError on linear failure.
  StepReport step(State& state, double dt_max = -1.0);

  /// Attempts one step of exactly `dt` without halving; returns false if the
  /// Picard iteration does not converge (state untouched).
  bool try_step(const State& state, double dt, State& out, StepReport& report);

  /// Block system of one Picard iterate: coefficients frozen at `state`, lags
  /// at `phi_lag`. Exposed for verification.
  BlockSystem assemble(const State& state, const Vector& phi_lag, double dt) const;

  Vector pack(const State& s) const;
  void unpack(const Vector& x, State& s) const;

 private:
  struct Frozen;
  BlockSystem base_system(const State& state, double dt) const;
  BlockSystem with_lag(const BlockSystem& base, const State& state, const Vector& phi_lag) const;

  const SpaceSet& spaces_;
  Params params_;
  StepperOptions options_;
  BlockLayout layout_;
  std::vector<int> essential_;
  std::unique_ptr<Frozen> fixed_;
  SparseLU lu_;
};

struct RunResult {
  State final_state;
  std::vector<StepReport> reports;
  bool complete = false;
  std::string failure;
  std::optional<StepReport> failed_step;
};

using StepCallback = std::function<void(const State&, const StepReport&)>;

/// Integrates from `init` to `T` (T = N dt); on failure returns the partial
/// run with complete == false. `on_step` sees every accepted step.
RunResult run(Stepper& stepper, State init, double T, const StepCallback& on_step = {});

}  // namespace chsd
