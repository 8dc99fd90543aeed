#include "chsd/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "quad_loops.hpp"

namespace chsd {

/// Blocks that depend only on the mesh and constant parameters.
struct Stepper::Frozen {
  SparseBlock velocity_mass;
  PressureDivergence div;
  InterfaceCoupling coupling;
  SparseBlock mean_row;  // (lambda, P_m)
  SparseBlock mean_col;  // (P_m, lambda)
  SparseBlock phase_mass;
  SparseBlock chem_mass;
  SparseBlock chem_gradient;  // -eps K
};

namespace {

/// Blocks frozen at phi^k for one step.
struct StepBlocks {
  SparseBlock visc;
  SparseBlock bjsj;
  SparseBlock darcy;
  SparseBlock mobility;
  CoeffField nu;
  CoeffField mob;
};

StepBlocks step_blocks(const SpaceSet& S, const Params& p, const Vector& phi_k) {
  StepBlocks b{{}, {}, {}, {}, CoeffField::from_phase(S.phase, phi_k, p.nu),
               CoeffField::from_phase(S.phase, phi_k, p.mobility)};
  b.visc = asm_stokes_visc(S, b.nu);
  b.bjsj = asm_bjsj(S, p.alpha_bjsj, b.nu, p.kappa);
  b.darcy = asm_darcy(S, p.kappa, b.nu);
  b.mobility = asm_phase_stiffness(S, b.mob, Field::Phase, Field::ChemicalPotential);
  return b;
}

double relative_update(const Vector& x, const Vector& x_old) {
  const double d = (x - x_old).norm();
  const double n = x.norm();
  return n > 0.0 ? d / n : d;
}

}  // namespace

Stepper::Stepper(const SpaceSet& spaces, Params params, StepperOptions options)
    : spaces_(spaces), params_(std::move(params)), options_(options) {
  params_.validate();
  layout_ = BlockLayout::from_spaces(spaces_);
  essential_ = spaces_.velocity.essential_dofs();
  for (int& e : essential_) e += layout_.offset_of(Field::Velocity);

  fixed_ = std::make_unique<Frozen>();
  Frozen& f = *fixed_;
  f.velocity_mass = asm_velocity_mass(spaces_);
  f.div = asm_pressure_div(spaces_);
  f.coupling = asm_interface_coupling(spaces_);
  f.mean_row = asm_mean_constraint(spaces_);
  f.mean_col = {Field::MatrixPressure, Field::MeanMultiplier, f.mean_row.matrix.transpose()};
  f.phase_mass = asm_phase_mass(spaces_, Field::Phase, Field::Phase);
  f.chem_mass = asm_phase_mass(spaces_, Field::ChemicalPotential, Field::ChemicalPotential);
  f.chem_gradient = asm_phase_stiffness(spaces_, CoeffField::constant(-params_.epsilon),
                                        Field::ChemicalPotential, Field::Phase);
}

Stepper::~Stepper() = default;

Vector Stepper::pack(const State& s) const {
  Vector x(layout_.total);
  x.segment(layout_.offset_of(Field::Velocity), layout_.size_of(Field::Velocity)) = s.u;
  x.segment(layout_.offset_of(Field::ConduitPressure), layout_.size_of(Field::ConduitPressure)) = s.p_c;
  x.segment(layout_.offset_of(Field::MatrixPressure), layout_.size_of(Field::MatrixPressure)) = s.p_m;
  x[layout_.offset_of(Field::MeanMultiplier)] = s.lambda;
  x.segment(layout_.offset_of(Field::Phase), layout_.size_of(Field::Phase)) = s.phi;
  x.segment(layout_.offset_of(Field::ChemicalPotential), layout_.size_of(Field::ChemicalPotential)) = s.mu;
  return x;
}

void Stepper::unpack(const Vector& x, State& s) const {
  auto seg = [&](Field f) { return x.segment(layout_.offset_of(f), layout_.size_of(f)); };
  s.u = seg(Field::Velocity);
  s.p_c = seg(Field::ConduitPressure);
  s.p_m = seg(Field::MatrixPressure);
  s.lambda = x[layout_.offset_of(Field::MeanMultiplier)];
  s.phi = seg(Field::Phase);
  s.mu = seg(Field::ChemicalPotential);
}

State Stepper::initial_state(const InitialCondition& ic) const {
  return initial_state_from_phase(initial_phase(ic, spaces_.phase, params_.epsilon));
}

State Stepper::initial_state_from_phase(Vector phi) const {
  const Space& X = spaces_.phase;
  if (phi.size() != X.size()) throw std::invalid_argument("initial_state: phase vector length mismatch");
  State s = zero_state(spaces_);
  s.phi = std::move(phi);
  s.phi_force = s.phi;

  // M mu = (f(phi0), psi) / eps + eps K phi0
  const double eps = params_.epsilon;
  Vector rhs = -(fixed_->chem_gradient.matrix * s.phi);
  detail::for_each_cell_point(spaces_.mesh, std::nullopt, [&](const detail::CellPoint& cp, const CellFrame&) {
    const auto& xn = X.cell_nodes(cp.p.cell);
    const double f = potential_f(detail::field_at(s.phi, xn, cp.N)) / eps;
    for (int i = 0; i < 6; ++i) rhs[xn[i]] += cp.w * f * cp.N[i];
  });
  const Eigen::SparseMatrix<double> m = fixed_->chem_mass.matrix;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(m);
  if (ldlt.info() != Eigen::Success) throw SolverError("numeric", "phase mass matrix is not positive definite");
  s.mu = ldlt.solve(rhs);
  return s;
}

BlockSystem Stepper::base_system(const State& state, double dt) const {
  const StepBlocks sb = step_blocks(spaces_, params_, state.phi);
  const Frozen& f = *fixed_;
  std::vector<BlockTerm> terms = {
      {&sb.visc, 1.0},
      {&sb.bjsj, 1.0},
      {&f.div.grad, 1.0},
      {&f.coupling.pressure_on_velocity, 1.0},
      {&f.div.div, 1.0},
      {&f.coupling.flux_on_pressure, 1.0},
      {&sb.darcy, 1.0},
      {&f.mean_col, 1.0},
      {&f.mean_row, 1.0},
      {&f.phase_mass, 1.0 / dt},
      {&sb.mobility, 1.0},
      {&f.chem_mass, 1.0},
      {&f.chem_gradient, 1.0},
  };
  if (params_.varpi != 0.0) terms.push_back({&f.velocity_mass, params_.varpi / dt});

  BlockSystem sys = compose(layout_, terms, essential_);
  const Vector mphi = f.phase_mass.matrix * state.phi;
  if (params_.varpi != 0.0)
    sys.rhs_segment(Field::Velocity) = (params_.varpi / dt) * (f.velocity_mass.matrix * state.u);
  sys.rhs_segment(Field::Phase) = mphi / dt;
  sys.rhs_segment(Field::ChemicalPotential) = -mphi / params_.epsilon;
  for (int e : sys.essential) sys.rhs[e] = 0.0;
  return sys;
}

BlockSystem Stepper::with_lag(const BlockSystem& base, const State& state, const Vector& phi_lag) const {
  const CoeffField nu = CoeffField::from_phase(spaces_.phase, state.phi, params_.nu);
  CahnHilliardInput in;
  in.kappa = &params_.kappa;
  in.nu = &nu;
  in.epsilon = params_.epsilon;
  in.phi_lag = &phi_lag;
  in.cubic = params_.picard.cubic;
  const CahnHilliardLagged lag = asm_ch_lagged(spaces_, in);
  const std::vector<BlockTerm> terms = {
      {&lag.velocity_chem, 1.0},  {&lag.pressure_chem, 1.0}, {&lag.phase_chem_darcy, 1.0},
      {&lag.phase_velocity, 1.0}, {&lag.phase_pressure, 1.0}, {&lag.chem_phase_cubic, 1.0},
  };
  BlockSystem sys = compose(layout_, terms, essential_, false);
  sys.matrix += base.matrix;
  sys.matrix.makeCompressed();
  sys.rhs = base.rhs;
  sys.rhs_segment(Field::ChemicalPotential) += lag.chem_rhs;
  return sys;
}

BlockSystem Stepper::assemble(const State& state, const Vector& phi_lag, double dt) const {
  return with_lag(base_system(state, dt), state, phi_lag);
}

bool Stepper::try_step(const State& state, double dt, State& out, StepReport& rep) {
  const PicardControls& pc = params_.picard;
  rep = StepReport{};
  rep.step = state.k + 1;
  rep.dt_used = dt;

  const BlockSystem base = base_system(state, dt);
  Vector x_old = pack(state);
  Vector phi_lag = state.phi;
  Vector phi_force = phi_lag;
  Vector x;
  SolveOptions opts;
  opts.reuse_factorization = true;
  for (int it = 1; it <= pc.max_iter; ++it) {
    const BlockSystem sys = with_lag(base, state, phi_lag);
    const SolveResult r = solve(sys, &lu_, opts);
    rep.linear_residuals.push_back(r.relative_residual);
    rep.residual_bound = r.residual_bound;
    rep.degraded = rep.degraded || r.degraded;
    rep.factorizations += r.factorized ? 1 : 0;
    x = r.x;
    rep.picard_iters = it;
    rep.picard_residual = relative_update(x, x_old);
    phi_force = phi_lag;
    phi_lag = x.segment(layout_.offset_of(Field::Phase), layout_.size_of(Field::Phase));
    x_old = x;
    if (!std::isfinite(rep.picard_residual)) return false;
    if (rep.picard_residual < pc.tol_rel) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged) return false;

  out = state;
  unpack(x, out);
  out.phi_force = std::move(phi_force);
  out.t = state.t + dt;
  out.k = state.k + 1;
  rep.t = out.t;

  Params p = params_;
  p.dt = dt;
  const StepCheck chk = check_step(state, out, p, spaces_);
  rep.energy_before = chk.energy_before;
  rep.energy_after = chk.energy_after;
  rep.dissipation = chk.dissipation;
  rep.increments = chk.increments;
  rep.slack = chk.slack;
  rep.tol_E = chk.tol;
  rep.mass_before = mass(spaces_.phase, state.phi);
  rep.mass_after = mass(spaces_.phase, out.phi);
  rep.div_defect = div_defect(out, spaces_);
  const DarcyField um = darcy_velocity(out, state.phi, params_, spaces_);
  rep.z_norm = z_norm(out, um, spaces_);
  rep.weak_div_residual = weak_divergence_residual(um, out, spaces_).lpNorm<Eigen::Infinity>();

  if (options_.check_fixed_point) {
    const BlockSystem sys = with_lag(base, state, out.phi);
    const Vector res = sys.matrix * x - sys.rhs;
    const double bn = sys.rhs.norm();
    rep.fixed_point_residual = bn > 0.0 ? res.norm() / bn : res.norm();
  }
  return true;
}

StepReport Stepper::step(State& state, double dt_max) {
  double dt = params_.dt;
  if (dt_max > 0.0) dt = std::min(dt, dt_max);
  StepReport rep;
  State out;
  for (int h = 0; h <= params_.picard.max_dt_halvings; ++h, dt *= 0.5) {
    if (try_step(state, dt, out, rep)) {
      rep.halvings = h;
      state = std::move(out);
      return rep;
    }
  }
  rep.halvings = params_.picard.max_dt_halvings;
  std::ostringstream os;
  os << "Picard iteration did not converge at step " << state.k + 1 << " (t = " << state.t
     << ") after " << params_.picard.max_dt_halvings << " time-step halvings; last relative update "
     << rep.picard_residual;
  throw StepFailure(os.str(), rep);
}

RunResult run(Stepper& stepper, State init, double T, const StepCallback& on_step) {
  const double dt = stepper.params().dt;
  if (!(T >= 0.0)) throw std::invalid_argument("run: T must be >= 0");
  const double n = T / dt;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
    throw std::invalid_argument("run: T must be an integer multiple of dt");

  RunResult res;
  res.final_state = std::move(init);
  State& s = res.final_state;
  const double t_end = s.t + T;
  const double t_eps = 1e-9 * dt;
  try {
    while (t_end - s.t > t_eps) {
      const double remaining = t_end - s.t;
      const double dt_max = remaining >= dt - t_eps ? dt : remaining;
      res.reports.push_back(stepper.step(s, dt_max));
      if (on_step) on_step(s, res.reports.back());
    }
    res.complete = true;
  } catch (const StepFailure& e) {
    res.failed_step = e.report();
    res.failure = e.what();
  } catch (const SolverError& e) {
    res.failure = std::string("linear solver failure (") + e.what() + ")";
  }
  return res;
}

}  // namespace chsd
