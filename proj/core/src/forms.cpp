#include "chsd/forms.hpp"

#include "quad_loops.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace chsd {

const char* to_string(Field f) {
  switch (f) {
    case Field::Velocity: return "u_c";
    case Field::ConduitPressure: return "P_c";
    case Field::MatrixPressure: return "P_m";
    case Field::MeanMultiplier: return "lambda";
    case Field::Phase: return "phi";
    case Field::ChemicalPotential: return "mu";
  }
  return "?";
}

int field_size(const SpaceSet& spaces, Field f) {
  switch (f) {
    case Field::Velocity: return spaces.velocity.size();
    case Field::ConduitPressure: return spaces.conduit_pressure.size();
    case Field::MatrixPressure: return spaces.matrix_pressure.size();
    case Field::MeanMultiplier: return 1;
    case Field::Phase:
    case Field::ChemicalPotential: return spaces.phase.size();
  }
  return 0;
}

SparseBlock make_block(Field row, Field col, int rows, int cols, const Triplets& triplets) {
  SparseBlock b{row, col, SparseMatrix(rows, cols)};
  b.matrix.setFromTriplets(triplets.begin(), triplets.end());
  b.matrix.prune(0.0);
  b.matrix.makeCompressed();
  return b;
}

namespace {

using namespace detail;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

/// Local velocity dof index of (component a, node i): a * 6 + i.
void velocity_rows(const Space& V, int cell, std::array<int, 12>& out) {
  const auto& vn = V.cell_nodes(cell);
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 6; ++i) out[a * 6 + i] = V.dof(a, vn[i]);
}

void scalar_rows(const Space& X, int cell, std::array<int, 6>& out) {
  const auto& cn = X.cell_nodes(cell);
  for (int i = 0; i < 6; ++i) out[i] = cn[i];
}

}  // namespace

SparseBlock asm_velocity_mass(const SpaceSet& S) {
  const Space& V = S.velocity;
  Triplets t;
  t.reserve(S.mesh.count_cells(Subdomain::Conduit) * 72);
  LocalMatrix<12, 12> A;
  for_each_cell(S.mesh, Subdomain::Conduit, [&](int c, const CellFrame&, const std::vector<CellPoint>& pts) {
    A.clear();
    velocity_rows(V, c, A.rows);
    A.cols = A.rows;
    for (const CellPoint& cp : pts)
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
          const double v = cp.w * cp.N[i] * cp.N[j];
          A(i, j) += v;
          A(6 + i, 6 + j) += v;
        }
    A.scatter(t);
  });
  return make_block(Field::Velocity, Field::Velocity, V.size(), V.size(), t);
}

SparseBlock asm_stokes_visc(const SpaceSet& S, const CoeffField& nu) {
  const Space& V = S.velocity;
  Triplets t;
  t.reserve(S.mesh.count_cells(Subdomain::Conduit) * 144);
  LocalMatrix<12, 12> A;
  for_each_cell(S.mesh, Subdomain::Conduit, [&](int c, const CellFrame&, const std::vector<CellPoint>& pts) {
    A.clear();
    velocity_rows(V, c, A.rows);
    A.cols = A.rows;
    for (const CellPoint& cp : pts) {
      const double nv = nu(cp.p);
      if (!(nv > 0.0)) {
        std::ostringstream os;
        os << "asm_stokes_visc: non-positive viscosity " << nv << " at (" << cp.p.x.x << ", "
           << cp.p.x.y << ") in cell " << c;
        throw std::invalid_argument(os.str());
      }
      const double wn = cp.w * nv;
      for (int i = 0; i < 6; ++i) {
        const double gi[2] = {cp.G[i].x, cp.G[i].y};
        for (int j = 0; j < 6; ++j) {
          const double gj[2] = {cp.G[j].x, cp.G[j].y};
          const double gg = dot(cp.G[i], cp.G[j]);
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              // 2 D(N_i e_a) : D(N_j e_b) = delta_ab grad N_i . grad N_j + d_b N_i d_a N_j
              A(a * 6 + i, b * 6 + j) += wn * ((a == b ? gg : 0.0) + gi[b] * gj[a]);
        }
      }
    }
    A.scatter(t);
  });
  return make_block(Field::Velocity, Field::Velocity, V.size(), V.size(), t);
}

PressureDivergence asm_pressure_div(const SpaceSet& S) {
  const Space& V = S.velocity;
  const Space& Q = S.conduit_pressure;
  Triplets div, grad;
  const std::size_t n = S.mesh.count_cells(Subdomain::Conduit) * 36;
  div.reserve(n);
  grad.reserve(n);
  LocalMatrix<3, 12> B;
  for_each_cell(S.mesh, Subdomain::Conduit, [&](int c, const CellFrame&, const std::vector<CellPoint>& pts) {
    B.clear();
    const auto& qn = Q.cell_nodes(c);
    for (int k = 0; k < 3; ++k) B.rows[k] = qn[k];
    velocity_rows(V, c, B.cols);
    for (const CellPoint& cp : pts)
      for (int k = 0; k < 3; ++k) {
        const double L = cp.w * cp.p.bary[k];
        for (int j = 0; j < 6; ++j) {
          B(k, j) -= L * cp.G[j].x;
          B(k, 6 + j) -= L * cp.G[j].y;
        }
      }
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 12; ++j) {
        const double v = B(k, j);
        if (v == 0.0) continue;
        div.emplace_back(B.rows[k], B.cols[j], v);
        grad.emplace_back(B.cols[j], B.rows[k], v);
      }
  });
  return {make_block(Field::ConduitPressure, Field::Velocity, Q.size(), V.size(), div),
          make_block(Field::Velocity, Field::ConduitPressure, V.size(), Q.size(), grad)};
}

SparseBlock asm_darcy(const SpaceSet& S, const CoeffField& kappa, const CoeffField& nu) {
  require(kappa.lower() > 0.0, "asm_darcy: permeability lower bound must be positive");
  const Space& P = S.matrix_pressure;
  Triplets t;
  t.reserve(S.mesh.count_cells(Subdomain::Matrix) * 36);
  LocalMatrix<6, 6> A;
  for_each_cell(S.mesh, Subdomain::Matrix, [&](int c, const CellFrame&, const std::vector<CellPoint>& pts) {
    A.clear();
    scalar_rows(P, c, A.rows);
    A.cols = A.rows;
    for (const CellPoint& cp : pts) {
      const double k = kappa(cp.p);
      if (k < kappa.lower() || k > kappa.upper() || !std::isfinite(k)) {
        std::ostringstream os;
        os << "asm_darcy: permeability " << k << " outside [" << kappa.lower() << ", "
           << kappa.upper() << "] at (" << cp.p.x.x << ", " << cp.p.x.y << ")";
        throw std::invalid_argument(os.str());
      }
      const double n = nu(cp.p);
      require(n > 0.0, "asm_darcy: non-positive viscosity");
      const double w = cp.w * k / n;
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) A(i, j) += w * dot(cp.G[i], cp.G[j]);
    }
    A.scatter(t);
  });
  return make_block(Field::MatrixPressure, Field::MatrixPressure, P.size(), P.size(), t);
}

InterfaceCoupling asm_interface_coupling(const SpaceSet& S) {
  require(S.mesh.count_facets(FacetTag::GammaCM) > 0,
          "asm_interface_coupling: mesh has no GammaCM facets");
  const Space& V = S.velocity;
  const Space& P = S.matrix_pressure;
  Triplets up, pu;
  for_each_interface_point(S.mesh, [&](const FacetPoint& fp, double w) {
    const auto Nc = p2_values(fp.side[0].bary);
    const auto Nm = p2_values(fp.side[1].bary);
    const auto& vn = V.cell_nodes(fp.side[0].cell);
    const auto& pn = P.cell_nodes(fp.side[1].cell);
    const double n[2] = {fp.n_cm.x, fp.n_cm.y};
    for (int i = 0; i < 6; ++i) {
      if (Nc[i] == 0.0) continue;
      for (int j = 0; j < 6; ++j) {
        if (Nm[j] == 0.0) continue;
        for (int a = 0; a < 2; ++a) {
          const double v = w * Nc[i] * n[a] * Nm[j];
          up.emplace_back(V.dof(a, vn[i]), pn[j], v);
          pu.emplace_back(pn[j], V.dof(a, vn[i]), -v);
        }
      }
    }
  });
  return {make_block(Field::Velocity, Field::MatrixPressure, V.size(), P.size(), up),
          make_block(Field::MatrixPressure, Field::Velocity, P.size(), V.size(), pu)};
}

SparseBlock asm_bjsj(const SpaceSet& S, double alpha, const CoeffField& nu,
                     const CoeffField& kappa) {
  if (alpha < 0.0) throw std::invalid_argument("asm_bjsj: alpha_BJSJ must be >= 0");
  const Space& V = S.velocity;
  Triplets t;
  if (alpha > 0.0) {
    for_each_interface_point(S.mesh, [&](const FacetPoint& fp, double w) {
      const double k = kappa(fp.side[1]);
      require(k > 0.0, "asm_bjsj: non-positive permeability on the interface");
      const double c = w * alpha * nu(fp.side[1]) / std::sqrt(2.0 * k);
      const auto N = p2_values(fp.side[0].bary);
      const auto& vn = V.cell_nodes(fp.side[0].cell);
      const double tau[2] = {fp.tau.x, fp.tau.y};
      for (int i = 0; i < 6; ++i) {
        if (N[i] == 0.0) continue;
        for (int j = 0; j < 6; ++j) {
          if (N[j] == 0.0) continue;
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              t.emplace_back(V.dof(a, vn[i]), V.dof(b, vn[j]), c * N[i] * tau[a] * N[j] * tau[b]);
        }
      }
    });
  }
  return make_block(Field::Velocity, Field::Velocity, V.size(), V.size(), t);
}

SparseBlock asm_mean_constraint(const SpaceSet& S) {
  const Space& P = S.matrix_pressure;
  Triplets t;
  for_each_cell(S.mesh, Subdomain::Matrix, [&](int c, const CellFrame&, const std::vector<CellPoint>& pts) {
    const auto& pn = P.cell_nodes(c);
    for (int i = 0; i < 6; ++i) {
      double v = 0.0;
      for (const CellPoint& cp : pts) v += cp.w * cp.N[i];
      t.emplace_back(0, pn[i], v);
    }
  });
  return make_block(Field::MeanMultiplier, Field::MatrixPressure, 1, P.size(), t);
}

SparseBlock asm_phase_mass(const SpaceSet& S, Field row, Field col) {
  const Space& X = S.phase;
  Triplets t;
  t.reserve(S.mesh.cells.size() * 36);
  LocalMatrix<6, 6> A;
  for_each_cell(S.mesh, std::nullopt, [&](int c, const CellFrame&, const std::vector<CellPoint>& pts) {
    A.clear();
    scalar_rows(X, c, A.rows);
    A.cols = A.rows;
    for (const CellPoint& cp : pts)
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) A(i, j) += cp.w * cp.N[i] * cp.N[j];
    A.scatter(t);
  });
  return make_block(row, col, X.size(), X.size(), t);
}

SparseBlock asm_phase_stiffness(const SpaceSet& S, const CoeffField& coeff, Field row, Field col) {
  const Space& X = S.phase;
  Triplets t;
  t.reserve(S.mesh.cells.size() * 36);
  LocalMatrix<6, 6> A;
  for_each_cell(S.mesh, std::nullopt, [&](int c, const CellFrame&, const std::vector<CellPoint>& pts) {
    A.clear();
    scalar_rows(X, c, A.rows);
    A.cols = A.rows;
    for (const CellPoint& cp : pts) {
      const double cw = cp.w * coeff(cp.p);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) A(i, j) += cw * dot(cp.G[i], cp.G[j]);
    }
    A.scatter(t);
  });
  return make_block(row, col, X.size(), X.size(), t);
}

CahnHilliardLagged asm_ch_lagged(const SpaceSet& S, const CahnHilliardInput& in) {
  require(in.kappa && in.nu && in.phi_lag, "asm_ch_lagged: missing input");
  require(in.epsilon > 0.0, "asm_ch_lagged: epsilon must be positive");
  const Space& X = S.phase;
  const Space& V = S.velocity;
  const Space& P = S.matrix_pressure;
  const Vector& phl = *in.phi_lag;
  if (phl.size() != X.size())
    throw std::invalid_argument("asm_ch_lagged: lagged phase vector has the wrong length");

  const bool newton = in.cubic == CubicLinearization::Newton;
  const double cubic_scale = (newton ? 3.0 : 1.0) / in.epsilon;
  const std::size_t nc = S.mesh.count_cells(Subdomain::Conduit);
  const std::size_t nm = S.mesh.count_cells(Subdomain::Matrix);
  Triplets darcy_conv, conv_u, conv_p, cubic, force_u, force_p;
  cubic.reserve((nc + nm) * 36);
  conv_u.reserve(nc * 72);
  force_u.reserve(nc * 72);
  darcy_conv.reserve(nm * 36);
  conv_p.reserve(nm * 36);
  force_p.reserve(nm * 36);
  Vector chem_rhs = Vector::Zero(X.size());

  LocalMatrix<6, 6> C, D, Cp;  // cubic, Darcy convection, pressure convection (phase x pressure)
  LocalMatrix<6, 12> Cu;       // phase x velocity
  for_each_cell(S.mesh, std::nullopt, [&](int c, const CellFrame&, const std::vector<CellPoint>& pts) {
    const auto& xn = X.cell_nodes(c);
    const bool conduit = S.mesh.cells[c].tag == Subdomain::Conduit;
    C.clear();
    scalar_rows(X, c, C.rows);
    C.cols = C.rows;
    if (conduit) {
      Cu.clear();
      Cu.rows = C.rows;
      velocity_rows(V, c, Cu.cols);
    } else {
      D.clear();
      D.rows = D.cols = C.rows;
      Cp.clear();
      Cp.rows = C.rows;
      scalar_rows(P, c, Cp.cols);
    }

    for (const CellPoint& cp : pts) {
      const double ph = field_at(phl, xn, cp.N);
      const Vec2 gph = grad_at(phl, xn, cp.G);
      const double cw = cp.w * cubic_scale * ph * ph;
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) C(i, j) -= cw * cp.N[i] * cp.N[j];
      if (newton) {
        const double r = -2.0 / in.epsilon * ph * ph * ph * cp.w;
        for (int i = 0; i < 6; ++i) chem_rhs[xn[i]] += r * cp.N[i];
      }
      if (conduit) {
        // i: phase test / chemical trial, j: velocity node
        for (int i = 0; i < 6; ++i) {
          const double wi = cp.w * cp.N[i];
          for (int j = 0; j < 6; ++j) {
            Cu(i, j) += wi * cp.N[j] * gph.x;
            Cu(i, 6 + j) += wi * cp.N[j] * gph.y;
          }
        }
      } else {
        const double kn = (*in.kappa)(cp.p) / (*in.nu)(cp.p);
        const double g2 = dot(gph, gph);
        // i: phase test / chemical trial, j: pressure basis
        for (int i = 0; i < 6; ++i) {
          const double wi = cp.w * kn * cp.N[i];
          for (int j = 0; j < 6; ++j) {
            D(i, j) += wi * g2 * cp.N[j];
            Cp(i, j) -= wi * dot(cp.G[j], gph);
          }
        }
      }
    }

    C.scatter(cubic);
    if (conduit) {
      Cu.scatter(conv_u);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 12; ++j)
          if (Cu(i, j) != 0.0) force_u.emplace_back(Cu.cols[j], Cu.rows[i], -Cu(i, j));
    } else {
      D.scatter(darcy_conv);
      Cp.scatter(conv_p);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
          if (Cp(i, j) != 0.0) force_p.emplace_back(Cp.cols[j], Cp.rows[i], Cp(i, j));
    }
  });

  CahnHilliardLagged out;
  out.phase_chem_darcy = make_block(Field::Phase, Field::ChemicalPotential, X.size(), X.size(), darcy_conv);
  out.phase_velocity = make_block(Field::Phase, Field::Velocity, X.size(), V.size(), conv_u);
  out.phase_pressure = make_block(Field::Phase, Field::MatrixPressure, X.size(), P.size(), conv_p);
  out.chem_phase_cubic = make_block(Field::ChemicalPotential, Field::Phase, X.size(), X.size(), cubic);
  out.velocity_chem = make_block(Field::Velocity, Field::ChemicalPotential, V.size(), X.size(), force_u);
  out.pressure_chem = make_block(Field::MatrixPressure, Field::ChemicalPotential, P.size(), X.size(), force_p);
  out.chem_rhs = std::move(chem_rhs);
  return out;
}

CahnHilliardBlocks asm_ch_blocks(const SpaceSet& S, const CahnHilliardInput& in) {
  require(in.mobility != nullptr, "asm_ch_blocks: missing mobility");
  require(in.dt > 0.0, "asm_ch_blocks: dt must be positive");
  CahnHilliardLagged lag = asm_ch_lagged(S, in);
  CahnHilliardBlocks b;
  b.phase_phase = asm_phase_mass(S, Field::Phase, Field::Phase);
  b.phase_phase.matrix *= 1.0 / in.dt;
  b.phase_chem = asm_phase_stiffness(S, *in.mobility, Field::Phase, Field::ChemicalPotential);
  b.chem_chem = asm_phase_mass(S, Field::ChemicalPotential, Field::ChemicalPotential);
  b.chem_phase_gradient = asm_phase_stiffness(S, CoeffField::constant(-in.epsilon),
                                              Field::ChemicalPotential, Field::Phase);
  b.phase_chem_darcy = std::move(lag.phase_chem_darcy);
  b.phase_velocity = std::move(lag.phase_velocity);
  b.phase_pressure = std::move(lag.phase_pressure);
  b.chem_phase_cubic = std::move(lag.chem_phase_cubic);
  b.velocity_chem = std::move(lag.velocity_chem);
  b.pressure_chem = std::move(lag.pressure_chem);
  b.chem_rhs = std::move(lag.chem_rhs);
  return b;
}

}  // namespace chsd
