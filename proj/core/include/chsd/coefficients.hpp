#pragma once

#include <functional>

#include "chsd/fespace.hpp"

namespace chsd {

/// Phase-dependent coefficient blended between its values in the two pure
/// phases: c(phi) = c_plus (1 + p) / 2 + c_minus (1 - p) / 2, p = clamp(phi, -1, 1).
/// Used for both viscosity and mobility.
struct PhaseBlend {
  double plus = 1.0;
  double minus = 1.0;

  double operator()(double phi) const;
  double lower() const;
  double upper() const;
};

/// Scalar coefficient evaluated at quadrature points, with declared bounds.
class CoeffField {
 public:
  using Eval = std::function<double(const QPoint&)>;

  static CoeffField constant(double c);
  /// Pointwise closure of the physical coordinates, e.g. a permeability map.
  static CoeffField function(std::function<double(Vec2)> f, double lower, double upper);
  /// model(phi_h(x)) for a finite-element phase field phi_h.
  static CoeffField from_phase(const Space& space, const Vector& phi, PhaseBlend model);

  double operator()(const QPoint& p) const { return eval_(p); }
  double lower() const { return lower_; }
  double upper() const { return upper_; }

  CoeffField scaled(double s) const;

 private:
  CoeffField(Eval eval, double lower, double upper)
      : eval_(std::move(eval)), lower_(lower), upper_(upper) {}

  Eval eval_;
  double lower_;
  double upper_;
};

}  // namespace chsd
