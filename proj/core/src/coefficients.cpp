#include "chsd/coefficients.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace chsd {

double PhaseBlend::operator()(double phi) const {
  const double p = std::clamp(phi, -1.0, 1.0);
  return 0.5 * plus * (1.0 + p) + 0.5 * minus * (1.0 - p);
}

double PhaseBlend::lower() const { return std::min(plus, minus); }
double PhaseBlend::upper() const { return std::max(plus, minus); }

CoeffField CoeffField::constant(double c) {
  return CoeffField([c](const QPoint&) { return c; }, c, c);
}

CoeffField CoeffField::function(std::function<double(Vec2)> f, double lower, double upper) {
  if (lower > upper) throw std::invalid_argument("CoeffField::function: lower > upper");
  return CoeffField([f = std::move(f)](const QPoint& p) { return f(p.x); }, lower, upper);
}

CoeffField CoeffField::from_phase(const Space& space, const Vector& phi, PhaseBlend model) {
  if (space.components() != 1 || phi.size() != space.size())
    throw std::invalid_argument("CoeffField::from_phase: phase vector does not match its space");
  auto field = std::make_shared<const Vector>(phi);
  return CoeffField(
      [&space, field, model](const QPoint& p) { return model(value(space, *field, p)); },
      model.lower(), model.upper());
}

CoeffField CoeffField::scaled(double s) const {
  const double a = s * lower_, b = s * upper_;
  return CoeffField([e = eval_, s](const QPoint& p) { return s * e(p); }, std::min(a, b),
                    std::max(a, b));
}

}  // namespace chsd
