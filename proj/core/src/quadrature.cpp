#include "chsd/quadrature.hpp"

#include <cmath>

namespace chsd {

namespace {

CellRule make_cell_rule() {
  CellRule r;
  r.degree = 6;
  auto orbit3 = [&r](double b, double w) {
    const double a = 1.0 - 2.0 * b;
    r.points.push_back({a, b, b});
    r.points.push_back({b, a, b});
    r.points.push_back({b, b, a});
    for (int i = 0; i < 3; ++i) r.weights.push_back(0.5 * w);
  };
  auto orbit6 = [&r](double a, double b, double w) {
    const double c = 1.0 - a - b;
    r.points.push_back({a, b, c});
    r.points.push_back({a, c, b});
    r.points.push_back({b, a, c});
    r.points.push_back({b, c, a});
    r.points.push_back({c, a, b});
    r.points.push_back({c, b, a});
    for (int i = 0; i < 6; ++i) r.weights.push_back(0.5 * w);
  };
  orbit3(0.24928674517091042129, 0.11678627572637936603);
  orbit3(0.06308901449150222834, 0.05084490637020681692);
  orbit6(0.05314504984481694735, 0.31035245103378440542, 0.08285107561837357519);
  return r;
}

FacetRule make_facet_rule() {
  FacetRule r;
  r.degree = 5;
  const double d = 0.5 * std::sqrt(3.0 / 5.0);
  r.points = {0.5 - d, 0.5, 0.5 + d};
  r.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  return r;
}

}  // namespace

const CellRule& cell_rule() {
  static const CellRule rule = make_cell_rule();
  return rule;
}

const FacetRule& facet_rule() {
  static const FacetRule rule = make_facet_rule();
  return rule;
}

}  // namespace chsd
