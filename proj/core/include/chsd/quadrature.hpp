#pragma once

#include <array>
#include <vector>

namespace chsd {

/// Triangle rule on the reference triangle in barycentric coordinates.
/// Weights sum to the reference measure 1/2.
struct CellRule {
  int degree = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

/// Rule on the reference segment [0, 1]; weights sum to 1.
struct FacetRule {
  int degree = 0;
  std::vector<double> points;
  std::vector<double> weights;
};

/// 12-point symmetric rule, exact for degree 6 (all weights positive).
const CellRule& cell_rule();

/// 3-point Gauss-Legendre, exact for degree 5.
const FacetRule& facet_rule();

}  // namespace chsd
