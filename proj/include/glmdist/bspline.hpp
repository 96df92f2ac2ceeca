#pragma once

#include <vector>

#include "glmdist/errors.hpp"

namespace glmd {

// Open-knot-vector B-spline basis: boundary knots repeated `order` times
// around the interior knots. With drop_first the first basis function is
// omitted (the usual identifiability convention next to an intercept).
struct SplineSpec {
  int order = 4;
  std::vector<double> interior_knots;
  double low = 0.0;
  double high = 1.0;
  bool drop_first = false;

  int basis_count() const {
    return static_cast<int>(interior_knots.size()) + order - (drop_first ? 1 : 0);
  }
  void validate() const;
};

// All basis values at x (clamped to [low, high]), by the Cox-de Boor
// recursion. Values are non-negative and, without drop_first, sum to one on
// the closed boundary interval.
std::vector<double> bspline_basis(double x, const SplineSpec& spec);

// Empirical 0.25/0.50/0.75 quantiles with linear interpolation between
// order statistics. Requires at least four distinct values.
std::vector<double> quantile_knots(const std::vector<double>& values);

}  // namespace glmd
