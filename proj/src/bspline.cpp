#include "glmdist/bspline.hpp"

#include <algorithm>
#include <cmath>

namespace glmd {

void SplineSpec::validate() const {
  if (order < 1) throw ArgumentError("spline order must be >= 1");
  if (!(low < high)) throw ArgumentError("spline boundary must satisfy low < high");
  for (std::size_t i = 0; i < interior_knots.size(); ++i) {
    double t = interior_knots[i];
    if (!std::isfinite(t) || t <= low || t >= high)
      throw ArgumentError("interior knots must lie strictly inside (low, high)");
    if (i > 0 && !(interior_knots[i - 1] < t))
      throw ArgumentError("interior knots must be strictly increasing");
  }
}

std::vector<double> bspline_basis(double x, const SplineSpec& spec) {
  spec.validate();
  const int order = spec.order;
  const int m = static_cast<int>(spec.interior_knots.size());
  const int nbasis = m + order;  // before any drop

  // Open knot vector: low repeated `order` times, interiors, high repeated
  // `order` times.
  std::vector<double> t;
  t.reserve(2 * order + m);
  for (int i = 0; i < order; ++i) t.push_back(spec.low);
  for (double k : spec.interior_knots) t.push_back(k);
  for (int i = 0; i < order; ++i) t.push_back(spec.high);

  x = std::clamp(x, spec.low, spec.high);

  // Knot span index: last j with t[j] <= x < t[j+1]; the right boundary
  // belongs to the last non-empty span so the basis still sums to one there.
  int span = order - 1;
  while (span < nbasis - 1 && x >= t[span + 1]) ++span;

  // Triangular Cox-de Boor recursion for the `order` non-vanishing values.
  std::vector<double> vals(order, 0.0);
  std::vector<double> left(order, 0.0), right(order, 0.0);
  vals[0] = 1.0;
  for (int j = 1; j < order; ++j) {
    left[j] = x - t[span + 1 - j];
    right[j] = t[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      double denom = right[r + 1] + left[j - r];
      double term = denom == 0.0 ? 0.0 : vals[r] / denom;
      vals[r] = saved + right[r + 1] * term;
      saved = left[j - r] * term;
    }
    vals[j] = saved;
  }

  std::vector<double> full(nbasis, 0.0);
  for (int r = 0; r < order; ++r) {
    int idx = span - order + 1 + r;
    if (idx >= 0 && idx < nbasis) full[idx] = vals[r];
  }
  if (spec.drop_first) full.erase(full.begin());
  return full;
}

std::vector<double> quantile_knots(const std::vector<double>& values) {
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  std::size_t distinct = sorted.empty() ? 0 : 1;
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] != sorted[i - 1]) ++distinct;
  if (distinct < 4) throw DegenerateKnotsError("need at least 4 distinct values for quartile knots");

  auto interp = [&](double q) {
    double pos = q * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
  };
  std::vector<double> knots = {interp(0.25), interp(0.5), interp(0.75)};
  if (!(knots[0] < knots[1] && knots[1] < knots[2]))
    throw DegenerateKnotsError("quartiles are not strictly increasing");
  return knots;
}

}  // namespace glmd
