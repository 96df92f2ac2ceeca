#include <doctest.h>

#include <cmath>

#include "glmdist/bspline.hpp"
#include "glmdist/prng.hpp"

using namespace glmd;

namespace {

SplineSpec quartic_spec(bool drop_first) {
  SplineSpec spec;
  spec.order = 4;
  spec.interior_knots = {0.3, 0.5, 0.8};
  spec.low = 0.0;
  spec.high = 1.0;
  spec.drop_first = drop_first;
  return spec;
}

// Direct Cox-de Boor recursion over the full basis, one function at a
// time. Quadratic in the order, but independent of the triangular scheme
// in the library.
double coxdeboor_ref(const std::vector<double>& t, int i, int k, double x, double high) {
  if (k == 1) {
    bool last_span = t[i] < high && t[i + 1] >= high;  // right-closed at the boundary
    if (last_span) return (x >= t[i] && x <= t[i + 1]) ? 1.0 : 0.0;
    return (x >= t[i] && x < t[i + 1]) ? 1.0 : 0.0;
  }
  double left = 0.0, right = 0.0;
  double dl = t[i + k - 1] - t[i];
  double dr = t[i + k] - t[i + 1];
  if (dl > 0) left = (x - t[i]) / dl * coxdeboor_ref(t, i, k - 1, x, high);
  if (dr > 0) right = (t[i + k] - x) / dr * coxdeboor_ref(t, i + 1, k - 1, x, high);
  return left + right;
}

}  // namespace

TEST_CASE("basis values form a partition of unity") {
  SplineSpec spec = quartic_spec(false);
  for (double x : {0.0, 0.05, 0.3, 0.47, 0.5, 0.63, 0.8, 0.99, 1.0}) {
    auto vals = bspline_basis(x, spec);
    REQUIRE(vals.size() == 7);  // 3 interior + order 4
    double sum = 0.0;
    for (double v : vals) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::fabs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("drop_first trims exactly one basis function") {
  auto vals = bspline_basis(0.4, quartic_spec(true));
  CHECK(vals.size() == 6);
  // the 18-feature layout: 15 expanded covariates x 6 + 3 linear + 1
  // intercept = 94 columns
  CHECK(15 * static_cast<int>(vals.size()) + 3 + 1 == 94);
}

TEST_CASE("values match an independent Cox-de Boor reference at probe points") {
  SplineSpec spec = quartic_spec(false);
  std::vector<double> t = {0, 0, 0, 0, 0.3, 0.5, 0.8, 1, 1, 1, 1};
  for (double x : {0.0, 0.12, 0.3, 0.41, 0.5, 0.66, 0.8, 1.0}) {
    auto vals = bspline_basis(x, spec);
    for (int i = 0; i < 7; ++i) {
      double ref = coxdeboor_ref(t, i, 4, x, 1.0);
      CHECK(vals[i] == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("out-of-range arguments clamp to the boundary") {
  SplineSpec spec = quartic_spec(false);
  CHECK(bspline_basis(-3.0, spec) == bspline_basis(0.0, spec));
  CHECK(bspline_basis(42.0, spec) == bspline_basis(1.0, spec));
}

TEST_CASE("invalid specs are rejected") {
  SplineSpec bad = quartic_spec(false);
  bad.interior_knots = {0.5, 0.3};
  CHECK_THROWS_AS(bspline_basis(0.4, bad), ArgumentError);
  bad = quartic_spec(false);
  bad.interior_knots = {1.5};
  CHECK_THROWS_AS(bspline_basis(0.4, bad), ArgumentError);
  bad = quartic_spec(false);
  bad.low = 2.0;
  CHECK_THROWS_AS(bspline_basis(0.4, bad), ArgumentError);
}

TEST_CASE("partition of unity holds across random specs and arguments") {
  SplitMix64 rng(0xB5711);
  for (int rep = 0; rep < 50; ++rep) {
    SplineSpec spec;
    spec.order = 2 + static_cast<int>(rng.next_u64() % 4);
    spec.low = -1.0 + rng.next_uniform();
    spec.high = spec.low + 0.5 + rng.next_uniform();
    int m = 1 + static_cast<int>(rng.next_u64() % 5);
    double span = spec.high - spec.low;
    std::vector<double> ks;
    double t = spec.low;
    for (int i = 0; i < m; ++i) {
      t += span * (0.05 + 0.8 * rng.next_uniform() / m);
      if (t >= spec.high) break;
      ks.push_back(t);
    }
    spec.interior_knots = ks;
    for (int probe = 0; probe < 20; ++probe) {
      double x = spec.low + span * rng.next_uniform();
      auto vals = bspline_basis(x, spec);
      double sum = 0.0;
      for (double v : vals) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(std::fabs(sum - 1.0) <= 1e-12);
    }
  }
}
