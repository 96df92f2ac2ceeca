#pragma once

#include <cstddef>
#include <vector>

namespace glmd {

// Fixed left-to-right pairwise reduction over the index range [0, n).
// `accumulate(lo, hi, acc)` must add the contribution of rows [lo, hi) into
// the flat accumulator `acc` (length `width`). The recursion splits at the
// midpoint, so the summation tree depends only on n, never on thread count
// or data values; results are deterministic for a given ordering.
template <typename AccumFn>
std::vector<double> pairwise_reduce(std::size_t n, std::size_t width,
                                    AccumFn&& accumulate,
                                    std::size_t leaf_size = 16) {
  struct Rec {
    const AccumFn& fn;
    std::size_t width;
    std::size_t leaf;
    std::vector<double> run(std::size_t lo, std::size_t hi) const {
      if (hi - lo <= leaf) {
        std::vector<double> acc(width, 0.0);
        fn(lo, hi, acc.data());
        return acc;
      }
      std::size_t mid = lo + (hi - lo) / 2;
      std::vector<double> left = run(lo, mid);
      std::vector<double> right = run(mid, hi);
      for (std::size_t i = 0; i < width; ++i) left[i] += right[i];
      return left;
    }
  };
  Rec rec{accumulate, width, leaf_size};
  if (n == 0) return std::vector<double>(width, 0.0);
  return rec.run(0, n);
}

// Pairwise sum of a plain sequence of doubles (same tree as above).
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  std::size_t mid = n / 2;
  return pairwise_sum(x, mid) + pairwise_sum(x + mid, n - mid);
}

inline double pairwise_sum(const std::vector<double>& x) {
  return pairwise_sum(x.data(), x.size());
}

}  // namespace glmd
