#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "glmdist/errors.hpp"

namespace glmd {

using BetaVector = std::vector<double>;

// Dense row-major matrix. Rows are observations, columns covariates.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::int64_t rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}
  Matrix(std::int64_t rows, int cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(rows) * cols)
      throw ArgumentError("matrix data size does not match dimensions");
  }

  std::int64_t rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(std::int64_t i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(std::int64_t i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  std::span<const double> row(std::int64_t i) const {
    return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)};
  }
  std::span<double> row(std::int64_t i) {
    return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)};
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::int64_t rows_;
  int cols_;
  std::vector<double> data_;
};

enum class FamilyKind : int { probit = 0, logistic = 1, poisson = 2 };

const char* family_name(FamilyKind kind);
FamilyKind family_from_name(const std::string& name);

// Design matrix plus response vector. Validation is explicit so bulk
// construction (simulation) can skip the O(n p) finiteness scan it already
// guarantees.
struct Dataset {
  Matrix design;
  std::vector<double> response;

  std::int64_t n() const { return design.rows(); }
  int p() const { return design.cols(); }

  void validate(FamilyKind kind) const;
};

struct Shard {
  int worker_id = 0;
  Dataset data;
};

// Concatenate shards in worker_id order (ids must be 0..K-1).
Dataset concat_shards(const std::vector<Shard>& shards);

inline void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw DomainError(std::string(what) + " contains a non-finite value");
}

}  // namespace glmd
