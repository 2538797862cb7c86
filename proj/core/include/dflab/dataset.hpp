// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "dflab/types.hpp"

namespace dflab {

/// Uniform mixture of point masses at y_1..y_N. Immutable after construction.
class DiracDataset {
 public:
  /// `points` is d x N, one sample per column.
  explicit DiracDataset(Matrix points);

  int dim() const noexcept { return static_cast<int>(points_.rows()); }
  int size() const noexcept { return static_cast<int>(points_.cols()); }
  const Matrix& points() const noexcept { return points_; }
  auto point(int i) const { return points_.col(i); }
  /// ||y_i||^2 for every point.
  const Vector& squared_norms() const noexcept { return sq_norms_; }
  /// D_y = max_i ||y_i||.
  double max_norm() const noexcept { return max_norm_; }

  Vector mean() const;
  /// Average per-coordinate variance (trace of the covariance divided by d).
  double mean_variance() const;

 private:
  Matrix points_;
  Vector sq_norms_;
  double max_norm_ = 0.0;
};

/// Single Gaussian initial law N(mean, cov).
class GaussianInitial {
 public:
  GaussianInitial(Vector mean, Matrix cov);

  static GaussianInitial isotropic(Vector mean, double variance = 1.0);

  int dim() const noexcept { return static_cast<int>(mean_.size()); }
  const Vector& mean() const noexcept { return mean_; }
  const Matrix& cov() const noexcept { return cov_; }

 private:
  Vector mean_;
  Matrix cov_;
};

/// The collinear triple (0.2,-0.4), (0.2,0.0), (0.2,0.9).
DiracDataset affine_triple();
/// The non-collinear triple (0.0,0.5), (0.0,0.0), (0.5,0.0).
DiracDataset nonaffine_triple();

/// CSV with header `x0,x1,...,x{d-1}` and one point per row.
DiracDataset read_dataset_csv(std::istream& in);
DiracDataset read_dataset_csv(const std::string& path);
void write_dataset_csv(std::ostream& out, const DiracDataset& ds);
void write_dataset_csv(const std::string& path, const DiracDataset& ds);

/// JSON object {"mean": [...], "cov": [[...], ...]}.
GaussianInitial read_gaussian_json(const std::string& path);
std::string gaussian_to_json(const GaussianInitial& g);

/// Shortest round-trip representation ("%.17g").
std::string format_double(double v);

}  // namespace dflab
