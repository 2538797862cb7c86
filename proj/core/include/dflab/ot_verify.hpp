// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dflab/ode.hpp"
#include "dflab/providers.hpp"
#include "dflab/types.hpp"

namespace dflab {

struct FundamentalMatrix {
  Matrix A;
  double s = 0.0;
  double asym = 0.0;
  double min_eig_sym = 0.0;
};

/// B(t, x) = [f - g^2/(2 sigma^2)] I + alpha^2 g^2 / (2 sigma^4) Cov[y | x_t = x].
Matrix b_matrix(const ExactProvider& p, const Vector& x, double t);

/// ||A - A^T||_F / (sqrt(2) ||A||_F); throws DomainError for A = 0.
double asymmetry_rate(const Matrix& A);

/// Smallest eigenvalue of (A + A^T)/2 and whether it is >= -eig_tol.
std::pair<bool, double> spd_check(const Matrix& A, double eig_tol);

struct FundamentalResult {
  FundamentalMatrix fm;
  Trajectory trajectory;
};

/// Co-integrates the PF-ODE state and A from T (A = I) down to s on a uniform
/// M-step grid over [s, T]. Update: A += dt A B, or A += dt A^T B when
/// transpose_variant is set (dt < 0).
FundamentalResult fundamental_solve(const ExactProvider& p, const Vector& x_T, int M, double s,
                                    bool transpose_variant = false);

struct OTConfig {
  std::string data_label;
  int M = 1000;
  int n_traj = 16;
  double s = 0.0;  // clamped up to t_min
  bool transpose_variant = false;
  std::uint64_t seed = 0;
  double sym_tol = 1e-6;
  double eig_tol = 1e-8;
};

struct OTTrajectoryResult {
  int traj = 0;
  std::uint64_t seed = 0;
  double asym = 0.0;
  double min_eig_sym = 0.0;
};

struct OTReport {
  std::string schedule;
  std::string data_label;
  int M = 0;
  std::uint64_t seed = 0;
  double s = 0.0;
  bool transpose_variant = false;
  std::vector<OTTrajectoryResult> trajectories;
  double max_asym = 0.0;
  double min_eig = 0.0;
  /// Every sampled chain has asym <= sym_tol and min_eig_sym >= -eig_tol.
  bool ot_consistent = false;
};

/// Runs fundamental_solve over n_traj chains with x_T ~ N(0, sigma_T^2 I).
OTReport ot_experiment(const ExactProvider& p, const OTConfig& cfg);

}  // namespace dflab
