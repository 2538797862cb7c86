// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dflab/dataset.hpp"
#include "dflab/schedule.hpp"
#include "dflab/types.hpp"

namespace dflab {

/// Softmax responsibilities of the mixture components at (x, t).
/// log_v[i] = -||x - alpha y_i||^2 / (2 sigma^2), w = softmax(log_v).
struct SoftWeights {
  Vector log_v;
  Vector w;
};

/// Symmetric Fisher matrix F = -Hessian(log q_t) and its trace (sum of diagonal).
struct FisherEval {
  Matrix matrix;
  double trace = 0.0;
};

/// Posterior moments of the initial point given x_t.
struct PosteriorMoments {
  SoftWeights weights;
  Vector mean;                 // sum_i w_i y_i
  double second_moment = 0.0;  // sum_i w_i ||y_i||^2
};

SoftWeights weights(const DiracDataset& ds, const NoiseSchedule& sched, const Vector& x, double t);
PosteriorMoments posterior_moments(const DiracDataset& ds, const NoiseSchedule& sched,
                                   const Vector& x, double t);

/// Normalized log q_t(x) of the diffused mixture.
double log_density(const DiracDataset& ds, const NoiseSchedule& sched, const Vector& x, double t);
Vector score(const DiracDataset& ds, const NoiseSchedule& sched, const Vector& x, double t);
/// Optimal y-prediction sum_i w_i y_i.
Vector y_oracle(const DiracDataset& ds, const NoiseSchedule& sched, const Vector& x, double t);
/// Optimal trace-matching target (1/d) sum_i w_i ||y_i||^2.
double t_oracle(const DiracDataset& ds, const NoiseSchedule& sched, const Vector& x, double t);

/// sum_i w_i y_i y_i^T - ybar ybar^T, i.e. the posterior covariance of y given x_t.
Matrix weighted_covariance(const DiracDataset& ds, const SoftWeights& sw, const Vector& ybar);

FisherEval fisher_matrix(const DiracDataset& ds, const NoiseSchedule& sched, const Vector& x, double t);
double fisher_trace(const DiracDataset& ds, const NoiseSchedule& sched, const Vector& x, double t);

/// d/sigma^2 - alpha^2/sigma^4 (d * t_pred - ||ybar||^2). Shared by the exact
/// trace and the trace-matching estimator so both round identically.
double trace_from_moments(int d, double alpha, double sigma, double t_pred, const Vector& ybar);

// Single Gaussian initial law: q_t = N(alpha mu, alpha^2 Sigma + sigma^2 I).

/// alpha^2 Sigma + sigma^2 I
Matrix gaussian_marginal_cov(const GaussianInitial& g, const NoiseSchedule& sched, double t);
FisherEval gaussian_fisher(const GaussianInitial& g, const NoiseSchedule& sched, double t);
Vector gaussian_score(const GaussianInitial& g, const NoiseSchedule& sched, const Vector& x, double t);
double gaussian_log_density(const GaussianInitial& g, const NoiseSchedule& sched, const Vector& x, double t);
/// E[y | x_t] for y ~ N(mu, Sigma).
Vector gaussian_posterior_mean(const GaussianInitial& g, const NoiseSchedule& sched, const Vector& x, double t);
/// Cov[y | x_t] = (Sigma^{-1} + alpha^2/sigma^2 I)^{-1}; independent of x.
Matrix gaussian_posterior_cov(const GaussianInitial& g, const NoiseSchedule& sched, double t);

}  // namespace dflab
