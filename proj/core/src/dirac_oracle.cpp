// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "dflab/dirac_oracle.hpp"

#include <cmath>
#include <numbers>

#include "dflab/error.hpp"

namespace dflab {

namespace {

void require_dim(const Vector& x, int d) {
  if (x.size() != d) {
    throw DomainError("state has dimension " + std::to_string(x.size()) + ", expected " +
                      std::to_string(d));
  }
}

void symmetrize(Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) m(j, i) = m(i, j);
  }
}

}  // namespace

SoftWeights weights(const DiracDataset& ds, const NoiseSchedule& sched, const Vector& x, double t) {
  sched.require_in_range(t);
  require_dim(x, ds.dim());
  const double a = sched.alpha(t);
  const double s = sched.sigma(t);
  SoftWeights sw;
  sw.log_v = -((ds.points() * a).colwise() - x).colwise().squaredNorm().transpose() / (2.0 * s * s);
  const double shift = sw.log_v.maxCoeff();
  sw.w = (sw.log_v.array() - shift).exp().matrix();
  sw.w /= sw.w.sum();
  return sw;
}

PosteriorMoments posterior_moments(const DiracDataset& ds, const NoiseSchedule& sched,
                                   const Vector& x, double t) {
  PosteriorMoments pm;
  pm.weights = weights(ds, sched, x, t);
  pm.mean = ds.points() * pm.weights.w;
  pm.second_moment = ds.squared_norms().dot(pm.weights.w);
  return pm;
}

double log_density(const DiracDataset& ds, const NoiseSchedule& sched, const Vector& x, double t) {
  const SoftWeights sw = weights(ds, sched, x, t);
  const double s = sched.sigma(t);
  const double shift = sw.log_v.maxCoeff();
  const double lse = shift + std::log((sw.log_v.array() - shift).exp().sum());
  const double d = ds.dim();
  return lse - std::log(static_cast<double>(ds.size())) -
         0.5 * d * std::log(2.0 * std::numbers::pi * s * s);
}

Vector score(const DiracDataset& ds, const NoiseSchedule& sched, const Vector& x, double t) {
  const Vector ybar = y_oracle(ds, sched, x, t);
  const double s = sched.sigma(t);
  return -(x - sched.alpha(t) * ybar) / (s * s);
}

Vector y_oracle(const DiracDataset& ds, const NoiseSchedule& sched, const Vector& x, double t) {
  return ds.points() * weights(ds, sched, x, t).w;
}

double t_oracle(const DiracDataset& ds, const NoiseSchedule& sched, const Vector& x, double t) {
  return ds.squared_norms().dot(weights(ds, sched, x, t).w) / ds.dim();
}

Matrix weighted_covariance(const DiracDataset& ds, const SoftWeights& sw, const Vector& ybar) {
  // Centered form keeps the result positive semi-definite in floating point.
  const Matrix centered = ds.points().colwise() - ybar;
  Matrix cov = centered * sw.w.asDiagonal() * centered.transpose();
  symmetrize(cov);
  return cov;
}

FisherEval fisher_matrix(const DiracDataset& ds, const NoiseSchedule& sched, const Vector& x, double t) {
  const PosteriorMoments pm = posterior_moments(ds, sched, x, t);
  const double a = sched.alpha(t);
  const double s2 = sched.sigma(t) * sched.sigma(t);
  const int d = ds.dim();
  FisherEval fe;
  fe.matrix = Matrix::Identity(d, d) / s2 - (a * a / (s2 * s2)) * weighted_covariance(ds, pm.weights, pm.mean);
  fe.trace = fe.matrix.trace();
  return fe;
}

double trace_from_moments(int d, double alpha, double sigma, double t_pred, const Vector& ybar) {
  const double s2 = sigma * sigma;
  return d / s2 - (alpha * alpha / (s2 * s2)) * (d * t_pred - ybar.squaredNorm());
}

double fisher_trace(const DiracDataset& ds, const NoiseSchedule& sched, const Vector& x, double t) {
  const PosteriorMoments pm = posterior_moments(ds, sched, x, t);
  const int d = ds.dim();
  return trace_from_moments(d, sched.alpha(t), sched.sigma(t), pm.second_moment / d, pm.mean);
}

Matrix gaussian_marginal_cov(const GaussianInitial& g, const NoiseSchedule& sched, double t) {
  sched.require_in_range(t);
  const double a = sched.alpha(t);
  const double s = sched.sigma(t);
  return a * a * g.cov() + s * s * Matrix::Identity(g.dim(), g.dim());
}

FisherEval gaussian_fisher(const GaussianInitial& g, const NoiseSchedule& sched, double t) {
  const Matrix cov_t = gaussian_marginal_cov(g, sched, t);
  FisherEval fe;
  fe.matrix = cov_t.llt().solve(Matrix::Identity(g.dim(), g.dim()));
  symmetrize(fe.matrix);
  fe.trace = fe.matrix.trace();
  return fe;
}

Vector gaussian_score(const GaussianInitial& g, const NoiseSchedule& sched, const Vector& x, double t) {
  require_dim(x, g.dim());
  const Matrix cov_t = gaussian_marginal_cov(g, sched, t);
  return -cov_t.llt().solve(x - sched.alpha(t) * g.mean());
}

double gaussian_log_density(const GaussianInitial& g, const NoiseSchedule& sched, const Vector& x, double t) {
  require_dim(x, g.dim());
  const Matrix cov_t = gaussian_marginal_cov(g, sched, t);
  const Eigen::LLT<Matrix> llt(cov_t);
  const Vector r = x - sched.alpha(t) * g.mean();
  const double quad = r.dot(llt.solve(r));
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (quad + log_det + g.dim() * std::log(2.0 * std::numbers::pi));
}

Matrix gaussian_posterior_cov(const GaussianInitial& g, const NoiseSchedule& sched, double t) {
  sched.require_in_range(t);
  const double a = sched.alpha(t);
  const double s = sched.sigma(t);
  const int d = g.dim();
  const Matrix eye = Matrix::Identity(d, d);
  const Matrix precision = g.cov().llt().solve(eye) + (a * a / (s * s)) * eye;
  Matrix cov = precision.llt().solve(eye);
  symmetrize(cov);
  return cov;
}

Vector gaussian_posterior_mean(const GaussianInitial& g, const NoiseSchedule& sched, const Vector& x, double t) {
  require_dim(x, g.dim());
  const double a = sched.alpha(t);
  // mu + alpha Sigma (alpha^2 Sigma + sigma^2 I)^{-1} (x - alpha mu)
  const Matrix cov_t = gaussian_marginal_cov(g, sched, t);
  return g.mean() + a * g.cov() * cov_t.llt().solve(x - a * g.mean());
}

}  // namespace dflab
