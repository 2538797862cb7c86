// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "dflab/providers.hpp"

#include <limits>
#include <utility>

namespace dflab {

Vector ScoreProvider::y_prediction(const Vector& x, double t) const {
  return (x - sched_.sigma(t) * epsilon(x, t)) / sched_.alpha(t);
}

Vector ExactProvider::epsilon(const Vector& x, double t) const {
  return -sched_.sigma(t) * score(x, t);
}

std::optional<Matrix> ExactProvider::epsilon_jacobian(const Vector& x, double t) const {
  return sched_.sigma(t) * fisher(x, t).matrix;
}

DiracProvider::DiracProvider(DiracDataset ds, NoiseSchedule sched)
    : ExactProvider(std::move(sched)), ds_(std::move(ds)) {}

Vector DiracProvider::y_prediction(const Vector& x, double t) const {
  return y_oracle(ds_, sched_, x, t);
}

double DiracProvider::t_prediction(const Vector& x, double t) const {
  return t_oracle(ds_, sched_, x, t);
}

double DiracProvider::log_density(const Vector& x, double t) const {
  return dflab::log_density(ds_, sched_, x, t);
}

Vector DiracProvider::score(const Vector& x, double t) const {
  return dflab::score(ds_, sched_, x, t);
}

FisherEval DiracProvider::fisher(const Vector& x, double t) const {
  return fisher_matrix(ds_, sched_, x, t);
}

double DiracProvider::fisher_trace(const Vector& x, double t) const {
  return dflab::fisher_trace(ds_, sched_, x, t);
}

Matrix DiracProvider::posterior_cov(const Vector& x, double t) const {
  const PosteriorMoments pm = posterior_moments(ds_, sched_, x, t);
  return weighted_covariance(ds_, pm.weights, pm.mean);
}

GaussianProvider::GaussianProvider(GaussianInitial g, NoiseSchedule sched)
    : ExactProvider(std::move(sched)), g_(std::move(g)) {}

Vector GaussianProvider::y_prediction(const Vector& x, double t) const {
  return gaussian_posterior_mean(g_, sched_, x, t);
}

double GaussianProvider::t_prediction(const Vector& x, double t) const {
  const Vector m = gaussian_posterior_mean(g_, sched_, x, t);
  return (m.squaredNorm() + gaussian_posterior_cov(g_, sched_, t).trace()) / g_.dim();
}

double GaussianProvider::log_density(const Vector& x, double t) const {
  return gaussian_log_density(g_, sched_, x, t);
}

Vector GaussianProvider::score(const Vector& x, double t) const {
  return gaussian_score(g_, sched_, x, t);
}

FisherEval GaussianProvider::fisher(const Vector& /*x*/, double t) const {
  return gaussian_fisher(g_, sched_, t);
}

double GaussianProvider::fisher_trace(const Vector& /*x*/, double t) const {
  return gaussian_fisher(g_, sched_, t).trace;
}

Matrix GaussianProvider::posterior_cov(const Vector& /*x*/, double t) const {
  return gaussian_posterior_cov(g_, sched_, t);
}

double GaussianProvider::support_radius() const {
  return std::numeric_limits<double>::infinity();
}

}  // namespace dflab
