// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "dflab/dataset.hpp"
#include "dflab/dirac_oracle.hpp"
#include "dflab/schedule.hpp"
#include "dflab/types.hpp"

namespace dflab {

/// Noise-prediction model eps(x, t) ~ -sigma_t * grad log q_t(x).
/// Implementations must be callable concurrently from several threads.
class ScoreProvider {
 public:
  explicit ScoreProvider(NoiseSchedule sched) : sched_(std::move(sched)) {}
  virtual ~ScoreProvider() = default;

  virtual int dim() const = 0;
  virtual Vector epsilon(const Vector& x, double t) const = 0;

  /// y-prediction (x - sigma eps) / alpha.
  virtual Vector y_prediction(const Vector& x, double t) const;

  /// Analytic d eps / dx when the provider has one; callers fall back to
  /// finite differences otherwise.
  virtual std::optional<Matrix> epsilon_jacobian(const Vector& /*x*/, double /*t*/) const {
    return std::nullopt;
  }

  const NoiseSchedule& schedule() const noexcept { return sched_; }

 protected:
  NoiseSchedule sched_;
};

/// Scalar trace-matching model t(x, t) ~ (1/d) E[||y||^2 | x_t].
class TraceProvider {
 public:
  virtual ~TraceProvider() = default;
  virtual double t_prediction(const Vector& x, double t) const = 0;
};

/// Closed-form initial law: every quantity is exact.
class ExactProvider : public ScoreProvider, public TraceProvider {
 public:
  using ScoreProvider::ScoreProvider;

  virtual double log_density(const Vector& x, double t) const = 0;
  virtual Vector score(const Vector& x, double t) const = 0;
  virtual FisherEval fisher(const Vector& x, double t) const = 0;
  virtual double fisher_trace(const Vector& x, double t) const = 0;
  /// Cov[y | x_t]
  virtual Matrix posterior_cov(const Vector& x, double t) const = 0;
  /// Bound on ||y|| over the support (D_y); infinite for unbounded laws.
  virtual double support_radius() const = 0;

  Vector epsilon(const Vector& x, double t) const override;
  std::optional<Matrix> epsilon_jacobian(const Vector& x, double t) const override;
};

class DiracProvider final : public ExactProvider {
 public:
  DiracProvider(DiracDataset ds, NoiseSchedule sched);

  const DiracDataset& dataset() const noexcept { return ds_; }

  int dim() const override { return ds_.dim(); }
  Vector y_prediction(const Vector& x, double t) const override;
  double t_prediction(const Vector& x, double t) const override;
  double log_density(const Vector& x, double t) const override;
  Vector score(const Vector& x, double t) const override;
  FisherEval fisher(const Vector& x, double t) const override;
  double fisher_trace(const Vector& x, double t) const override;
  Matrix posterior_cov(const Vector& x, double t) const override;
  double support_radius() const override { return ds_.max_norm(); }

 private:
  DiracDataset ds_;
};

class GaussianProvider final : public ExactProvider {
 public:
  GaussianProvider(GaussianInitial g, NoiseSchedule sched);

  const GaussianInitial& law() const noexcept { return g_; }

  int dim() const override { return g_.dim(); }
  Vector y_prediction(const Vector& x, double t) const override;
  double t_prediction(const Vector& x, double t) const override;
  double log_density(const Vector& x, double t) const override;
  Vector score(const Vector& x, double t) const override;
  FisherEval fisher(const Vector& x, double t) const override;
  double fisher_trace(const Vector& x, double t) const override;
  Matrix posterior_cov(const Vector& x, double t) const override;
  double support_radius() const override;

 private:
  GaussianInitial g_;
};

}  // namespace dflab
