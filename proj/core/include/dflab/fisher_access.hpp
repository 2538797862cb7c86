// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "dflab/providers.hpp"
#include "dflab/schedule.hpp"
#include "dflab/types.hpp"

namespace dflab {

/// How eps-Jacobian products are formed.
enum class JacobianPath {
  Auto,              // analytic when the provider offers it, else finite differences
  Analytic,          // provider must expose epsilon_jacobian()
  FiniteDifference,  // central differences with step kFiniteDifferenceStep
};

inline constexpr double kFiniteDifferenceStep = 1e-4;

/// d eps / dx at (x, t).
Matrix epsilon_jacobian(const ScoreProvider& sp, const Vector& x, double t,
                        JacobianPath path = JacobianPath::Auto);

/// Baseline Fisher-vector product (1/sigma) J^T v with J = d eps / dx.
Vector vjp_apply(const ScoreProvider& sp, const Vector& x, double t, const Vector& v,
                 JacobianPath path = JacobianPath::Auto);

/// Baseline trace (1/sigma) sum_i e_i^T J e_i, one directional derivative per axis.
double trace_via_vjp(const ScoreProvider& sp, const Vector& x, double t,
                     JacobianPath path = JacobianPath::Auto);

/// Hutchinson estimate (1/sigma) mean_k z_k^T J z_k with Rademacher probes.
double trace_hutchinson(const ScoreProvider& sp, const Vector& x, double t, int n_probes,
                        std::uint64_t seed, JacobianPath path = JacobianPath::Auto);

/// Trace matching: d/sigma^2 - alpha^2/sigma^4 (d t_pred - ||y_pred||^2), where
/// y_pred comes from the score model. Needs one call of each model.
double df_tm_trace(const TraceProvider& tp, const ScoreProvider& sp, const NoiseSchedule& sched,
                   const Vector& x, double t);

/// Endpoint approximation of F lambda:
/// lambda/sigma^2 - alpha^2/sigma^4 <x0,lambda> x0 + alpha^2/sigma^4 <yhat,lambda> yhat.
Vector df_ea_apply(const Vector& x0, const Vector& yhat, const Vector& lambda,
                   const NoiseSchedule& sched, double t);

/// Claimed worst-case error of df_tm_trace: alpha^2/sigma^4 delta1 + delta2^2/sigma^2.
double bound_trace_error(double delta1, double delta2, const NoiseSchedule& sched, double t);

/// Claimed Hilbert-Schmidt error of the endpoint operator:
/// alpha^2/sigma^3 (2 D_y^2 + sqrt(d) delta2).
double bound_ea_error(double delta2, double max_norm, int d, const NoiseSchedule& sched, double t);

}  // namespace dflab
