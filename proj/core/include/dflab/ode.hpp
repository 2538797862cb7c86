// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "dflab/fisher_access.hpp"
#include "dflab/providers.hpp"
#include "dflab/types.hpp"

namespace dflab {

/// PF-ODE path sampled on a grid; times run from the start time down to t_min.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;

  const Vector& endpoint() const { return states.back(); }
};

struct AdjointState {
  Vector lambda;
  double t = 0.0;
  Vector x;
};

enum class TraceMethod { Exact, DfTm, Vjp, Hutchinson };
enum class OperatorKind { Exact, Vjp, DfEa };

std::string_view to_string(TraceMethod m);
std::string_view to_string(OperatorKind k);
/// "exact" | "df-tm" | "vjp" | "hutchinson"
TraceMethod parse_trace_method(std::string_view name);
/// "exact" | "vjp" | "df-ea"
OperatorKind parse_operator_kind(std::string_view name);

/// Called before each Euler step from grid index k (time t); may modify x in place.
using StepHook = std::function<void(int k, double t, Vector& x)>;

/// Explicit Euler for dx/dt = f x + g^2/(2 sigma) eps(x, t) from T down to t_min
/// on the schedule's uniform `steps`-step grid.
Trajectory pf_ode_solve(const ScoreProvider& sp, const Vector& x_T, int steps,
                        const StepHook& hook = {});

/// Same integration started at grid index `start` (grid = schedule.uniform_grid(steps)).
Trajectory pf_ode_solve_from(const ScoreProvider& sp, const Vector& x_start, int steps, int start,
                             const StepHook& hook = {});

struct NllOptions {
  /// Terminal prior N(alpha_T * prior_mean, (alpha_T^2 prior_variance + sigma_T^2) I).
  /// An empty mean means zero.
  Vector prior_mean;
  double prior_variance = 0.0;
  int hutchinson_probes = 1;
  std::uint64_t seed = 0;
  JacobianPath jacobian = JacobianPath::Auto;
};

struct NllResult {
  double nll = 0.0;  // nats
  double bpd = 0.0;  // nll / (d ln 2)
  Vector x_T;
};

/// Integrates d log q / dt = -f d - g^2/2 tr F forward from t_min to T along the
/// PF-ODE and returns -log q_{t_min}(x). `trace_net` is needed for DfTm,
/// `oracle` for Exact.
NllResult nll_solve(const ScoreProvider& sp, const TraceProvider* trace_net,
                    const ExactProvider* oracle, const Vector& x_at_tmin, int steps,
                    TraceMethod method, const NllOptions& options = {});

/// Adjoint of the Euler PF-ODE map: propagates lambda = dL/dx from the trajectory
/// endpoint back up to its start time. The operator is evaluated at the upper
/// grid point of each step, which makes the result the exact derivative of the
/// discrete flow. Output order: index 0 is t_min, last is the trajectory start.
std::vector<AdjointState> adjoint_solve(OperatorKind kind, const ScoreProvider& sp,
                                        const Trajectory& trajectory, const Vector& grad_at_x0,
                                        const ExactProvider* oracle = nullptr);

/// Central-difference gradient of L(x_0(x_T)) = 0.5 ||x_0 - x_ref||^2 through
/// full re-integration of the PF-ODE.
Vector flow_grad_fd(const ScoreProvider& sp, const Vector& x_T, int steps, const Vector& x_ref);

struct GuidanceConfig {
  OperatorKind op = OperatorKind::Exact;
  Vector x_ref;
  /// Grid indices (counted from T downwards, 0 = first step) at which to guide.
  std::vector<int> guidance_steps;
  double strength = 0.2;
  int steps = 50;
};

struct GuidedResult {
  Trajectory trajectory;
  double final_loss = 0.0;
};

/// Adjoint-guided sampling: at each selected step the current state is pushed
/// by -strength * lambda / ||lambda||, where lambda comes from a full inner
/// PF-ODE solve to t_min and an adjoint solve back with the chosen operator.
GuidedResult guided_sample(const ScoreProvider& sp, const Vector& x_T, const GuidanceConfig& cfg,
                           const ExactProvider* oracle = nullptr);

}  // namespace dflab
