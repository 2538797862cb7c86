// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "dflab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dflab/error.hpp"
#include "dflab/parallel.hpp"

namespace dflab {

std::string_view to_string(TraceMethod m) {
  switch (m) {
    case TraceMethod::Exact: return "exact";
    case TraceMethod::DfTm: return "df-tm";
    case TraceMethod::Vjp: return "vjp";
    case TraceMethod::Hutchinson: return "hutchinson";
  }
  return "?";
}

std::string_view to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::Exact: return "exact";
    case OperatorKind::Vjp: return "vjp";
    case OperatorKind::DfEa: return "df-ea";
  }
  return "?";
}

TraceMethod parse_trace_method(std::string_view name) {
  if (name == "exact") return TraceMethod::Exact;
  if (name == "df-tm" || name == "df_tm") return TraceMethod::DfTm;
  if (name == "vjp") return TraceMethod::Vjp;
  if (name == "hutchinson") return TraceMethod::Hutchinson;
  throw ConfigError("unknown trace method '" + std::string(name) + "'");
}

OperatorKind parse_operator_kind(std::string_view name) {
  if (name == "exact") return OperatorKind::Exact;
  if (name == "vjp") return OperatorKind::Vjp;
  if (name == "df-ea" || name == "df_ea") return OperatorKind::DfEa;
  throw ConfigError("unknown operator '" + std::string(name) + "'");
}

namespace {

Vector velocity(const ScoreProvider& sp, const Vector& x, double t) {
  const NoiseSchedule& sc = sp.schedule();
  return sc.drift_coeff(t) * x + (sc.diffusion_coeff_sq(t) / (2.0 * sc.sigma(t))) * sp.epsilon(x, t);
}

const ExactProvider& require_oracle(const ScoreProvider& sp, const ExactProvider* oracle,
                                    const char* who) {
  if (oracle) return *oracle;
  if (const auto* ep = dynamic_cast<const ExactProvider*>(&sp)) return *ep;
  throw DomainError(std::string(who) + ": exact access requested without an exact provider");
}

}  // namespace

Trajectory pf_ode_solve(const ScoreProvider& sp, const Vector& x_T, int steps, const StepHook& hook) {
  return pf_ode_solve_from(sp, x_T, steps, 0, hook);
}

Trajectory pf_ode_solve_from(const ScoreProvider& sp, const Vector& x_start, int steps, int start,
                             const StepHook& hook) {
  if (steps < 1) throw DomainError("pf_ode_solve: steps must be >= 1");
  if (start < 0 || start > steps) throw DomainError("pf_ode_solve: start index outside the grid");
  if (x_start.size() != sp.dim()) throw DomainError("pf_ode_solve: state dimension mismatch");
  if (!x_start.allFinite()) throw NumericalError("pf_ode_solve: non-finite initial state", start);

  const std::vector<double> grid = sp.schedule().uniform_grid(steps);
  Trajectory tr;
  tr.times.reserve(steps - start + 1);
  tr.states.reserve(steps - start + 1);

  Vector x = x_start;
  for (int k = start; k < steps; ++k) {
    const int i = steps - k;
    const double t = grid[i];
    if (hook) {
      hook(k, t, x);
      if (!x.allFinite()) throw NumericalError("pf_ode_solve: hook produced a non-finite state", k);
    }
    tr.times.push_back(t);
    tr.states.push_back(x);
    x += (grid[i - 1] - t) * velocity(sp, x, t);
    if (!x.allFinite()) throw NumericalError("pf_ode_solve: non-finite state", k);
  }
  tr.times.push_back(grid[0]);
  tr.states.push_back(std::move(x));
  return tr;
}

NllResult nll_solve(const ScoreProvider& sp, const TraceProvider* trace_net,
                    const ExactProvider* oracle, const Vector& x_at_tmin, int steps,
                    TraceMethod method, const NllOptions& options) {
  if (steps < 1) throw DomainError("nll_solve: steps must be >= 1");
  if (x_at_tmin.size() != sp.dim()) throw DomainError("nll_solve: state dimension mismatch");
  const NoiseSchedule& sc = sp.schedule();
  const int d = sp.dim();

  const ExactProvider* exact = nullptr;
  if (method == TraceMethod::Exact) exact = &require_oracle(sp, oracle, "nll_solve");
  if (method == TraceMethod::DfTm && !trace_net) {
    throw DomainError("nll_solve: df-tm requires a trace provider");
  }

  auto trace_at = [&](const Vector& x, double t, int k) -> double {
    switch (method) {
      case TraceMethod::Exact: return exact->fisher_trace(x, t);
      case TraceMethod::DfTm: return df_tm_trace(*trace_net, sp, sc, x, t);
      case TraceMethod::Vjp: return trace_via_vjp(sp, x, t, options.jacobian);
      case TraceMethod::Hutchinson:
        return trace_hutchinson(sp, x, t, options.hutchinson_probes,
                                derive_seed(options.seed, static_cast<std::uint64_t>(k)),
                                options.jacobian);
    }
    return 0.0;
  };

  const std::vector<double> grid = sc.uniform_grid(steps);
  Vector x = x_at_tmin;
  double delta_logq = 0.0;  // log q_{t_min}(x) - log q_T(x_T)
  for (int k = 0; k < steps; ++k) {
    const double t = grid[k];
    const double h = grid[k + 1] - t;
    const double tr = trace_at(x, t, k);
    delta_logq += h * (sc.drift_coeff(t) * d + 0.5 * sc.diffusion_coeff_sq(t) * tr);
    x += h * velocity(sp, x, t);
    if (!x.allFinite() || !std::isfinite(delta_logq)) {
      throw NumericalError("nll_solve: non-finite state", k);
    }
  }

  const double T = sc.t_max();
  const double a_T = sc.alpha(T);
  const double var = a_T * a_T * options.prior_variance + sc.sigma(T) * sc.sigma(T);
  Vector resid = x;
  if (options.prior_mean.size() == d) {
    resid -= a_T * options.prior_mean;
  } else if (options.prior_mean.size() != 0) {
    throw DomainError("nll_solve: prior mean dimension mismatch");
  }
  const double log_prior =
      -0.5 * (resid.squaredNorm() / var + d * std::log(2.0 * std::numbers::pi * var));

  NllResult r;
  r.nll = -(log_prior + delta_logq);
  r.bpd = r.nll / (d * std::numbers::ln2);
  r.x_T = std::move(x);
  return r;
}

std::vector<AdjointState> adjoint_solve(OperatorKind kind, const ScoreProvider& sp,
                                        const Trajectory& trajectory, const Vector& grad_at_x0,
                                        const ExactProvider* oracle) {
  const std::size_t n = trajectory.times.size();
  if (n == 0 || n != trajectory.states.size()) {
    throw DomainError("adjoint_solve: trajectory times and states differ in length");
  }
  const NoiseSchedule& sc = sp.schedule();
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (!(trajectory.times[j] > trajectory.times[j + 1])) {
      throw DomainError("adjoint_solve: trajectory times must be strictly decreasing");
    }
  }
  const double t_end = trajectory.times.back();
  if (std::abs(t_end - sc.t_min()) > 1e-12 * std::max(1.0, sc.t_min())) {
    throw DomainError("adjoint_solve: trajectory does not end at t_min of the schedule");
  }
  if (trajectory.times.front() > sc.t_max()) {
    throw DomainError("adjoint_solve: trajectory starts after T");
  }
  if (grad_at_x0.size() != sp.dim() || !grad_at_x0.allFinite()) {
    throw DomainError("adjoint_solve: gradient must be a finite d-vector");
  }

  const ExactProvider* exact = nullptr;
  if (kind == OperatorKind::Exact) exact = &require_oracle(sp, oracle, "adjoint_solve");
  // Endpoint sample for the rank-one replacement: the denoised state at t_min.
  Vector x0;
  if (kind == OperatorKind::DfEa) x0 = sp.y_prediction(trajectory.endpoint(), t_end);

  auto apply = [&](const Vector& x, double t, const Vector& lam) -> Vector {
    switch (kind) {
      case OperatorKind::Exact: return exact->fisher(x, t).matrix * lam;
      case OperatorKind::Vjp: return vjp_apply(sp, x, t, lam);
      case OperatorKind::DfEa: return df_ea_apply(x0, sp.y_prediction(x, t), lam, sc, t);
    }
    return lam;
  };

  std::vector<AdjointState> out;
  out.reserve(n);
  out.push_back({grad_at_x0, t_end, trajectory.states.back()});
  Vector lam = grad_at_x0;
  for (std::size_t j = n - 1; j-- > 0;) {
    const double t = trajectory.times[j];
    const Vector& x = trajectory.states[j];
    const double dt = t - trajectory.times[j + 1];
    lam -= dt * (sc.drift_coeff(t) * lam + 0.5 * sc.diffusion_coeff_sq(t) * apply(x, t, lam));
    if (!lam.allFinite()) {
      throw NumericalError("adjoint_solve: non-finite adjoint state", static_cast<std::ptrdiff_t>(j));
    }
    out.push_back({lam, t, x});
  }
  return out;
}

Vector flow_grad_fd(const ScoreProvider& sp, const Vector& x_T, int steps, const Vector& x_ref) {
  const int d = sp.dim();
  if (x_T.size() != d || x_ref.size() != d) throw DomainError("flow_grad_fd: dimension mismatch");
  auto loss = [&](const Vector& xt) {
    return 0.5 * (pf_ode_solve(sp, xt, steps).endpoint() - x_ref).squaredNorm();
  };
  const double h = 1e-5 * (1.0 + x_T.norm());
  Vector g(d);
  for (int i = 0; i < d; ++i) {
    Vector xp = x_T;
    Vector xm = x_T;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (loss(xp) - loss(xm)) / (2.0 * h);
  }
  return g;
}

GuidedResult guided_sample(const ScoreProvider& sp, const Vector& x_T, const GuidanceConfig& cfg,
                           const ExactProvider* oracle) {
  if (cfg.x_ref.size() != sp.dim()) throw DomainError("guided_sample: x_ref dimension mismatch");
  if (!(cfg.strength >= 0.0)) throw DomainError("guided_sample: strength must be non-negative");
  std::vector<int> selected = cfg.guidance_steps;
  std::sort(selected.begin(), selected.end());
  for (int k : selected) {
    if (k < 0 || k >= cfg.steps) throw DomainError("guided_sample: guidance step outside the grid");
  }

  auto hook = [&](int k, double /*t*/, Vector& x) {
    if (!std::binary_search(selected.begin(), selected.end(), k)) return;
    const Trajectory inner = pf_ode_solve_from(sp, x, cfg.steps, k);
    const Vector grad = inner.endpoint() - cfg.x_ref;
    const Vector lam = adjoint_solve(cfg.op, sp, inner, grad, oracle).back().lambda;
    const double norm = lam.norm();
    if (norm > 0.0) x -= (cfg.strength / norm) * lam;
  };

  GuidedResult res;
  res.trajectory = pf_ode_solve(sp, x_T, cfg.steps, hook);
  res.final_loss = 0.5 * (res.trajectory.endpoint() - cfg.x_ref).squaredNorm();
  return res;
}

}  // namespace dflab
