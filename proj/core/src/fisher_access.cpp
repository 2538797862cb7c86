// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "dflab/fisher_access.hpp"

#include <cmath>
#include <random>

#include "dflab/dirac_oracle.hpp"
#include "dflab/error.hpp"

namespace dflab {

namespace {

bool use_analytic(const ScoreProvider& sp, const Vector& x, double t, JacobianPath path,
                  std::optional<Matrix>& jac) {
  if (path == JacobianPath::FiniteDifference) return false;
  jac = sp.epsilon_jacobian(x, t);
  if (!jac && path == JacobianPath::Analytic) {
    throw DomainError("provider has no analytic Jacobian");
  }
  return jac.has_value();
}

// (eps(x + h u) - eps(x - h u)) / (2h)
Vector directional_derivative(const ScoreProvider& sp, const Vector& x, double t, const Vector& u) {
  const double h = kFiniteDifferenceStep;
  return (sp.epsilon(x + h * u, t) - sp.epsilon(x - h * u, t)) / (2.0 * h);
}

}  // namespace

Matrix epsilon_jacobian(const ScoreProvider& sp, const Vector& x, double t, JacobianPath path) {
  std::optional<Matrix> jac;
  if (use_analytic(sp, x, t, path, jac)) return *jac;
  const int d = sp.dim();
  Matrix fd(d, d);
  for (int j = 0; j < d; ++j) fd.col(j) = directional_derivative(sp, x, t, Vector::Unit(d, j));
  return fd;
}

Vector vjp_apply(const ScoreProvider& sp, const Vector& x, double t, const Vector& v, JacobianPath path) {
  if (!v.allFinite()) throw DomainError("vjp_apply: non-finite cotangent");
  sp.schedule().require_in_range(t);
  return epsilon_jacobian(sp, x, t, path).transpose() * v / sp.schedule().sigma(t);
}

double trace_via_vjp(const ScoreProvider& sp, const Vector& x, double t, JacobianPath path) {
  sp.schedule().require_in_range(t);
  const double s = sp.schedule().sigma(t);
  std::optional<Matrix> jac;
  if (use_analytic(sp, x, t, path, jac)) return jac->trace() / s;
  const int d = sp.dim();
  double acc = 0.0;
  for (int i = 0; i < d; ++i) acc += directional_derivative(sp, x, t, Vector::Unit(d, i))(i);
  return acc / s;
}

double trace_hutchinson(const ScoreProvider& sp, const Vector& x, double t, int n_probes,
                        std::uint64_t seed, JacobianPath path) {
  if (n_probes < 1) throw DomainError("trace_hutchinson needs at least one probe");
  sp.schedule().require_in_range(t);
  const double s = sp.schedule().sigma(t);
  const int d = sp.dim();
  std::optional<Matrix> jac;
  const bool analytic = use_analytic(sp, x, t, path, jac);

  std::mt19937_64 rng(seed);
  Vector z(d);
  double acc = 0.0;
  for (int k = 0; k < n_probes; ++k) {
    for (int i = 0; i < d; ++i) z(i) = (rng() & 1U) ? 1.0 : -1.0;
    acc += analytic ? z.dot(*jac * z) : z.dot(directional_derivative(sp, x, t, z));
  }
  return acc / (n_probes * s);
}

double df_tm_trace(const TraceProvider& tp, const ScoreProvider& sp, const NoiseSchedule& sched,
                   const Vector& x, double t) {
  sched.require_in_range(t);
  const double t_pred = tp.t_prediction(x, t);
  const Vector y_pred = sp.y_prediction(x, t);
  return trace_from_moments(static_cast<int>(x.size()), sched.alpha(t), sched.sigma(t), t_pred, y_pred);
}

Vector df_ea_apply(const Vector& x0, const Vector& yhat, const Vector& lambda,
                   const NoiseSchedule& sched, double t) {
  sched.require_in_range(t);
  if (x0.size() != lambda.size() || yhat.size() != lambda.size()) {
    throw DomainError("df_ea_apply: dimension mismatch");
  }
  const double a = sched.alpha(t);
  const double s2 = sched.sigma(t) * sched.sigma(t);
  const double k = a * a / (s2 * s2);
  // The rank-two difference is formed first so that x0 == yhat cancels exactly.
  const Vector delta = yhat.dot(lambda) * yhat - x0.dot(lambda) * x0;
  return (1.0 / s2) * lambda + k * delta;
}

double bound_trace_error(double delta1, double delta2, const NoiseSchedule& sched, double t) {
  sched.require_in_range(t);
  const double a = sched.alpha(t);
  const double s2 = sched.sigma(t) * sched.sigma(t);
  return a * a / (s2 * s2) * delta1 + delta2 * delta2 / s2;
}

double bound_ea_error(double delta2, double max_norm, int d, const NoiseSchedule& sched, double t) {
  sched.require_in_range(t);
  const double a = sched.alpha(t);
  const double s = sched.sigma(t);
  return a * a / (s * s * s) * (2.0 * max_norm * max_norm + std::sqrt(static_cast<double>(d)) * delta2);
}

}  // namespace dflab
