// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "dflab/ot_verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "dflab/error.hpp"
#include "dflab/parallel.hpp"

namespace dflab {

Matrix b_matrix(const ExactProvider& p, const Vector& x, double t) {
  const NoiseSchedule& sc = p.schedule();
  sc.require_in_range(t);
  const double a = sc.alpha(t);
  const double s2 = sc.sigma(t) * sc.sigma(t);
  const double g2 = sc.diffusion_coeff_sq(t);
  Matrix B = (a * a * g2 / (2.0 * s2 * s2)) * p.posterior_cov(x, t);
  B.diagonal().array() += sc.drift_coeff(t) - g2 / (2.0 * s2);
  return B;
}

double asymmetry_rate(const Matrix& A) {
  const double n = A.norm();
  if (!(n > 0.0)) throw DomainError("asymmetry_rate: zero matrix");
  return (A - A.transpose()).norm() / (std::sqrt(2.0) * n);
}

std::pair<bool, double> spd_check(const Matrix& A, double eig_tol) {
  const Matrix sym = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("spd_check: eigensolver failed");
  const double lo = es.eigenvalues().minCoeff();
  return {lo >= -eig_tol, lo};
}

FundamentalResult fundamental_solve(const ExactProvider& p, const Vector& x_T, int M, double s,
                                    bool transpose_variant) {
  const NoiseSchedule& sc = p.schedule();
  const double T = sc.t_max();
  if (M < 1) throw DomainError("fundamental_solve: M must be >= 1");
  if (s < sc.t_min() || s > T) throw DomainError("fundamental_solve: stop time outside [t_min, T]");
  if (x_T.size() != p.dim()) throw DomainError("fundamental_solve: state dimension mismatch");

  const int d = p.dim();
  FundamentalResult res;
  Matrix A = Matrix::Identity(d, d);
  Vector x = x_T;
  res.trajectory.times.push_back(T);
  res.trajectory.states.push_back(x);

  if (s < T) {
    const double h = (T - s) / M;
    for (int i = M; i >= 1; --i) {
      const double t = (i == M) ? T : s + i * h;
      const double t_next = (i == 1) ? s : s + (i - 1) * h;
      const double dt = t_next - t;
      const Matrix B = b_matrix(p, x, t);
      if (transpose_variant) {
        A += dt * (A.transpose() * B);
      } else {
        A += dt * (A * B);
      }
      const Vector eps = p.epsilon(x, t);
      x += dt * (sc.drift_coeff(t) * x + (sc.diffusion_coeff_sq(t) / (2.0 * sc.sigma(t))) * eps);
      const int step = M - i;
      if (!A.allFinite()) throw NumericalError("fundamental_solve: non-finite matrix", step);
      if (!x.allFinite()) throw NumericalError("fundamental_solve: non-finite state", step);
      res.trajectory.times.push_back(t_next);
      res.trajectory.states.push_back(x);
    }
  }

  res.fm.A = A;
  res.fm.s = s;
  res.fm.asym = asymmetry_rate(A);
  res.fm.min_eig_sym = spd_check(A, 0.0).second;
  return res;
}

OTReport ot_experiment(const ExactProvider& p, const OTConfig& cfg) {
  if (cfg.n_traj < 1) throw DomainError("ot_experiment: n_traj must be >= 1");
  const NoiseSchedule& sc = p.schedule();
  const double s = std::max(cfg.s, sc.t_min());
  const double sigma_T = sc.sigma(sc.t_max());

  OTReport rep;
  rep.schedule = std::string(to_string(sc.kind()));
  rep.data_label = cfg.data_label;
  rep.M = cfg.M;
  rep.seed = cfg.seed;
  rep.s = s;
  rep.transpose_variant = cfg.transpose_variant;
  rep.trajectories.resize(cfg.n_traj);

  parallel_for(cfg.n_traj, [&](int j) {
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(j));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma_T);
    Vector x_T(p.dim());
    for (Eigen::Index i = 0; i < x_T.size(); ++i) x_T(i) = normal(rng);
    const FundamentalResult fr = fundamental_solve(p, x_T, cfg.M, s, cfg.transpose_variant);
    rep.trajectories[j] = {j, seed, fr.fm.asym, fr.fm.min_eig_sym};
  });

  rep.max_asym = 0.0;
  rep.min_eig = rep.trajectories.front().min_eig_sym;
  rep.ot_consistent = true;
  for (const auto& r : rep.trajectories) {
    rep.max_asym = std::max(rep.max_asym, r.asym);
    rep.min_eig = std::min(rep.min_eig, r.min_eig_sym);
    if (!(r.asym <= cfg.sym_tol && r.min_eig_sym >= -cfg.eig_tol)) rep.ot_consistent = false;
  }
  return rep;
}

}  // namespace dflab
