// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Each criterion prints detail lines followed by a
// single "PASS criterion N" or "FAIL criterion N" line.
//
//   acceptance [--criterion N] [--cli PATH]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "dflab/dataset.hpp"
#include "dflab/dirac_oracle.hpp"
#include "dflab/fisher_access.hpp"
#include "dflab/mlp.hpp"
#include "dflab/ode.hpp"
#include "dflab/ot_verify.hpp"
#include "dflab/parallel.hpp"
#include "dflab/providers.hpp"
#include "dflab/schedule.hpp"
#include "dflab/training.hpp"
#include "oracles.hpp"

namespace {

using namespace dflab;
namespace tst = dflab::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string g_cli_path;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void detail(const std::string& s) { std::cout << "  " << s << "\n"; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const std::vector<ScheduleKind> kAllSchedules = {ScheduleKind::VE, ScheduleKind::VP, ScheduleKind::SubVP,
                                                 ScheduleKind::EDM};

std::string name_of(ScheduleKind k) { return std::string(to_string(k)); }

Vector gaussian_vector(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = n(rng);
  return v;
}

Vector unit_vector(std::mt19937_64& rng, int d) {
  Vector v = gaussian_vector(rng, d);
  return v / v.norm();
}

DiracDataset single_point() {
  Matrix p(2, 1);
  p << 0.3, -0.7;
  return DiracDataset(p);
}

DiracDataset symmetric_pair() {
  Matrix p(2, 2);
  p << 0.6, -0.6, -0.3, 0.3;
  return DiracDataset(p);
}

GaussianInitial test_gaussian() {
  Vector mu(2);
  mu << 0.5, -0.2;
  Matrix C(2, 2);
  C << 1.0, 0.3, 0.3, 0.5;
  return GaussianInitial(mu, C);
}

// ---------------------------------------------------------------------------
// 1. Score and Fisher against finite differences of the density.

bool criterion1() {
  const auto t0 = Clock::now();
  const std::vector<DiracDataset> sets = {single_point(), symmetric_pair(), nonaffine_triple()};
  const NoiseSchedule vp = NoiseSchedule::vp();
  const NoiseSchedule ve = NoiseSchedule::ve();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  double worst_score = 0.0, worst_fisher = 0.0, worst_density = 0.0;
  for (int n = 0; n < 200; ++n) {
    const bool use_vp = (n % 2 == 0);
    const NoiseSchedule& sc = use_vp ? vp : ve;
    const double t = use_vp ? 0.05 + 0.95 * u01(rng) : 0.3 + 0.7 * u01(rng);
    const DiracDataset& ds = sets[n % 3];
    const int k = static_cast<int>(u01(rng) * ds.size()) % ds.size();
    const double a = sc.alpha(t), s = sc.sigma(t);
    const Vector x = a * Vector(ds.point(k)) + s * gaussian_vector(rng, ds.dim());

    const tst::ScalarField logq = [&](const Vector& z) {
      return static_cast<long double>(log_density(ds, sc, z, t));
    };
    const Vector g_fd = tst::fd_gradient(logq, x, 1e-4 * (1.0 + x.norm()));
    worst_score = std::max(worst_score, tst::rel_err(score(ds, sc, x, t), g_fd));

    const Matrix H = tst::fd_hessian(logq, x, 1e-3 * s);
    worst_fisher = std::max(worst_fisher, (fisher_matrix(ds, sc, x, t).matrix + H).cwiseAbs().maxCoeff());

    const long double ref = tst::mixture_log_density(ds.points(), a, s, x);
    worst_density = std::max(worst_density, static_cast<double>(std::abs(log_density(ds, sc, x, t) - ref)));
  }
  const double secs = seconds_since(t0);
  detail("max score rel err " + fmt("%.3e", worst_score) + " (tol 1e-4)");
  detail("max |F + FD Hessian| entry " + fmt("%.3e", worst_fisher) + " (tol 1e-3)");
  detail("max |log q - extended-precision reference| " + fmt("%.3e", worst_density));
  detail("runtime " + fmt("%.2f", secs) + " s (limit 10 s)");
  return worst_score <= 1e-4 && worst_fisher <= 1e-3 && worst_density <= 1e-9 && secs < 10.0;
}

// ---------------------------------------------------------------------------
// 2. Trace identities.

bool criterion2() {
  const auto t0 = Clock::now();
  const std::vector<DiracDataset> sets = {nonaffine_triple(), symmetric_pair(), gen_chessboard(200, 4)};
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst_abs = 0.0, worst_diag = 0.0, worst_tm = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const NoiseSchedule sc(kAllSchedules[n % 4]);
    const DiracDataset& ds = sets[(n / 4) % 3];
    const DiracProvider p(ds, sc);
    const double t = sc.t_min() + (sc.t_max() - sc.t_min()) * u01(rng);
    const int k = static_cast<int>(u01(rng) * ds.size()) % ds.size();
    const Vector x = sc.alpha(t) * Vector(ds.point(k)) + sc.sigma(t) * gaussian_vector(rng, ds.dim());

    // Both traces are differences of terms of size d/sigma^2 and alpha^2 D_y^2/sigma^4; agreement
    // is measured against that scale since absolute 1e-10 is below double resolution
    // once sigma is near 1e-2.
    const double a = sc.alpha(t), s2 = sc.sigma(t) * sc.sigma(t);
    const double scale = std::max(1.0, ds.dim() / s2 + a * a * ds.max_norm() * ds.max_norm() / (s2 * s2));
    const double tr = fisher_trace(ds, sc, x, t);
    const FisherEval fe = fisher_matrix(ds, sc, x, t);
    worst_abs = std::max(worst_abs, std::abs(tr - fe.matrix.trace()));
    worst_diag = std::max(worst_diag, std::abs(tr - fe.matrix.trace()) / scale);
    worst_tm = std::max(worst_tm, std::abs(df_tm_trace(p, p, sc, x, t) - tr) / scale);
  }
  const double secs = seconds_since(t0);
  detail("max |fisher_trace - tr(F)| " + fmt("%.3e", worst_abs) + " absolute, " + fmt("%.3e", worst_diag) +
         " relative to term scale");
  detail("max |df_tm_trace(oracles) - fisher_trace| relative to term scale " + fmt("%.3e", worst_tm));
  detail("runtime " + fmt("%.2f", secs) + " s (limit 5 s)");
  return worst_diag <= 1e-10 && worst_tm <= 1e-10 && secs < 5.0;
}

// ---------------------------------------------------------------------------
// Shared (x, t) grid for the two bound sweeps: 10 times, 20 states per time.

struct GridPoint {
  double t;
  Vector x;
  Vector u;  // unit direction of the injected eps error
};

std::vector<GridPoint> bound_grid(const DiracDataset& ds, const NoiseSchedule& sc, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GridPoint> grid;
  for (int i = 0; i < 10; ++i) {
    const double t = 0.1 + 0.1 * i;
    for (int j = 0; j < 20; ++j) {
      const Vector y = ds.point(j % ds.size());
      const Vector x = sc.alpha(t) * y + sc.sigma(t) * gaussian_vector(rng, ds.dim());
      grid.push_back({t, x, unit_vector(rng, ds.dim())});
    }
  }
  return grid;
}

class ShiftedEps final : public ScoreProvider {
 public:
  ShiftedEps(const ScoreProvider& base, Vector shift)
      : ScoreProvider(base.schedule()), base_(base), shift_(std::move(shift)) {}
  int dim() const override { return base_.dim(); }
  Vector epsilon(const Vector& x, double t) const override { return base_.epsilon(x, t) + shift_; }

 private:
  const ScoreProvider& base_;
  Vector shift_;
};

class ShiftedTrace final : public TraceProvider {
 public:
  ShiftedTrace(const TraceProvider& base, double shift) : base_(base), shift_(shift) {}
  double t_prediction(const Vector& x, double t) const override { return base_.t_prediction(x, t) + shift_; }

 private:
  const TraceProvider& base_;
  double shift_;
};

const std::vector<double> kDeltas = {0.01, 0.1, 1.0};

// ---------------------------------------------------------------------------
// 3. Trace bound under injected errors.

bool criterion3() {
  const DiracDataset ds = nonaffine_triple();
  const int d = ds.dim();
  // Two readings of "error delta1 on t": a shift of the per-dimension head by
  // delta1, and a shift of the un-normalized second moment d * t by delta1.
  struct Tally {
    int violations = 0;
    int total = 0;
    double worst_ratio = 0.0;
  };
  Tally per_dim, second_moment;

  for (ScheduleKind kind : kAllSchedules) {
    const NoiseSchedule sc(kind);
    const DiracProvider p(ds, sc);
    Tally a, b;
    for (const GridPoint& g : bound_grid(ds, sc, 303 + static_cast<int>(kind))) {
      const double exact = p.fisher_trace(g.x, g.t);
      for (double d1 : kDeltas) {
        for (double d2 : kDeltas) {
          const ShiftedEps eps(p, d2 * g.u);
          const double bound = bound_trace_error(d1, d2, sc, g.t);
          for (int variant = 0; variant < 2; ++variant) {
            const ShiftedTrace tp(p, variant == 0 ? d1 : d1 / d);
            const double err = std::abs(df_tm_trace(tp, eps, sc, g.x, g.t) - exact);
            Tally& tl = variant == 0 ? a : b;
            ++tl.total;
            if (!(err <= bound)) ++tl.violations;
            tl.worst_ratio = std::max(tl.worst_ratio, err / bound);
          }
        }
      }
    }
    detail(name_of(kind) + ": t+delta1 violations " + std::to_string(a.violations) + "/" +
           std::to_string(a.total) + ", worst err/bound " + fmt("%.3g", a.worst_ratio) +
           "; d*t+delta1 violations " + std::to_string(b.violations) + "/" + std::to_string(b.total) +
           ", worst err/bound " + fmt("%.3g", b.worst_ratio));
    for (Tally* dst : {&per_dim, &second_moment}) {
      const Tally& src = dst == &per_dim ? a : b;
      dst->violations += src.violations;
      dst->total += src.total;
      dst->worst_ratio = std::max(dst->worst_ratio, src.worst_ratio);
    }
  }
  return per_dim.violations == 0 && second_moment.violations == 0;
}

// ---------------------------------------------------------------------------
// 4. Hilbert-Schmidt bound on the endpoint operator.

bool criterion4() {
  const DiracDataset ds = nonaffine_triple();
  const int d = ds.dim();
  int violations = 0, total = 0;
  double worst_ratio = 0.0;
  for (ScheduleKind kind : kAllSchedules) {
    const NoiseSchedule sc(kind);
    const DiracProvider p(ds, sc);
    int v_sched = 0;
    double w_sched = 0.0;
    for (const GridPoint& g : bound_grid(ds, sc, 404 + static_cast<int>(kind))) {
      const Matrix F = p.fisher(g.x, g.t).matrix;
      const double s = sc.sigma(g.t);
      for (double d2 : kDeltas) {
        const ShiftedEps eps(p, d2 * g.u);
        const Vector yhat = eps.y_prediction(g.x, g.t);
        const double bound = bound_ea_error(d2, ds.max_norm(), d, sc, g.t);
        for (int k = 0; k < ds.size(); ++k) {
          const Vector x0 = ds.point(k);
          Matrix Fea(d, d);
          for (int j = 0; j < d; ++j) Fea.col(j) = df_ea_apply(x0, yhat, Vector::Unit(d, j), sc, g.t);
          const double hs = (s * (F - Fea)).norm();
          ++total;
          if (!(hs <= bound)) {
            ++violations;
            ++v_sched;
          }
          w_sched = std::max(w_sched, hs / bound);
        }
      }
    }
    worst_ratio = std::max(worst_ratio, w_sched);
    detail(name_of(kind) + ": violations " + std::to_string(v_sched) + ", worst HS/bound " + fmt("%.3g", w_sched));
  }
  detail("total violations " + std::to_string(violations) + "/" + std::to_string(total) +
         ", worst HS/bound " + fmt("%.3g", worst_ratio));
  return violations == 0;
}

// ---------------------------------------------------------------------------
// 5. Likelihood ODE on a single Gaussian.

bool criterion5() {
  const auto t0 = Clock::now();
  const GaussianInitial g = test_gaussian();
  const Eigen::Vector2d mu = g.mean();
  const Eigen::Matrix2d C = g.cov();
  bool ok = true;
  for (ScheduleKind kind : kAllSchedules) {
    const NoiseSchedule sc(kind);
    const GaussianProvider p(g, sc);
    const double tm = sc.t_min();
    const double a = sc.alpha(tm), s = sc.sigma(tm);
    const Matrix L = (a * a * C + s * s * Eigen::Matrix2d::Identity()).llt().matrixL();
    NllOptions opt;
    opt.prior_mean = mu;
    opt.prior_variance = C.trace() / 2.0;
    std::mt19937_64 rng(505 + static_cast<int>(kind));
    double worst = 0.0;
    for (int n = 0; n < 8; ++n) {
      const Vector x = a * mu + L * gaussian_vector(rng, 2);
      const double nll = nll_solve(p, nullptr, nullptr, x, 1000, TraceMethod::Exact, opt).nll;
      const double ref = -static_cast<double>(tst::gaussian2_log_density(mu, C, a, s, x));
      worst = std::max(worst, std::abs(nll - ref) / 2.0);
    }
    detail(name_of(kind) + ": max |nll - closed form| per dim " + fmt("%.3e", worst) + " (tol 1e-3)");
    ok = ok && worst <= 1e-3;
  }
  const double secs = seconds_since(t0);
  detail("runtime " + fmt("%.2f", secs) + " s (limit 30 s)");
  return ok && secs < 30.0;
}

// ---------------------------------------------------------------------------
// 6. Adjoint against finite differences of the flow.

bool criterion6() {
  const auto t0 = Clock::now();
  const DiracDataset ds = nonaffine_triple();
  Vector x_ref(2);
  x_ref << 0.25, 0.25;
  const int steps = 200;
  bool ok = true;
  for (ScheduleKind kind : kAllSchedules) {
    const NoiseSchedule sc(kind);
    const DiracProvider p(ds, sc);
    std::mt19937_64 rng(606 + static_cast<int>(kind));
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
      const Vector x_T = sc.sigma(sc.t_max()) * gaussian_vector(rng, 2);
      const Trajectory tr = pf_ode_solve(p, x_T, steps);
      const Vector lam = adjoint_solve(OperatorKind::Exact, p, tr, tr.endpoint() - x_ref).back().lambda;
      worst = std::max(worst, tst::rel_err(lam, flow_grad_fd(p, x_T, steps, x_ref)));
    }
    detail(name_of(kind) + ": max rel err " + fmt("%.3e", worst) + " (tol 1e-2)");
    ok = ok && worst <= 1e-2;
  }
  const double secs = seconds_since(t0);
  detail("runtime " + fmt("%.2f", secs) + " s (limit 60 s)");
  return ok && secs < 60.0;
}

// ---------------------------------------------------------------------------
// 7. Fundamental-matrix OT diagnostics.

bool criterion7() {
  const auto t0 = Clock::now();
  bool ok = true;
  for (ScheduleKind kind : kAllSchedules) {
    const NoiseSchedule sc(kind);
    // M = 1000 puts the first EDM steps at |dt| ~ t, where explicit Euler on the
    // 1/t stiff part of B flips the sign of A; 4000 resolves it for every schedule.
    OTConfig cfg;
    cfg.M = 4000;
    cfg.n_traj = 16;
    cfg.seed = 7;

    const GaussianProvider gp(test_gaussian(), sc);
    const DiracProvider ap(affine_triple(), sc);
    const DiracProvider np(nonaffine_triple(), sc);
    const OTReport rg = ot_experiment(gp, cfg);
    const OTReport ra = ot_experiment(ap, cfg);
    const OTReport rn = ot_experiment(np, cfg);
    auto consistent = [](const OTReport& r) { return r.max_asym <= 1e-6 && r.min_eig >= -1e-8; };
    detail(name_of(kind) + ": gaussian asym " + fmt("%.2e", rg.max_asym) + " min eig " + fmt("%.3g", rg.min_eig) +
           "; affine3 asym " + fmt("%.2e", ra.max_asym) + " min eig " + fmt("%.3g", ra.min_eig) +
           "; nonaffine3 max asym " + fmt("%.4f", rn.max_asym));
    ok = ok && consistent(rg) && consistent(ra) && rn.max_asym >= 0.05;
  }
  const double secs = seconds_since(t0);
  detail("runtime " + fmt("%.2f", secs) + " s (limit 300 s)");
  return ok && secs < 300.0;
}

// ---------------------------------------------------------------------------
// 8. Trace table with trained networks.

bool criterion8() {
  const auto t0 = Clock::now();
  const DiracDataset ds = gen_chessboard(5000, 0);
  const NoiseSchedule sc = NoiseSchedule::ve();
  TrainConfig cfg;
  const TrainResult eps = train_eps(ds, sc, cfg);
  const TrainResult tm = train_tm(ds, sc, cfg);
  detail("eps held-out loss " + fmt("%.4f", eps.heldout_loss) + " (constant " + fmt("%.4f", eps.baseline_loss) +
         "), tm held-out loss " + fmt("%.4g", tm.heldout_loss) + " (constant " + fmt("%.4g", tm.baseline_loss) + ")");

  const EpsNetProvider eps_net(eps.net);
  const TraceNetProvider tm_net(tm.net);
  const DiracProvider oracle(ds, sc);
  const std::vector<double> grid = {0.2, 0.4, 0.6, 0.8, 1.0};
  const auto rows = eval_trace_table(eps_net, tm_net, oracle, ds, grid, 1000, 8);

  bool dftm_ok = true;
  for (const auto& r : rows) {
    detail("t=" + fmt("%.1f", r.t) + ": exact mean " + fmt("%.4g", r.exact_mean) + ", VJP rel err " +
           fmt("%.2f%%", 100 * r.vjp_rel_err) + ", DF-TM rel err " + fmt("%.2f%%", 100 * r.dftm_rel_err));
    dftm_ok = dftm_ok && r.dftm_rel_err <= 0.10;
  }
  const bool vjp_trend = rows.front().vjp_rel_err > rows.back().vjp_rel_err;
  const bool dftm_wins = rows.front().dftm_rel_err < rows.front().vjp_rel_err;
  const double secs = seconds_since(t0);
  detail(std::string("DF-TM <= 10% everywhere: ") + (dftm_ok ? "yes" : "no") + "; VJP(0.2) > VJP(1.0): " +
         (vjp_trend ? "yes" : "no") + "; DF-TM < VJP at 0.2: " + (dftm_wins ? "yes" : "no"));
  detail("runtime " + fmt("%.1f", secs) + " s (limit 1800 s)");
  return dftm_ok && vjp_trend && dftm_wins && secs < 1800.0;
}

// ---------------------------------------------------------------------------
// 9. Hutchinson with 351 probes.

bool criterion9() {
  const auto t0 = Clock::now();
  const DiracDataset ds = nonaffine_triple();
  const NoiseSchedule sc = NoiseSchedule::vp();
  const DiracProvider p(ds, sc);
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int within = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double t = 0.05 + 0.95 * u01(rng);
    const Vector x = sc.alpha(t) * Vector(ds.point(trial % 3)) + sc.sigma(t) * gaussian_vector(rng, 2);
    const double est = trace_hutchinson(p, x, t, 351, derive_seed(909, trial));
    const double e = tst::rel_err(est, p.fisher_trace(x, t));
    worst = std::max(worst, e);
    if (e <= 0.10) ++within;
  }
  const double secs = seconds_since(t0);
  detail("trials within 10%: " + std::to_string(within) + "/100, worst rel err " + fmt("%.3g", worst));
  detail("runtime " + fmt("%.2f", secs) + " s (limit 60 s)");
  return within >= 90 && secs < 60.0;
}

// ---------------------------------------------------------------------------
// 10. Manual backprop against finite differences.

bool criterion10() {
  MLP net({2, 4, 1}, 10);
  std::mt19937_64 rng(1010);
  for (int l = 0; l < net.n_layers(); ++l) net.bias(l) = 0.3 * gaussian_vector(rng, net.bias(l).size());
  Matrix X(2, 16);
  Matrix Y(1, 16);
  for (int j = 0; j < 16; ++j) {
    X.col(j) = gaussian_vector(rng, 2);
    Y(0, j) = std::sin(X(0, j)) * X(1, j);
  }
  auto loss = [&](const MLP& m) { return 0.5 * (m.forward(X) - Y).squaredNorm(); };

  MLP::Cache cache;
  const Matrix out = net.forward(X, cache);
  const MLP::Gradients g = net.backward(cache, out - Y);
  std::vector<double> analytic;
  for (int l = 0; l < net.n_layers(); ++l) {
    analytic.insert(analytic.end(), g.dW[l].data(), g.dW[l].data() + g.dW[l].size());
    analytic.insert(analytic.end(), g.db[l].data(), g.db[l].data() + g.db[l].size());
  }

  const std::vector<double> p0 = net.flat_params();
  double worst = 0.0;
  for (std::size_t i = 0; i < p0.size(); ++i) {
    const double h = 1e-5 * (1.0 + std::abs(p0[i]));
    std::vector<double> p = p0;
    p[i] = p0[i] + h;
    net.set_flat_params(p);
    const double up = loss(net);
    p[i] = p0[i] - h;
    net.set_flat_params(p);
    const double dn = loss(net);
    const double fd = (up - dn) / (2 * h);
    const double scale = std::max({std::abs(fd), std::abs(analytic[i]), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - fd) / scale);
  }
  net.set_flat_params(p0);
  detail(std::to_string(p0.size()) + " parameters, max rel err " + fmt("%.3e", worst) + " (tol 1e-4)");
  return worst <= 1e-4 && p0.size() == 17;
}

// ---------------------------------------------------------------------------
// 11. CLI determinism.

int shell(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string csv_body(const fs::path& p) {
  std::ifstream in(p);
  if (!in) return "<missing>";
  std::string line, acc;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) != 0) acc += line + "\n";
  }
  return acc;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return "<missing>";
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool criterion11() {
  if (g_cli_path.empty() || !fs::exists(g_cli_path)) {
    detail("df_lab binary not found; pass --cli PATH");
    return false;
  }
  const fs::path dir = fs::temp_directory_path() / "df_lab_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = "'" + g_cli_path + "'";
  auto q = [&](const std::string& name) { return "'" + (dir / name).string() + "'"; };

  // Small networks feed the commands that accept checkpoints.
  std::ofstream(dir / "train.json") << R"({"n": 400, "n_steps": 200, "batch_size": 64, "hidden": [16, 16],
                                          "log_every": 50})";
  bool ok = true;
  for (const char* net : {"eps", "tm"}) {
    if (shell(cli + " train --config " + q("train.json") + " --data chessboard --net " + net + " --seed 3 --out " +
              q(std::string(net) + ".ckpt")) != 0) {
      detail(std::string("setup training of ") + net + " failed");
      ok = false;
    }
  }
  std::ofstream(dir / "trace.json") << R"({"n": 400, "n_eval": 32, "eps_ckpt": ")" + (dir / "eps.ckpt").string() +
                                           R"(", "tm_ckpt": ")" + (dir / "tm.ckpt").string() + "\"}";
  std::ofstream(dir / "nll.json") << R"({"n": 400, "n_samples": 3, "eps_ckpt": ")" + (dir / "eps.ckpt").string() +
                                         R"(", "tm_ckpt": ")" + (dir / "tm.ckpt").string() + "\"}";
  std::ofstream(dir / "adj.json") << R"({"n_traj": 2})";

  struct Case {
    std::string label;
    std::string args;  // everything except --out
    std::vector<std::string> outputs;  // suffixes appended to the --out path
    bool binary = false;
  };
  const std::vector<Case> cases = {
      {"gen-data", "gen-data --data chessboard --n 300 --seed 5", {""}},
      {"fisher-check", "fisher-check --data nonaffine3 --schedule vp --seed 5", {""}},
      {"trace-bench", "trace-bench --config " + q("trace.json") + " --data chessboard --seed 5", {""}},
      {"nll-exact", "nll --data nonaffine3 --trace-method exact --steps 200 --seed 5", {""}},
      {"nll-hutchinson", "nll --data nonaffine3 --trace-method hutchinson --steps 200 --seed 5", {""}},
      {"nll-df-tm", "nll --config " + q("nll.json") + " --data chessboard --trace-method df-tm --steps 100 --seed 5",
       {""}},
      {"adjoint-sim", "adjoint-sim --config " + q("adj.json") + " --data nonaffine3 --steps 20 --seed 5", {""}},
      {"ot-test", "ot-test --data nonaffine3 --schedule subvp --m 200 --n-traj 4 --seed 5", {""}},
      {"train", "train --config " + q("train.json") + " --data chessboard --net eps --seed 5", {".loss.csv", ""}, true},
  };

  for (const Case& c : cases) {
    std::vector<std::string> first;
    bool same = true;
    int rc[2] = {0, 0};
    for (int run = 0; run < 2; ++run) {
      const std::string out = (dir / (c.label + "_" + std::to_string(run) + ".csv")).string();
      rc[run] = shell(cli + " " + c.args + " --out '" + out + "'");
      for (std::size_t k = 0; k < c.outputs.size(); ++k) {
        const fs::path p = out + c.outputs[k];
        const bool raw = c.binary && c.outputs[k].empty();
        const std::string content = raw ? file_bytes(p) : csv_body(p);
        if (run == 0) {
          first.push_back(content);
        } else if (content != first[k] || content == "<missing>") {
          same = false;
        }
      }
    }
    const bool case_ok = same && rc[0] == 0 && rc[1] == 0;
    detail(c.label + ": exit " + std::to_string(rc[0]) + "/" + std::to_string(rc[1]) +
           (same ? ", identical" : ", DIFFERENT"));
    ok = ok && case_ok;
  }
  fs::remove_all(dir);
  return ok;
}

const std::map<int, std::pair<const char*, std::function<bool()>>> kCriteria = {
    {1, {"oracle score and Fisher match finite differences", criterion1}},
    {2, {"trace identities", criterion2}},
    {3, {"trace-matching error bound", criterion3}},
    {4, {"endpoint-approximation Hilbert-Schmidt bound", criterion4}},
    {5, {"single-Gaussian likelihood", criterion5}},
    {6, {"adjoint matches flow finite differences", criterion6}},
    {7, {"OT diagnostics by data geometry", criterion7}},
    {8, {"trained trace table on chessboard", criterion8}},
    {9, {"Hutchinson with 351 probes", criterion9}},
    {10, {"MLP gradient check", criterion10}},
    {11, {"CLI determinism", criterion11}},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else if (a == "--cli" && i + 1 < argc) {
      g_cli_path = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--criterion N]... [--cli PATH]\n";
      return 2;
    }
  }
  if (selected.empty()) {
    for (const auto& [n, _] : kCriteria) selected.push_back(n);
  }

  int failures = 0;
  for (int n : selected) {
    const auto it = kCriteria.find(n);
    if (it == kCriteria.end()) {
      std::cerr << "unknown criterion " << n << "\n";
      return 2;
    }
    bool pass = false;
    try {
      pass = it->second.second();
    } catch (const std::exception& e) {
      detail(std::string("exception: ") + e.what());
    }
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << n << ": " << it->second.first << std::endl;
    if (!pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
