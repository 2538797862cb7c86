// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "dflab/error.hpp"
#include "dflab/fisher_access.hpp"
#include "dflab/ode.hpp"
#include "dflab/ot_verify.hpp"
#include "dflab/parallel.hpp"
#include "dflab/training.hpp"
#include "output.hpp"

namespace dflab::cli {

namespace {

std::string out_path(const json& cfg) { return cfg.at("out").get<std::string>(); }
std::uint64_t seed_of(const json& cfg) { return cfg.at("seed").get<std::uint64_t>(); }

std::vector<std::string> coord_columns(const char* prefix, int d) {
  std::vector<std::string> cols;
  for (int i = 0; i < d; ++i) cols.push_back(prefix + std::to_string(i));
  return cols;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<double> time_grid(const json& cfg, const NoiseSchedule& sched) {
  auto grid = cfg.at("t_grid").get<std::vector<double>>();
  if (grid.empty()) throw ConfigError("t_grid must not be empty");
  for (double t : grid) {
    if (!(t >= sched.t_min() && t <= sched.t_max())) throw ConfigError("t_grid entries must lie in [t_min, T]");
  }
  return grid;
}

int positive_int(const json& cfg, const char* key) {
  const int v = cfg.at(key).get<int>();
  if (v < 1) throw ConfigError(std::string("'") + key + "' must be >= 1");
  return v;
}

// Draw from the diffused law q_t: x = alpha y + sigma z with y from the initial law.
Vector draw_diffused(const DataSource& src, const NoiseSchedule& sched, double t, std::mt19937_64& rng) {
  const int d = src.dim();
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector y(d);
  if (src.dirac) {
    std::uniform_int_distribution<int> pick(0, src.dirac->size() - 1);
    y = src.dirac->point(pick(rng));
  } else {
    y = sample_gaussian(*src.gaussian, 1, rng()).point(0);
  }
  Vector z(d);
  for (int i = 0; i < d; ++i) z(i) = normal(rng);
  return sched.alpha(t) * y + sched.sigma(t) * z;
}

TrainedNet load_net(const std::string& path, NetKind kind, const NoiseSchedule& sched, int d) {
  TrainedNet net = load_checkpoint(path);
  if (net.kind != kind) throw ConfigError("checkpoint '" + path + "' holds a " + std::string(to_string(net.kind)) + " net");
  if (net.schedule_kind != sched.kind() || net.schedule_params.t_min != sched.t_min()) {
    throw ConfigError("checkpoint '" + path + "' was trained with a different schedule");
  }
  if (net.dim() != d) throw ConfigError("checkpoint '" + path + "' has the wrong data dimension");
  return net;
}

struct Nets {
  std::optional<EpsNetProvider> eps;
  std::optional<TraceNetProvider> tm;
};

Nets load_nets(const json& cfg, const NoiseSchedule& sched, int d, bool with_tm) {
  Nets nets;
  if (auto p = optional_string(cfg, "eps_ckpt")) nets.eps.emplace(load_net(*p, NetKind::Eps, sched, d));
  if (with_tm) {
    if (auto p = optional_string(cfg, "tm_ckpt")) nets.tm.emplace(load_net(*p, NetKind::Tm, sched, d));
  }
  return nets;
}

// Five-point central gradient and three-point Hessian of a scalar field.
template <class F>
Vector fd_gradient(const F& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector e = Vector::Zero(x.size());
    e(i) = h;
    g(i) = (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h);
  }
  return g;
}

template <class F>
Matrix fd_hessian(const F& f, const Vector& x, double h) {
  const Eigen::Index d = x.size();
  Matrix H(d, d);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < d; ++i) {
    Vector ei = Vector::Zero(d);
    ei(i) = h;
    H(i, i) = (f(x + ei) - 2 * f0 + f(x - ei)) / (h * h);
    for (Eigen::Index j = 0; j < i; ++j) {
      Vector ej = Vector::Zero(d);
      ej(j) = h;
      H(i, j) = H(j, i) =
          (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * h * h);
    }
  }
  return H;
}

}  // namespace

int cmd_gen_data(const json& cfg) {
  json c = cfg;
  c["data_seed"] = cfg.at("seed");
  const std::string out = out_path(cfg);
  const DataSource src = resolve_data(c);
  const int n = cfg.at("n").get<int>();
  json summary{{"dim", src.dim()}};
  if (src.gaussian && n == 0) {
    std::ofstream f(out);
    if (!f) throw ConfigError("cannot open '" + out + "' for writing");
    f << gaussian_to_json(*src.gaussian) << '\n';
    summary["format"] = "gaussian-json";
  } else {
    if (n < 1 && src.gaussian) throw ConfigError("'n' must be >= 0");
    const DiracDataset ds = src.points(n, seed_of(cfg));
    write_dataset_csv(out, ds);
    summary["format"] = "csv";
    summary["n_points"] = ds.size();
  }
  write_sidecar(out, "gen-data", cfg, summary);
  return 0;
}

int cmd_fisher_check(const json& cfg) {
  const NoiseSchedule sched = schedule_from(cfg);
  const DataSource src = resolve_data(cfg);
  const auto p = src.provider(sched);
  const std::vector<double> grid = time_grid(cfg, sched);
  const int n_points = positive_int(cfg, "n_points");
  const double score_tol = cfg.at("score_rel_tol").get<double>();
  const double fisher_tol = cfg.at("fisher_abs_tol").get<double>();
  const std::uint64_t seed = seed_of(cfg);
  const int d = src.dim();

  struct Row {
    double t = 0;
    Vector x;
    double score_err = 0, fisher_err = 0, fisher_scale = 0, trace_err = 0;
    bool pass = false;
  };
  std::vector<Row> rows(grid.size() * n_points);
  for (std::size_t ti = 0; ti < grid.size(); ++ti) {
    std::mt19937_64 rng(derive_seed(seed, ti));
    for (int j = 0; j < n_points; ++j) {
      Row& r = rows[ti * n_points + j];
      r.t = grid[ti];
      r.x = draw_diffused(src, sched, grid[ti], rng);
    }
  }

  const Stopwatch sw;
  parallel_for(static_cast<int>(rows.size()), [&](int k) {
    Row& r = rows[k];
    const double s = sched.sigma(r.t);
    const auto logq = [&](const Vector& y) { return p->log_density(y, r.t); };
    const Vector g_fd = fd_gradient(logq, r.x, 1e-2 * s);
    r.score_err = (p->score(r.x, r.t) - g_fd).norm() / std::max(g_fd.norm(), 1.0);
    const Matrix F = p->fisher(r.x, r.t).matrix;
    const Matrix H_fd = fd_hessian(logq, r.x, 1e-3 * s);
    r.fisher_err = (F + H_fd).cwiseAbs().maxCoeff();
    r.fisher_scale = F.cwiseAbs().maxCoeff();
    r.trace_err = std::abs(p->fisher_trace(r.x, r.t) - F.trace()) / std::max(1.0, std::abs(F.trace()));
    r.pass = r.score_err <= score_tol && r.fisher_err <= fisher_tol * std::max(1.0, r.fisher_scale) &&
             r.trace_err <= 1e-10;
  });
  const double elapsed = sw.seconds();

  CsvWriter csv(out_path(cfg), "fisher-check",
                concat(concat({"t", "point"}, coord_columns("x", d)),
                       {"score_rel_err", "fisher_abs_err", "fisher_scale", "trace_identity_err", "pass"}));
  int failures = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Row& r = rows[k];
    csv.cell(r.t).cell(static_cast<long long>(k % n_points));
    for (int i = 0; i < d; ++i) csv.cell(r.x(i));
    csv.cell(r.score_err).cell(r.fisher_err).cell(r.fisher_scale).cell(r.trace_err).cell(std::string(r.pass ? "1" : "0"));
    csv.end_row();
    failures += r.pass ? 0 : 1;
  }
  csv.close();
  write_sidecar(out_path(cfg), "fisher-check", cfg,
                {{"n_checked", rows.size()}, {"n_failed", failures}, {"timings_s", {{"checks", elapsed}}}});
  return failures == 0 ? 0 : 1;
}

int cmd_trace_bench(const json& cfg) {
  const NoiseSchedule sched = schedule_from(cfg);
  const DataSource src = resolve_data(cfg);
  const auto oracle = src.provider(sched);
  const Nets nets = load_nets(cfg, sched, src.dim(), true);
  const ScoreProvider& sp = nets.eps ? static_cast<const ScoreProvider&>(*nets.eps) : *oracle;
  const TraceProvider& tp = nets.tm ? static_cast<const TraceProvider&>(*nets.tm) : *oracle;
  const std::vector<double> grid = time_grid(cfg, sched);
  const int n_eval = positive_int(cfg, "n_eval");
  const int probes = positive_int(cfg, "hutchinson_probes");
  const std::uint64_t seed = seed_of(cfg);
  const std::vector<TraceMethod> methods = {TraceMethod::Exact, TraceMethod::DfTm, TraceMethod::Vjp,
                                            TraceMethod::Hutchinson};

  CsvWriter csv(out_path(cfg), "trace-bench", {"t", "method", "mean_estimate", "exact_mean", "mean_rel_err"});
  json timings = json::object();
  for (std::size_t ti = 0; ti < grid.size(); ++ti) {
    const double t = grid[ti];
    std::mt19937_64 rng(derive_seed(seed, ti));
    std::vector<Vector> xs(n_eval);
    for (Vector& x : xs) x = draw_diffused(src, sched, t, rng);
    std::vector<double> exact(n_eval);
    parallel_for(n_eval, [&](int j) { exact[j] = oracle->fisher_trace(xs[j], t); });
    double exact_mean = 0;
    for (double e : exact) exact_mean += e / n_eval;

    for (TraceMethod m : methods) {
      std::vector<double> est(n_eval);
      const Stopwatch sw;
      parallel_for(n_eval, [&](int j) {
        switch (m) {
          case TraceMethod::Exact: est[j] = oracle->fisher_trace(xs[j], t); break;
          case TraceMethod::DfTm: est[j] = df_tm_trace(tp, sp, sched, xs[j], t); break;
          case TraceMethod::Vjp: est[j] = trace_via_vjp(sp, xs[j], t); break;
          case TraceMethod::Hutchinson:
            est[j] = trace_hutchinson(sp, xs[j], t, probes, derive_seed(derive_seed(seed, 1000 + ti), j));
            break;
        }
      });
      timings[std::string(to_string(m))][format_double(t)] = sw.seconds();
      double mean = 0, rel = 0;
      for (int j = 0; j < n_eval; ++j) {
        if (!std::isfinite(est[j])) throw NumericalError("trace-bench: non-finite trace estimate", j);
        mean += est[j] / n_eval;
        rel += std::abs(est[j] - exact[j]) / std::abs(exact[j]) / n_eval;
      }
      csv.cell(t).cell(std::string(to_string(m))).cell(mean).cell(exact_mean).cell(rel);
      csv.end_row();
    }
  }
  csv.close();
  write_sidecar(out_path(cfg), "trace-bench", cfg,
                {{"score_source", nets.eps ? "eps_ckpt" : "oracle"},
                 {"trace_source", nets.tm ? "tm_ckpt" : "oracle"},
                 {"timings_s", timings}});
  return 0;
}

int cmd_nll(const json& cfg) {
  const NoiseSchedule sched = schedule_from(cfg);
  const DataSource src = resolve_data(cfg);
  const auto oracle = src.provider(sched);
  const Nets nets = load_nets(cfg, sched, src.dim(), true);
  const ScoreProvider& sp = nets.eps ? static_cast<const ScoreProvider&>(*nets.eps) : *oracle;
  const TraceProvider& tp = nets.tm ? static_cast<const TraceProvider&>(*nets.tm) : *oracle;
  const TraceMethod method = parse_trace_method(cfg.at("trace_method").get<std::string>());
  const int steps = positive_int(cfg, "steps");
  const std::uint64_t seed = seed_of(cfg);
  const int d = src.dim();

  std::vector<Vector> xs;
  if (auto path = optional_string(cfg, "x_csv")) {
    const DiracDataset pts = read_dataset_csv(*path);
    if (pts.dim() != d) throw ConfigError("x_csv dimension does not match the data");
    for (int i = 0; i < pts.size(); ++i) xs.emplace_back(pts.point(i));
  } else {
    std::mt19937_64 rng(seed);
    const int n = positive_int(cfg, "n_samples");
    for (int i = 0; i < n; ++i) xs.push_back(draw_diffused(src, sched, sched.t_min(), rng));
  }

  NllOptions base;
  base.hutchinson_probes = positive_int(cfg, "hutchinson_probes");
  if (sched.kind() == ScheduleKind::VP || sched.kind() == ScheduleKind::SubVP) {
    base.prior_variance = src.mean_variance();
  }

  const int n = static_cast<int>(xs.size());
  std::vector<NllResult> res(n);
  std::vector<double> exact(n);
  const Stopwatch sw;
  parallel_for(n, [&](int i) {
    NllOptions opt = base;
    opt.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    res[i] = nll_solve(sp, &tp, oracle.get(), xs[i], steps, method, opt);
  });
  const double elapsed = sw.seconds();
  for (int i = 0; i < n; ++i) exact[i] = -oracle->log_density(xs[i], sched.t_min());

  CsvWriter csv(out_path(cfg), "nll", concat(concat({"index"}, coord_columns("x", d)), {"nll", "bpd", "exact_nll"}));
  double mean_nll = 0, mean_err = 0;
  for (int i = 0; i < n; ++i) {
    csv.cell(static_cast<long long>(i));
    for (int k = 0; k < d; ++k) csv.cell(xs[i](k));
    csv.cell(res[i].nll).cell(res[i].bpd).cell(exact[i]);
    csv.end_row();
    mean_nll += res[i].nll / n;
    mean_err += std::abs(res[i].nll - exact[i]) / (n * d);
  }
  csv.close();
  write_sidecar(out_path(cfg), "nll", cfg,
                {{"mean_nll", mean_nll},
                 {"mean_abs_err_per_dim", mean_err},
                 {"timings_s", {{"nll_solve", elapsed}}}});
  return 0;
}

int cmd_adjoint_sim(const json& cfg) {
  const NoiseSchedule sched = schedule_from(cfg);
  const DataSource src = resolve_data(cfg);
  const auto oracle = src.provider(sched);
  const Nets nets = load_nets(cfg, sched, src.dim(), false);
  const ScoreProvider& sp = nets.eps ? static_cast<const ScoreProvider&>(*nets.eps) : *oracle;
  const int d = src.dim();
  const int steps = positive_int(cfg, "steps");
  const int n_traj = positive_int(cfg, "n_traj");
  const std::uint64_t seed = seed_of(cfg);

  std::vector<OperatorKind> ops;
  if (auto op = optional_string(cfg, "op")) {
    ops.push_back(parse_operator_kind(*op));
  } else {
    ops = {OperatorKind::Exact, OperatorKind::Vjp, OperatorKind::DfEa};
  }

  GuidanceConfig gc;
  const auto x_ref = cfg.at("x_ref").get<std::vector<double>>();
  if (static_cast<int>(x_ref.size()) != d) throw ConfigError("x_ref must have the data dimension");
  gc.x_ref = Eigen::Map<const Vector>(x_ref.data(), d);
  gc.steps = steps;
  gc.strength = cfg.at("strength").get<double>();
  if (cfg.at("guidance_steps").is_null()) {
    // Middle 40% of the grid: steps 15..35 of 50 (1-based).
    const int first = std::max(0, static_cast<int>(std::lround(0.3 * steps)) - 1);
    const int last = std::max(first, static_cast<int>(std::lround(0.7 * steps)) - 1);
    for (int k = first; k <= last && k < steps; ++k) gc.guidance_steps.push_back(k);
  } else {
    gc.guidance_steps = cfg.at("guidance_steps").get<std::vector<int>>();
  }

  struct Cell {
    double final_loss = 0, lambda_err = 0, seconds = 0;
  };
  const std::size_t n_ops = ops.size();
  std::vector<Cell> cells(n_traj * n_ops);
  std::vector<double> unguided(n_traj);
  parallel_for(n_traj, [&](int j) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
    std::normal_distribution<double> normal(0.0, sched.sigma(sched.t_max()));
    Vector x_T(d);
    for (int i = 0; i < d; ++i) x_T(i) = normal(rng);
    const Trajectory plain = pf_ode_solve(sp, x_T, steps);
    unguided[j] = 0.5 * (plain.endpoint() - gc.x_ref).squaredNorm();
    const Vector fd = flow_grad_fd(sp, x_T, steps, gc.x_ref);
    for (std::size_t o = 0; o < n_ops; ++o) {
      GuidanceConfig g = gc;
      g.op = ops[o];
      Cell& c = cells[j * n_ops + o];
      const Stopwatch sw;
      c.final_loss = guided_sample(sp, x_T, g, oracle.get()).final_loss;
      c.seconds = sw.seconds();
      const Vector lam = adjoint_solve(ops[o], sp, plain, plain.endpoint() - gc.x_ref, oracle.get()).back().lambda;
      c.lambda_err = (lam - fd).norm() / std::max(fd.norm(), 1e-300);
    }
  });

  CsvWriter csv(out_path(cfg), "adjoint-sim", {"traj", "op", "final_loss", "unguided_loss", "lambda_rel_err"});
  json timings = json::object();
  json mean_loss = json::object();
  for (std::size_t o = 0; o < n_ops; ++o) {
    timings[std::string(to_string(ops[o]))] = 0.0;
    mean_loss[std::string(to_string(ops[o]))] = 0.0;
  }
  for (int j = 0; j < n_traj; ++j) {
    for (std::size_t o = 0; o < n_ops; ++o) {
      const Cell& c = cells[j * n_ops + o];
      const std::string name(to_string(ops[o]));
      csv.cell(static_cast<long long>(j)).cell(name).cell(c.final_loss).cell(unguided[j]).cell(c.lambda_err);
      csv.end_row();
      timings[name] = timings[name].get<double>() + c.seconds;
      mean_loss[name] = mean_loss[name].get<double>() + c.final_loss / n_traj;
    }
  }
  csv.close();
  write_sidecar(out_path(cfg), "adjoint-sim", cfg,
                {{"mean_final_loss", mean_loss}, {"timings_s", {{"guided_sample", timings}}}});
  return 0;
}

int cmd_ot_test(const json& cfg) {
  const NoiseSchedule sched = schedule_from(cfg);
  const DataSource src = resolve_data(cfg);
  const auto p = src.provider(sched);
  OTConfig oc;
  oc.data_label = src.label;
  oc.M = positive_int(cfg, "m");
  oc.n_traj = positive_int(cfg, "n_traj");
  oc.s = cfg.at("s").get<double>();
  oc.transpose_variant = cfg.at("transpose_variant").get<bool>();
  oc.seed = seed_of(cfg);
  oc.sym_tol = cfg.at("sym_tol").get<double>();
  oc.eig_tol = cfg.at("eig_tol").get<double>();
  if (oc.s > sched.t_max()) throw ConfigError("'s' must not exceed T");

  const Stopwatch sw;
  const OTReport rep = ot_experiment(*p, oc);
  const double elapsed = sw.seconds();

  CsvWriter csv(out_path(cfg), "ot-test", {"traj", "seed", "asym", "min_eig_sym"});
  for (const auto& r : rep.trajectories) {
    csv.cell(static_cast<long long>(r.traj)).cell(std::to_string(r.seed)).cell(r.asym).cell(r.min_eig_sym);
    csv.end_row();
  }
  csv.close();
  write_sidecar(out_path(cfg), "ot-test", cfg,
                {{"schedule", rep.schedule},
                 {"data", rep.data_label},
                 {"M", rep.M},
                 {"s", rep.s},
                 {"transpose_variant", rep.transpose_variant},
                 {"max_asym", rep.max_asym},
                 {"min_eig", rep.min_eig},
                 {"ot_consistent", rep.ot_consistent},
                 {"verdict", rep.ot_consistent ? "consistent with OT" : "not OT"},
                 {"timings_s", {{"ot_experiment", elapsed}}}});
  return 0;
}

int cmd_train(const json& cfg) {
  const NoiseSchedule sched = schedule_from(cfg);
  const DataSource src = resolve_data(cfg);
  const DiracDataset ds = src.points(cfg.at("n").get<int>(), cfg.at("data_seed").get<std::uint64_t>());
  const NetKind kind = parse_net_kind(cfg.at("net").get<std::string>());

  TrainConfig tc;
  tc.batch_size = cfg.at("batch_size").get<int>();
  tc.n_steps = cfg.at("n_steps").get<int>();
  tc.learning_rate = cfg.at("learning_rate").get<double>();
  tc.weight_decay = cfg.at("weight_decay").get<double>();
  tc.seed = seed_of(cfg);
  const std::string lw = cfg.at("loss_weight").get<std::string>();
  if (lw == "constant") {
    tc.loss_weight = LossWeight::Constant;
  } else if (lw == "sigma2") {
    tc.loss_weight = LossWeight::Sigma2;
  } else {
    throw ConfigError("loss_weight must be 'constant' or 'sigma2'");
  }
  tc.hidden = cfg.at("hidden").get<std::vector<int>>();
  tc.n_time_features = cfg.at("n_time_features").get<int>();
  tc.log_every = cfg.at("log_every").get<int>();

  const Stopwatch sw;
  const TrainResult r = kind == NetKind::Eps ? train_eps(ds, sched, tc) : train_tm(ds, sched, tc);
  const double elapsed = sw.seconds();

  const std::string out = out_path(cfg);
  save_checkpoint(out, r.net);
  CsvWriter csv(out + ".loss.csv", "train", {"step", "loss"});
  for (std::size_t i = 0; i < r.loss_curve.size(); ++i) {
    const long long step = std::min<long long>(static_cast<long long>(i + 1) * tc.log_every, tc.n_steps);
    csv.cell(step).cell(r.loss_curve[i]);
    csv.end_row();
  }
  csv.close();
  write_sidecar(out, "train", cfg,
                {{"heldout_loss", r.heldout_loss},
                 {"baseline_loss", r.baseline_loss},
                 {"n_params", r.net.net.n_params()},
                 {"timings_s", {{"training", elapsed}}}});
  return 0;
}

}  // namespace dflab::cli
