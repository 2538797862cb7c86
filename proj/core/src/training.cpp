// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "dflab/training.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dflab/error.hpp"
#include "dflab/fisher_access.hpp"
#include "dflab/parallel.hpp"

namespace dflab {

DiracDataset gen_chessboard(int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("gen_chessboard: n must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Matrix pts(2, n);
  int k = 0;
  while (k < n) {
    const double a = u(rng);
    const double b = u(rng);
    const int i = std::min(3, static_cast<int>(std::floor(a + 2.0)));
    const int j = std::min(3, static_cast<int>(std::floor(b + 2.0)));
    if ((i + j) % 2 != 0) continue;
    pts(0, k) = a;
    pts(1, k) = b;
    ++k;
  }
  return DiracDataset(std::move(pts));
}

std::string_view to_string(NetKind k) { return k == NetKind::Eps ? "eps" : "tm"; }

NetKind parse_net_kind(std::string_view name) {
  if (name == "eps") return NetKind::Eps;
  if (name == "tm") return NetKind::Tm;
  throw ConfigError("unknown net kind '" + std::string(name) + "'");
}

Vector time_features(double t, int k) {
  Vector f(k);
  for (int j = 0; j < k / 2; ++j) {
    const double w = std::numbers::pi * std::ldexp(1.0, j);
    f(2 * j) = std::sin(w * t);
    f(2 * j + 1) = std::cos(w * t);
  }
  return f;
}

double TrainedNet::input_scale(double t, const NoiseSchedule& sched) const {
  const double a = sched.alpha(t);
  const double s = sched.sigma(t);
  return std::sqrt(a * a * data_var + s * s);
}

Vector TrainedNet::features(const Vector& x, double t, const NoiseSchedule& sched) const {
  const int d = dim();
  if (x.size() != d) throw DomainError("network input dimension mismatch");
  Vector f(d + n_time_features);
  f.head(d) = (x - sched.alpha(t) * data_mean) / input_scale(t, sched);
  f.tail(n_time_features) = time_features(t, n_time_features);
  return f;
}

Matrix TrainedNet::features_batch(const Matrix& X, const Vector& t, const NoiseSchedule& sched) const {
  Matrix F(dim() + n_time_features, X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) F.col(j) = features(X.col(j), t(j), sched);
  return F;
}

namespace {

void validate(const TrainConfig& cfg) {
  if (cfg.batch_size < 1 || cfg.n_steps < 0 || !(cfg.learning_rate > 0.0) || cfg.weight_decay < 0.0 ||
      cfg.n_time_features < 0 || cfg.n_time_features % 2 != 0 || cfg.log_every < 1) {
    throw ConfigError("invalid training configuration");
  }
  for (int h : cfg.hidden) {
    if (h < 1) throw ConfigError("hidden widths must be positive");
  }
}

struct Batch {
  Matrix X;       // noisy inputs
  Vector t;
  Matrix target;  // eps (d x B) or ||y||^2/d (1 x B)
  Vector weight;
};

Batch sample_batch(const DiracDataset& ds, const NoiseSchedule& sched, NetKind kind, int B,
                   LossWeight lw, std::mt19937_64& rng) {
  const int d = ds.dim();
  std::uniform_int_distribution<int> pick(0, ds.size() - 1);
  std::uniform_real_distribution<double> ut(sched.t_min(), sched.t_max());
  std::normal_distribution<double> normal(0.0, 1.0);
  Batch b;
  b.X.resize(d, B);
  b.t.resize(B);
  b.weight.resize(B);
  b.target.resize(kind == NetKind::Eps ? d : 1, B);
  for (int j = 0; j < B; ++j) {
    const int i = pick(rng);
    const double t = ut(rng);
    Vector z(d);
    for (int k = 0; k < d; ++k) z(k) = normal(rng);
    const double s = sched.sigma(t);
    b.X.col(j) = sched.alpha(t) * ds.point(i) + s * z;
    b.t(j) = t;
    b.weight(j) = lw == LossWeight::Constant ? 1.0 : s * s;
    if (kind == NetKind::Eps) {
      b.target.col(j) = z;
    } else {
      b.target(0, j) = ds.squared_norms()(i) / d;
    }
  }
  return b;
}

// Weighted mean squared error and its gradient with respect to the raw net output.
double loss_and_grad(const TrainedNet& tn, const Matrix& raw, const Batch& b, Matrix* grad) {
  const Matrix pred = (tn.out_scale * raw).array() + tn.out_shift;
  const Matrix r = pred - b.target;
  const int B = static_cast<int>(raw.cols());
  double loss = 0.0;
  for (int j = 0; j < B; ++j) loss += b.weight(j) * r.col(j).squaredNorm();
  loss /= B;
  if (grad) *grad = r * ((2.0 * tn.out_scale / B) * b.weight).asDiagonal();
  return loss;
}

TrainResult train_impl(NetKind kind, const DiracDataset& ds, const NoiseSchedule& sched,
                       const TrainConfig& cfg) {
  validate(cfg);
  const int d = ds.dim();
  TrainResult res;
  TrainedNet& tn = res.net;
  tn.kind = kind;
  tn.data_mean = ds.mean();
  tn.data_var = std::max(ds.mean_variance(), 1e-12);
  tn.n_time_features = cfg.n_time_features;
  tn.schedule_kind = sched.kind();
  tn.schedule_params = sched.params();
  if (kind == NetKind::Tm) {
    const Vector target = ds.squared_norms() / d;
    tn.out_shift = target.mean();
    const double sd = std::sqrt((target.array() - tn.out_shift).square().mean());
    tn.out_scale = sd > 1e-12 ? sd : 1.0;
  }

  std::vector<int> widths;
  widths.push_back(d + cfg.n_time_features);
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(kind == NetKind::Eps ? d : 1);
  tn.net = MLP(widths, derive_seed(cfg.seed, 1));

  AdamW::Options opt;
  opt.lr = cfg.learning_rate;
  opt.weight_decay = cfg.weight_decay;
  AdamW adam(tn.net, opt);

  std::mt19937_64 rng(derive_seed(cfg.seed, 2));
  MLP::Cache cache;
  Matrix grad;
  double window = 0.0;
  int in_window = 0;
  for (int step = 0; step < cfg.n_steps; ++step) {
    const Batch b = sample_batch(ds, sched, kind, cfg.batch_size, cfg.loss_weight, rng);
    const Matrix raw = tn.net.forward(tn.features_batch(b.X, b.t, sched), cache);
    const double loss = loss_and_grad(tn, raw, b, &grad);
    if (!std::isfinite(loss)) throw NumericalError("training loss is not finite", step);
    adam.step(tn.net, tn.net.backward(cache, grad));
    if (!tn.net.all_finite()) throw NumericalError("training produced non-finite parameters", step);
    window += loss;
    if (++in_window == cfg.log_every) {
      res.loss_curve.push_back(window / in_window);
      window = 0.0;
      in_window = 0;
    }
  }
  if (in_window > 0) res.loss_curve.push_back(window / in_window);

  std::mt19937_64 held_rng(derive_seed(cfg.seed, 3));
  const Batch held = sample_batch(ds, sched, kind, 4096, cfg.loss_weight, held_rng);
  res.heldout_loss = loss_and_grad(tn, tn.net.forward(tn.features_batch(held.X, held.t, sched)), held, nullptr);
  // Best constant predictor: zero for eps, the target mean for tm.
  TrainedNet constant = tn;
  const Matrix zero = Matrix::Zero(tn.net.output_dim(), held.X.cols());
  constant.out_scale = 1.0;
  if (kind == NetKind::Tm) constant.out_shift = held.target.mean();
  res.baseline_loss = loss_and_grad(constant, zero, held, nullptr);
  return res;
}

}  // namespace

TrainResult train_eps(const DiracDataset& ds, const NoiseSchedule& sched, const TrainConfig& cfg) {
  return train_impl(NetKind::Eps, ds, sched, cfg);
}

TrainResult train_tm(const DiracDataset& ds, const NoiseSchedule& sched, const TrainConfig& cfg) {
  return train_impl(NetKind::Tm, ds, sched, cfg);
}

EpsNetProvider::EpsNetProvider(TrainedNet net) : ScoreProvider(net.schedule()), net_(std::move(net)) {
  if (net_.kind != NetKind::Eps) throw ConfigError("EpsNetProvider needs an eps network");
}

Vector EpsNetProvider::epsilon(const Vector& x, double t) const {
  return net_.out_shift + net_.out_scale * net_.net.forward(net_.features(x, t, sched_)).array();
}

TraceNetProvider::TraceNetProvider(TrainedNet net) : net_(std::move(net)), sched_(net_.schedule()) {
  if (net_.kind != NetKind::Tm) throw ConfigError("TraceNetProvider needs a tm network");
}

double TraceNetProvider::t_prediction(const Vector& x, double t) const {
  return net_.out_shift + net_.out_scale * net_.net.forward(net_.features(x, t, sched_))(0);
}

namespace {

void put_le(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_le(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw ConfigError("checkpoint: truncated parameter block");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const TrainedNet& tn) {
  const ScheduleParams& sp = tn.schedule_params;
  nlohmann::json h;
  h["format"] = "df_lab.mlp";
  h["version"] = 1;
  h["kind"] = std::string(to_string(tn.kind));
  h["widths"] = tn.net.widths();
  h["n_time_features"] = tn.n_time_features;
  h["data_mean"] = std::vector<double>(tn.data_mean.data(), tn.data_mean.data() + tn.data_mean.size());
  h["data_var"] = tn.data_var;
  h["out_shift"] = tn.out_shift;
  h["out_scale"] = tn.out_scale;
  h["schedule"] = {{"kind", std::string(to_string(tn.schedule_kind))},
                   {"beta_min", sp.beta_min},
                   {"beta_max", sp.beta_max},
                   {"sigma_min", sp.sigma_min},
                   {"sigma_max", sp.sigma_max},
                   {"edm_scale", sp.edm_scale},
                   {"t_min", sp.t_min},
                   {"t_max", sp.t_max}};
  h["n_params"] = tn.net.n_params();
  out << h.dump() << '\n';
  for (double v : tn.net.flat_params()) put_le(out, v);
  if (!out) throw ConfigError("checkpoint: write failed");
}

TrainedNet read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("checkpoint: missing header");
  TrainedNet tn;
  try {
    const nlohmann::json h = nlohmann::json::parse(line);
    if (h.at("format") != "df_lab.mlp" || h.at("version") != 1) {
      throw ConfigError("checkpoint: unsupported format");
    }
    tn.kind = parse_net_kind(h.at("kind").get<std::string>());
    tn.n_time_features = h.at("n_time_features").get<int>();
    const auto mean = h.at("data_mean").get<std::vector<double>>();
    tn.data_mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    tn.data_var = h.at("data_var").get<double>();
    tn.out_shift = h.at("out_shift").get<double>();
    tn.out_scale = h.at("out_scale").get<double>();
    const auto& s = h.at("schedule");
    tn.schedule_kind = parse_schedule_kind(s.at("kind").get<std::string>());
    tn.schedule_params.beta_min = s.at("beta_min").get<double>();
    tn.schedule_params.beta_max = s.at("beta_max").get<double>();
    tn.schedule_params.sigma_min = s.at("sigma_min").get<double>();
    tn.schedule_params.sigma_max = s.at("sigma_max").get<double>();
    tn.schedule_params.edm_scale = s.at("edm_scale").get<double>();
    tn.schedule_params.t_min = s.at("t_min").get<double>();
    tn.schedule_params.t_max = s.at("t_max").get<double>();
    tn.net = MLP(h.at("widths").get<std::vector<int>>(), 0);
    if (h.at("n_params").get<std::size_t>() != tn.net.n_params()) {
      throw ConfigError("checkpoint: parameter count does not match widths");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: bad header: ") + e.what());
  }
  std::vector<double> p(tn.net.n_params());
  for (double& v : p) v = get_le(in);
  tn.net.set_flat_params(p);
  return tn;
}

void save_checkpoint(const std::string& path, const TrainedNet& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_checkpoint(out, net);
}

TrainedNet load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

std::vector<TraceTableRow> eval_trace_table(const ScoreProvider& eps_net, const TraceProvider& tm_net,
                                            const ExactProvider& oracle, const DiracDataset& ds,
                                            const std::vector<double>& t_grid, int n_eval_points,
                                            std::uint64_t seed) {
  if (n_eval_points < 1) throw DomainError("eval_trace_table: n_eval_points must be positive");
  const NoiseSchedule& sc = oracle.schedule();
  const int d = ds.dim();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, ds.size() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<TraceTableRow> rows;
  for (double t_req : t_grid) {
    const double t = std::clamp(t_req, sc.t_min(), sc.t_max());
    std::vector<Vector> xs(n_eval_points);
    for (Vector& x : xs) {
      const int i = pick(rng);
      Vector z(d);
      for (int k = 0; k < d; ++k) z(k) = normal(rng);
      x = sc.alpha(t) * ds.point(i) + sc.sigma(t) * z;
    }
    std::vector<double> exact(n_eval_points), e_vjp(n_eval_points), e_tm(n_eval_points);
    parallel_for(n_eval_points, [&](int j) {
      exact[j] = oracle.fisher_trace(xs[j], t);
      const double denom = std::abs(exact[j]);
      e_vjp[j] = std::abs(trace_via_vjp(eps_net, xs[j], t) - exact[j]) / denom;
      e_tm[j] = std::abs(df_tm_trace(tm_net, eps_net, sc, xs[j], t) - exact[j]) / denom;
    });
    TraceTableRow row;
    row.t = t;
    for (int j = 0; j < n_eval_points; ++j) {
      row.exact_mean += exact[j];
      row.vjp_rel_err += e_vjp[j];
      row.dftm_rel_err += e_tm[j];
    }
    row.exact_mean /= n_eval_points;
    row.vjp_rel_err /= n_eval_points;
    row.dftm_rel_err /= n_eval_points;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dflab
