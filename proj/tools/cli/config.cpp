// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <fstream>
#include <random>

#include <Eigen/Cholesky>

#include "dflab/error.hpp"
#include "dflab/training.hpp"

namespace dflab::cli {

namespace {

json schedule_defaults() {
  const ScheduleParams p;
  return {{"kind", "ve"},           {"beta_min", p.beta_min},   {"beta_max", p.beta_max},
          {"sigma_min", p.sigma_min}, {"sigma_max", p.sigma_max}, {"edm_scale", p.edm_scale},
          {"t_min", p.t_min}};
}

json common(const std::string& data, const std::string& out) {
  return {{"seed", 0},
          {"out", out},
          {"schedule", schedule_defaults()},
          {"data", data},
          {"n", 5000},
          {"data_seed", 0},
          {"gaussian", {{"mean", {0.0, 0.0}}, {"cov", {{1.0, 0.0}, {0.0, 1.0}}}}}};
}

bool compatible(const json& def, const json& v) {
  if (def.is_null()) return v.is_null() || v.is_string();
  if (def.is_number_float()) return v.is_number();
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) return v.is_array();
  if (def.is_object()) return v.is_object();
  return false;
}

}  // namespace

json command_defaults(const std::string& command) {
  if (command == "gen-data") {
    json j = common("chessboard", "data.csv");
    j.erase("data_seed");  // --seed drives generation
    return j;
  }
  if (command == "fisher-check") {
    json j = common("nonaffine3", "fisher_check.csv");
    j["t_grid"] = {0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    j["n_points"] = 20;
    j["score_rel_tol"] = 1e-4;
    j["fisher_abs_tol"] = 1e-3;
    return j;
  }
  if (command == "trace-bench") {
    json j = common("chessboard", "trace_bench.csv");
    j["t_grid"] = {0.2, 0.4, 0.6, 0.8, 1.0};
    j["n_eval"] = 256;
    j["hutchinson_probes"] = 1;
    j["eps_ckpt"] = nullptr;
    j["tm_ckpt"] = nullptr;
    return j;
  }
  if (command == "nll") {
    json j = common("nonaffine3", "nll.csv");
    j["steps"] = 1000;
    j["trace_method"] = "exact";
    j["hutchinson_probes"] = 1;
    j["x_csv"] = nullptr;
    j["n_samples"] = 16;
    j["eps_ckpt"] = nullptr;
    j["tm_ckpt"] = nullptr;
    return j;
  }
  if (command == "adjoint-sim") {
    json j = common("nonaffine3", "adjoint_sim.csv");
    j["op"] = nullptr;
    j["x_ref"] = {0.5, 0.0};
    j["steps"] = 50;
    j["guidance_steps"] = nullptr;
    j["strength"] = 0.2;
    j["n_traj"] = 8;
    j["eps_ckpt"] = nullptr;
    return j;
  }
  if (command == "ot-test") {
    json j = common("nonaffine3", "ot_test.csv");
    j["m"] = 1000;
    j["n_traj"] = 16;
    j["s"] = 0.0;
    j["transpose_variant"] = false;
    j["sym_tol"] = 1e-6;
    j["eig_tol"] = 1e-8;
    return j;
  }
  if (command == "train") {
    const TrainConfig tc;
    json j = common("chessboard", "net.ckpt");
    j["net"] = "eps";
    j["batch_size"] = tc.batch_size;
    j["n_steps"] = tc.n_steps;
    j["learning_rate"] = tc.learning_rate;
    j["weight_decay"] = tc.weight_decay;
    j["loss_weight"] = "constant";
    j["hidden"] = tc.hidden;
    j["n_time_features"] = tc.n_time_features;
    j["log_every"] = tc.log_every;
    return j;
  }
  throw ConfigError("unknown command '" + command + "'");
}

void merge_checked(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) throw ConfigError("config" + (where.empty() ? "" : " '" + where + "'") + " must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    json& slot = base[it.key()];
    // Optional entries (null default) hold either null or a value of any list/string type.
    if (slot.is_null() && (it.value().is_array() || it.value().is_string() || it.value().is_null())) {
      slot = it.value();
      continue;
    }
    if (!compatible(slot, it.value())) throw ConfigError("config key '" + key + "' has the wrong type");
    if (slot.is_object()) {
      merge_checked(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config '" + path + "': " + e.what());
  }
}

NoiseSchedule schedule_from(const json& cfg) {
  const json& s = cfg.at("schedule");
  ScheduleParams p;
  p.beta_min = s.at("beta_min").get<double>();
  p.beta_max = s.at("beta_max").get<double>();
  p.sigma_min = s.at("sigma_min").get<double>();
  p.sigma_max = s.at("sigma_max").get<double>();
  p.edm_scale = s.at("edm_scale").get<double>();
  p.t_min = s.at("t_min").get<double>();
  try {
    return NoiseSchedule(parse_schedule_kind(s.at("kind").get<std::string>()), p);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid schedule: ") + e.what());
  }
}

std::optional<std::string> optional_string(const json& cfg, const char* key) {
  const json& v = cfg.at(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) throw ConfigError(std::string("config key '") + key + "' must be a string");
  return v.get<std::string>();
}

DiracDataset sample_gaussian(const GaussianInitial& g, int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("gaussian sampling needs n >= 1");
  const Eigen::LLT<Matrix> llt(g.cov());
  if (llt.info() != Eigen::Success) throw ConfigError("gaussian covariance is not positive definite");
  const Matrix L = llt.matrixL();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix pts(g.dim(), n);
  Vector z(g.dim());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < g.dim(); ++i) z(i) = normal(rng);
    pts.col(j) = g.mean() + L * z;
  }
  return DiracDataset(std::move(pts));
}

int DataSource::dim() const { return dirac ? dirac->dim() : gaussian->dim(); }

std::unique_ptr<ExactProvider> DataSource::provider(const NoiseSchedule& sched) const {
  if (dirac) return std::make_unique<DiracProvider>(*dirac, sched);
  return std::make_unique<GaussianProvider>(*gaussian, sched);
}

DiracDataset DataSource::points(int n, std::uint64_t seed) const {
  if (dirac) return *dirac;
  return sample_gaussian(*gaussian, n, seed);
}

Vector DataSource::mean() const { return dirac ? dirac->mean() : gaussian->mean(); }

double DataSource::mean_variance() const {
  return dirac ? dirac->mean_variance() : gaussian->cov().trace() / gaussian->dim();
}

DataSource resolve_data(const json& cfg) {
  const std::string name = cfg.at("data").get<std::string>();
  const int n = cfg.at("n").get<int>();
  DataSource src;
  src.label = name;
  try {
    if (name == "chessboard") {
      src.dirac = gen_chessboard(n, cfg.at("data_seed").get<std::uint64_t>());
    } else if (name == "affine3") {
      src.dirac = affine_triple();
    } else if (name == "nonaffine3") {
      src.dirac = nonaffine_triple();
    } else if (name == "gaussian") {
      const json& g = cfg.at("gaussian");
      const auto mean = g.at("mean").get<std::vector<double>>();
      const auto cov = g.at("cov").get<std::vector<std::vector<double>>>();
      const auto d = static_cast<Eigen::Index>(mean.size());
      if (static_cast<Eigen::Index>(cov.size()) != d) throw ConfigError("gaussian.cov must be d x d");
      Matrix c(d, d);
      for (Eigen::Index r = 0; r < d; ++r) {
        if (static_cast<Eigen::Index>(cov[r].size()) != d) throw ConfigError("gaussian.cov must be d x d");
        for (Eigen::Index k = 0; k < d; ++k) c(r, k) = cov[r][k];
      }
      src.gaussian = GaussianInitial(Eigen::Map<const Vector>(mean.data(), d), c);
    } else if (name.size() > 5 && name.substr(name.size() - 5) == ".json") {
      src.gaussian = read_gaussian_json(name);
    } else {
      src.dirac = read_dataset_csv(name);
    }
  } catch (const DomainError& e) {
    throw ConfigError("invalid data '" + name + "': " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError("invalid gaussian block: " + std::string(e.what()));
  }
  return src;
}

}  // namespace dflab::cli
