// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dflab/dataset.hpp"
#include "dflab/mlp.hpp"
#include "dflab/providers.hpp"
#include "dflab/schedule.hpp"

namespace dflab {

/// n points uniform on the black squares ((i + j) even) of the 4x4 tiling of [-2, 2]^2.
DiracDataset gen_chessboard(int n, std::uint64_t seed);

enum class NetKind { Eps, Tm };
std::string_view to_string(NetKind k);
NetKind parse_net_kind(std::string_view name);

enum class LossWeight { Constant, Sigma2 };

struct TrainConfig {
  int batch_size = 256;
  int n_steps = 20000;
  double learning_rate = 1e-4;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  LossWeight loss_weight = LossWeight::Constant;
  std::vector<int> hidden = {64, 64, 64};
  int n_time_features = 8;
  int log_every = 100;  // loss-curve resolution in steps
};

/// MLP plus the fixed input/output normalization around it.
/// Input features: u = (x - alpha m) / sqrt(alpha^2 v + sigma^2) and sinusoidal
/// time features; output = out_shift + out_scale * net(...).
struct TrainedNet {
  NetKind kind = NetKind::Eps;
  MLP net;
  Vector data_mean;
  double data_var = 1.0;
  double out_shift = 0.0;
  double out_scale = 1.0;
  int n_time_features = 8;
  ScheduleKind schedule_kind = ScheduleKind::VE;
  ScheduleParams schedule_params;

  NoiseSchedule schedule() const { return NoiseSchedule(schedule_kind, schedule_params); }
  int dim() const { return static_cast<int>(data_mean.size()); }
  Vector features(const Vector& x, double t, const NoiseSchedule& sched) const;
  /// d features / d x is diag(1 / input_scale) on the first d entries.
  double input_scale(double t, const NoiseSchedule& sched) const;
  Matrix features_batch(const Matrix& X, const Vector& t, const NoiseSchedule& sched) const;
};

Vector time_features(double t, int k);

struct TrainResult {
  TrainedNet net;
  std::vector<double> loss_curve;  // mean training loss over each log_every window
  double heldout_loss = 0.0;
  double baseline_loss = 0.0;      // held-out loss of the best constant predictor (eps: d)
};

TrainResult train_eps(const DiracDataset& ds, const NoiseSchedule& sched, const TrainConfig& cfg);
TrainResult train_tm(const DiracDataset& ds, const NoiseSchedule& sched, const TrainConfig& cfg);

class EpsNetProvider final : public ScoreProvider {
 public:
  explicit EpsNetProvider(TrainedNet net);
  int dim() const override { return net_.dim(); }
  Vector epsilon(const Vector& x, double t) const override;
  const TrainedNet& net() const noexcept { return net_; }

 private:
  TrainedNet net_;
};

class TraceNetProvider final : public TraceProvider {
 public:
  explicit TraceNetProvider(TrainedNet net);
  double t_prediction(const Vector& x, double t) const override;
  const TrainedNet& net() const noexcept { return net_; }

 private:
  TrainedNet net_;
  NoiseSchedule sched_;
};

/// One JSON header line followed by little-endian float64 parameters.
void save_checkpoint(const std::string& path, const TrainedNet& net);
TrainedNet load_checkpoint(const std::string& path);
void write_checkpoint(std::ostream& out, const TrainedNet& net);
TrainedNet read_checkpoint(std::istream& in);

struct TraceTableRow {
  double t = 0.0;
  double exact_mean = 0.0;
  double vjp_rel_err = 0.0;
  double dftm_rel_err = 0.0;
};

/// Mean relative trace error of VJP-on-eps and DF-TM against the oracle trace,
/// evaluated on n_eval_points samples alpha_t y + sigma_t z with y drawn from ds.
std::vector<TraceTableRow> eval_trace_table(const ScoreProvider& eps_net, const TraceProvider& tm_net,
                                            const ExactProvider& oracle, const DiracDataset& ds,
                                            const std::vector<double>& t_grid, int n_eval_points,
                                            std::uint64_t seed);

}  // namespace dflab
