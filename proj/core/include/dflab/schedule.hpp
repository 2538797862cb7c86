// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dflab {

enum class ScheduleKind { VE, VP, SubVP, EDM };

std::string_view to_string(ScheduleKind kind);
/// Parses "ve", "vp", "subvp" or "edm"; throws ConfigError otherwise.
ScheduleKind parse_schedule_kind(std::string_view name);

struct ScheduleParams {
  double beta_min = 0.1;   // VP, SubVP
  double beta_max = 20.0;  // VP, SubVP
  double sigma_min = 0.01; // VE
  double sigma_max = 50.0; // VE
  double edm_scale = 80.0; // EDM: sigma(t) = edm_scale * t on t in [0, 1]
  double t_min = 1e-3;
  double t_max = 1.0;
};

/// Gaussian forward kernel q(x_t | x_0) = N(alpha(t) x_0, sigma(t)^2 I) and the
/// coefficients of the equivalent linear SDE dx = f(t) x dt + g(t) dB.
///
/// The closed forms are defined on [0, T]. Quantities that divide by sigma
/// (scores, Fisher matrices) must stay on [t_min, T]; use require_in_range().
/// All derivatives are analytic.
class NoiseSchedule {
 public:
  NoiseSchedule(ScheduleKind kind, ScheduleParams params = {});

  static NoiseSchedule ve(double sigma_min = 0.01, double sigma_max = 50.0, double t_min = 1e-3);
  static NoiseSchedule vp(double beta_min = 0.1, double beta_max = 20.0, double t_min = 1e-3);
  static NoiseSchedule subvp(double beta_min = 0.1, double beta_max = 20.0, double t_min = 1e-3);
  static NoiseSchedule edm(double scale = 80.0, double t_min = 1e-3);

  ScheduleKind kind() const noexcept { return kind_; }
  const ScheduleParams& params() const noexcept { return params_; }
  double t_min() const noexcept { return params_.t_min; }
  double t_max() const noexcept { return params_.t_max; }

  double alpha(double t) const;
  double sigma(double t) const;
  /// f(t) = d log(alpha) / dt
  double drift_coeff(double t) const;
  /// g^2(t) = d sigma^2 / dt - 2 f(t) sigma^2
  double diffusion_coeff_sq(double t) const;

  /// Throws DomainError unless t lies in [t_min, T].
  void require_in_range(double t) const;

  /// Uniform grid t_min = t_0 < ... < t_M = T with both endpoints exact.
  std::vector<double> uniform_grid(int steps) const;

 private:
  void require_defined(double t) const;
  // VP/SubVP: integral of beta from 0 to t.
  double beta_integral(double t) const;
  double beta(double t) const;

  ScheduleKind kind_;
  ScheduleParams params_;
};

}  // namespace dflab
