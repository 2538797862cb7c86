// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "dflab/schedule.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include "dflab/error.hpp"

namespace dflab {

namespace {

constexpr double kTimeSlack = 1e-12;

}  // namespace

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::VE: return "ve";
    case ScheduleKind::VP: return "vp";
    case ScheduleKind::SubVP: return "subvp";
    case ScheduleKind::EDM: return "edm";
  }
  return "?";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "ve") return ScheduleKind::VE;
  if (name == "vp") return ScheduleKind::VP;
  if (name == "subvp") return ScheduleKind::SubVP;
  if (name == "edm") return ScheduleKind::EDM;
  throw ConfigError("unknown schedule kind '" + std::string(name) + "' (expected ve|vp|subvp|edm)");
}

NoiseSchedule::NoiseSchedule(ScheduleKind kind, ScheduleParams params)
    : kind_(kind), params_(params) {
  if (!(params_.t_min > 0.0) || !(params_.t_max > params_.t_min)) {
    throw ConfigError("schedule requires 0 < t_min < T");
  }
  switch (kind_) {
    case ScheduleKind::VP:
    case ScheduleKind::SubVP:
      if (!(params_.beta_min > 0.0) || !(params_.beta_max >= params_.beta_min)) {
        throw ConfigError("schedule requires 0 < beta_min <= beta_max");
      }
      break;
    case ScheduleKind::VE:
      if (!(params_.sigma_min > 0.0) || !(params_.sigma_max > params_.sigma_min)) {
        throw ConfigError("schedule requires 0 < sigma_min < sigma_max");
      }
      break;
    case ScheduleKind::EDM:
      if (!(params_.edm_scale > 0.0)) throw ConfigError("schedule requires edm_scale > 0");
      break;
  }
}

NoiseSchedule NoiseSchedule::ve(double sigma_min, double sigma_max, double t_min) {
  ScheduleParams p;
  p.sigma_min = sigma_min;
  p.sigma_max = sigma_max;
  p.t_min = t_min;
  return NoiseSchedule(ScheduleKind::VE, p);
}

NoiseSchedule NoiseSchedule::vp(double beta_min, double beta_max, double t_min) {
  ScheduleParams p;
  p.beta_min = beta_min;
  p.beta_max = beta_max;
  p.t_min = t_min;
  return NoiseSchedule(ScheduleKind::VP, p);
}

NoiseSchedule NoiseSchedule::subvp(double beta_min, double beta_max, double t_min) {
  ScheduleParams p;
  p.beta_min = beta_min;
  p.beta_max = beta_max;
  p.t_min = t_min;
  return NoiseSchedule(ScheduleKind::SubVP, p);
}

NoiseSchedule NoiseSchedule::edm(double scale, double t_min) {
  ScheduleParams p;
  p.edm_scale = scale;
  p.t_min = t_min;
  return NoiseSchedule(ScheduleKind::EDM, p);
}

void NoiseSchedule::require_defined(double t) const {
  if (!(t >= -kTimeSlack && t <= params_.t_max * (1.0 + kTimeSlack))) {
    throw DomainError("time " + std::to_string(t) + " outside [0, " +
                      std::to_string(params_.t_max) + "]");
  }
}

void NoiseSchedule::require_in_range(double t) const {
  if (!(t >= params_.t_min * (1.0 - kTimeSlack) && t <= params_.t_max * (1.0 + kTimeSlack))) {
    throw DomainError("time " + std::to_string(t) + " outside [t_min, T] = [" +
                      std::to_string(params_.t_min) + ", " + std::to_string(params_.t_max) + "]");
  }
}

double NoiseSchedule::beta(double t) const {
  return params_.beta_min + t * (params_.beta_max - params_.beta_min);
}

double NoiseSchedule::beta_integral(double t) const {
  return params_.beta_min * t + 0.5 * (params_.beta_max - params_.beta_min) * t * t;
}

double NoiseSchedule::alpha(double t) const {
  require_defined(t);
  switch (kind_) {
    case ScheduleKind::VP:
    case ScheduleKind::SubVP:
      return std::exp(-0.5 * beta_integral(t));
    case ScheduleKind::VE:
    case ScheduleKind::EDM:
      return 1.0;
  }
  return 1.0;
}

double NoiseSchedule::sigma(double t) const {
  require_defined(t);
  switch (kind_) {
    case ScheduleKind::VP:
      // 1 - alpha^2 = -expm1(-B(t)), evaluated without cancellation near t = 0.
      return std::sqrt(-std::expm1(-beta_integral(t)));
    case ScheduleKind::SubVP:
      return -std::expm1(-beta_integral(t));
    case ScheduleKind::VE:
      return params_.sigma_min * std::pow(params_.sigma_max / params_.sigma_min, t);
    case ScheduleKind::EDM:
      return params_.edm_scale * t;
  }
  return 0.0;
}

double NoiseSchedule::drift_coeff(double t) const {
  require_defined(t);
  switch (kind_) {
    case ScheduleKind::VP:
    case ScheduleKind::SubVP:
      return -0.5 * beta(t);
    case ScheduleKind::VE:
    case ScheduleKind::EDM:
      return 0.0;
  }
  return 0.0;
}

double NoiseSchedule::diffusion_coeff_sq(double t) const {
  require_defined(t);
  double g2 = 0.0;
  switch (kind_) {
    case ScheduleKind::VP:
      g2 = beta(t);
      break;
    case ScheduleKind::SubVP:
      // beta(t) * (1 - alpha^4)
      g2 = beta(t) * -std::expm1(-2.0 * beta_integral(t));
      break;
    case ScheduleKind::VE: {
      const double s = sigma(t);
      g2 = 2.0 * s * s * std::log(params_.sigma_max / params_.sigma_min);
      break;
    }
    case ScheduleKind::EDM:
      g2 = 2.0 * params_.edm_scale * params_.edm_scale * t;
      break;
  }
  assert(g2 >= 0.0 && "negative g^2: schedule parameters misused");
  return g2;
}

std::vector<double> NoiseSchedule::uniform_grid(int steps) const {
  if (steps < 1) throw DomainError("grid needs at least one step");
  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  const double span = params_.t_max - params_.t_min;
  for (int k = 0; k <= steps; ++k) {
    grid[static_cast<std::size_t>(k)] = params_.t_min + span * static_cast<double>(k) / steps;
  }
  grid.front() = params_.t_min;
  grid.back() = params_.t_max;
  return grid;
}

}  // namespace dflab
