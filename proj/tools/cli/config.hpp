// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "dflab/dataset.hpp"
#include "dflab/providers.hpp"
#include "dflab/schedule.hpp"

namespace dflab::cli {

using json = nlohmann::json;

/// Resolved defaults of a command. Every key a config file may set appears here;
/// null marks an optional string.
json command_defaults(const std::string& command);

/// Overlays `patch` onto `base`. Keys missing from `base` and type changes are
/// configuration errors; `where` prefixes the messages.
void merge_checked(json& base, const json& patch, const std::string& where = "");

json load_config_file(const std::string& path);

NoiseSchedule schedule_from(const json& cfg);

/// Initial law named by the `data` key.
struct DataSource {
  std::string label;
  std::optional<DiracDataset> dirac;
  std::optional<GaussianInitial> gaussian;

  int dim() const;
  std::unique_ptr<ExactProvider> provider(const NoiseSchedule& sched) const;
  /// The Dirac set itself, or `n` seeded draws from the Gaussian.
  DiracDataset points(int n, std::uint64_t seed) const;
  Vector mean() const;
  /// Mean per-coordinate variance of the initial law.
  double mean_variance() const;
};

DataSource resolve_data(const json& cfg);

DiracDataset sample_gaussian(const GaussianInitial& g, int n, std::uint64_t seed);

std::optional<std::string> optional_string(const json& cfg, const char* key);

}  // namespace dflab::cli
