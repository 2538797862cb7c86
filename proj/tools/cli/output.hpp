// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dflab::cli {

/// CSV file whose first line is `# df_lab <command> <UTC timestamp>`.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& command, const std::vector<std::string>& columns);

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(const std::string& v);
  void end_row();
  void close();

 private:
  std::string path_;
  std::ofstream out_;
  bool first_ = true;
};

std::string utc_timestamp();

/// `<out>.json` with the command name, the resolved config and `extra` fields.
void write_sidecar(const std::string& out, const std::string& command, const nlohmann::json& config,
                   const nlohmann::json& extra);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace dflab::cli
