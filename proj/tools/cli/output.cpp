// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "output.hpp"

#include <ctime>

#include "dflab/dataset.hpp"
#include "dflab/error.hpp"

namespace dflab::cli {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& command,
                     const std::vector<std::string>& columns)
    : path_(path), out_(path) {
  if (!out_) throw ConfigError("cannot open '" + path + "' for writing");
  out_ << "# df_lab " << command << ' ' << utc_timestamp() << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (!first_) out_ << ',';
  out_ << v;
  first_ = false;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw ConfigError("failed writing '" + path_ + "'");
}

void write_sidecar(const std::string& out, const std::string& command, const nlohmann::json& config,
                   const nlohmann::json& extra) {
  nlohmann::json j = extra;
  j["command"] = command;
  j["config"] = config;
  const std::string path = out + ".json";
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << j.dump(2) << '\n';
  if (!f) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace dflab::cli
