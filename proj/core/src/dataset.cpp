// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "dflab/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dflab/error.hpp"

namespace dflab {

DiracDataset::DiracDataset(Matrix points) : points_(std::move(points)) {
  if (points_.cols() < 1 || points_.rows() < 1) {
    throw DomainError("dataset needs at least one point of dimension >= 1");
  }
  if (!points_.allFinite()) throw DomainError("dataset contains non-finite coordinates");
  sq_norms_ = points_.colwise().squaredNorm().transpose();
  max_norm_ = std::sqrt(sq_norms_.maxCoeff());
}

Vector DiracDataset::mean() const { return points_.rowwise().mean(); }

double DiracDataset::mean_variance() const {
  const Matrix centered = points_.colwise() - mean();
  return centered.squaredNorm() / static_cast<double>(points_.cols() * points_.rows());
}

GaussianInitial::GaussianInitial(Vector mean, Matrix cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  const auto d = mean_.size();
  if (d < 1 || cov_.rows() != d || cov_.cols() != d) {
    throw DomainError("gaussian mean/cov shape mismatch");
  }
  if (!mean_.allFinite() || !cov_.allFinite()) throw DomainError("gaussian has non-finite entries");
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw DomainError("gaussian covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw DomainError("gaussian covariance is not positive definite");
  }
}

GaussianInitial GaussianInitial::isotropic(Vector mean, double variance) {
  const auto d = mean.size();
  return GaussianInitial(std::move(mean), variance * Matrix::Identity(d, d));
}

DiracDataset affine_triple() {
  Matrix p(2, 3);
  p << 0.2, 0.2, 0.2,
      -0.4, 0.0, 0.9;
  return DiracDataset(p);
}

DiracDataset nonaffine_triple() {
  Matrix p(2, 3);
  p << 0.0, 0.0, 0.5,
       0.5, 0.0, 0.0;
  return DiracDataset(p);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DiracDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  int d = 0;
  {
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) {
      if (cell != "x" + std::to_string(d)) {
        throw ConfigError("dataset CSV header must be x0,x1,...; got '" + line + "'");
      }
      ++d;
    }
  }
  if (d == 0) throw ConfigError("dataset CSV header is empty");

  std::vector<double> values;
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    int cols = 0;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError("dataset CSV row " + std::to_string(rows + 1) + ": bad number '" + cell + "'");
      }
      ++cols;
    }
    if (cols != d) {
      throw ConfigError("dataset CSV row " + std::to_string(rows + 1) + " has " +
                        std::to_string(cols) + " columns, expected " + std::to_string(d));
    }
    ++rows;
  }
  if (rows == 0) throw ConfigError("dataset CSV has no rows");
  // Row-major file layout maps directly onto a column-major d x N matrix.
  Matrix points = Eigen::Map<const Matrix>(values.data(), d, rows);
  return DiracDataset(std::move(points));
}

DiracDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset '" + path + "'");
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const DiracDataset& ds) {
  for (int j = 0; j < ds.dim(); ++j) out << (j ? "," : "") << 'x' << j;
  out << '\n';
  for (int i = 0; i < ds.size(); ++i) {
    for (int j = 0; j < ds.dim(); ++j) out << (j ? "," : "") << format_double(ds.points()(j, i));
    out << '\n';
  }
}

void write_dataset_csv(const std::string& path, const DiracDataset& ds) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write dataset '" + path + "'");
  write_dataset_csv(out, ds);
}

GaussianInitial read_gaussian_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open gaussian file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto cov = j.at("cov").get<std::vector<std::vector<double>>>();
    const auto d = static_cast<Eigen::Index>(mean.size());
    Vector m = Eigen::Map<const Vector>(mean.data(), d);
    Matrix c(d, d);
    if (static_cast<Eigen::Index>(cov.size()) != d) throw ConfigError("gaussian cov has wrong row count");
    for (Eigen::Index r = 0; r < d; ++r) {
      if (static_cast<Eigen::Index>(cov[r].size()) != d) throw ConfigError("gaussian cov row has wrong length");
      for (Eigen::Index c2 = 0; c2 < d; ++c2) c(r, c2) = cov[r][c2];
    }
    return GaussianInitial(std::move(m), std::move(c));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed gaussian file '" + path + "': " + e.what());
  } catch (const DomainError& e) {
    throw ConfigError("invalid gaussian file '" + path + "': " + e.what());
  }
}

std::string gaussian_to_json(const GaussianInitial& g) {
  nlohmann::json j;
  j["mean"] = std::vector<double>(g.mean().data(), g.mean().data() + g.dim());
  std::vector<std::vector<double>> cov(static_cast<std::size_t>(g.dim()));
  for (int r = 0; r < g.dim(); ++r) {
    for (int c = 0; c < g.dim(); ++c) cov[static_cast<std::size_t>(r)].push_back(g.cov()(r, c));
  }
  j["cov"] = cov;
  return j.dump();
}

}  // namespace dflab
