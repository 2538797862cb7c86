// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "dflab/dataset.hpp"
#include "dflab/error.hpp"

namespace dflab {
namespace {

TEST(Dataset, CachesNormsAndBound) {
  Matrix p(2, 3);
  p << 3, 0, -1, 4, 0, 0;
  const DiracDataset ds(p);
  EXPECT_EQ(ds.dim(), 2);
  EXPECT_EQ(ds.size(), 3);
  EXPECT_DOUBLE_EQ(ds.max_norm(), 5.0);
  EXPECT_DOUBLE_EQ(ds.squared_norms()(0), 25.0);
  EXPECT_NEAR(ds.mean()(0), 2.0 / 3.0, 1e-15);
}

TEST(Dataset, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(DiracDataset(Matrix(2, 0)), DomainError);
  Matrix p(1, 1);
  p << std::nan("");
  EXPECT_THROW(DiracDataset{p}, DomainError);
}

TEST(Dataset, FixedTriples) {
  const auto a = affine_triple();
  const auto n = nonaffine_triple();
  ASSERT_EQ(a.size(), 3);
  ASSERT_EQ(n.size(), 3);
  EXPECT_EQ(a.point(0)(0), 0.2);
  EXPECT_EQ(a.point(0)(1), -0.4);
  EXPECT_EQ(a.point(2)(1), 0.9);
  EXPECT_EQ(n.point(0)(1), 0.5);
  EXPECT_EQ(n.point(1).norm(), 0.0);
  EXPECT_EQ(n.point(2)(0), 0.5);
}

TEST(Dataset, CsvRoundTripIsExact) {
  Matrix p(2, 2);
  p << 0.1, 1.0 / 3.0, -2.5e-17, 7.0;
  std::stringstream ss;
  write_dataset_csv(ss, DiracDataset(p));
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, 6), "x0,x1\n");
  const DiracDataset back = read_dataset_csv(ss);
  EXPECT_EQ(back.points(), p);
}

TEST(Dataset, CsvErrors) {
  std::stringstream bad_header("a,b\n1,2\n");
  EXPECT_THROW(read_dataset_csv(bad_header), ConfigError);
  std::stringstream ragged("x0,x1\n1,2\n3\n");
  EXPECT_THROW(read_dataset_csv(ragged), ConfigError);
  std::stringstream junk("x0\nabc\n");
  EXPECT_THROW(read_dataset_csv(junk), ConfigError);
  std::stringstream empty("");
  EXPECT_THROW(read_dataset_csv(empty), ConfigError);
  EXPECT_THROW(read_dataset_csv(std::string("/nonexistent/file.csv")), ConfigError);
}

TEST(Gaussian, Validation) {
  Matrix asym(2, 2);
  asym << 1, 0.5, 0.4, 1;
  EXPECT_THROW(GaussianInitial(Vector::Zero(2), asym), DomainError);
  Matrix indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  EXPECT_THROW(GaussianInitial(Vector::Zero(2), indefinite), DomainError);
  EXPECT_THROW(GaussianInitial(Vector::Zero(3), Matrix::Identity(2, 2)), DomainError);
  EXPECT_NO_THROW(GaussianInitial::isotropic(Vector::Constant(2, 0.5)));
}

TEST(Gaussian, JsonRoundTrip) {
  Matrix c(2, 2);
  c << 1.0, 0.3, 0.3, 0.5;
  const GaussianInitial g(Vector::Constant(2, 0.5), c);
  const auto path = std::filesystem::temp_directory_path() / "dflab_gauss_roundtrip.json";
  {
    std::ofstream out(path);
    out << gaussian_to_json(g);
  }
  const GaussianInitial back = read_gaussian_json(path.string());
  EXPECT_EQ(back.mean(), g.mean());
  EXPECT_EQ(back.cov(), g.cov());
  std::filesystem::remove(path);
}

TEST(Format, SeventeenDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

}  // namespace
}  // namespace dflab
