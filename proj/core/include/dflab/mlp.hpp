// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "dflab/types.hpp"

namespace dflab {

/// Fully connected network with SiLU hidden activations and a linear output
/// layer. Batches are stored column-wise (features x batch).
class MLP {
 public:
  struct Cache {
    std::vector<Matrix> pre;  // pre-activations per layer
    std::vector<Matrix> act;  // act[0] = input, act[l+1] = output of layer l
  };

  struct Gradients {
    std::vector<Matrix> dW;
    std::vector<Vector> db;
  };

  MLP() = default;
  /// widths = {in, hidden..., out}; weights ~ N(0, 1/fan_in), biases zero.
  MLP(std::vector<int> widths, std::uint64_t seed);

  const std::vector<int>& widths() const noexcept { return widths_; }
  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  int n_layers() const { return static_cast<int>(W_.size()); }
  std::size_t n_params() const;

  Matrix& weight(int l) { return W_[l]; }
  const Matrix& weight(int l) const { return W_[l]; }
  Vector& bias(int l) { return b_[l]; }
  const Vector& bias(int l) const { return b_[l]; }

  Matrix forward(const Matrix& X) const;
  Matrix forward(const Matrix& X, Cache& cache) const;
  Vector forward(const Vector& x) const;

  /// Gradients of sum_j <G(:, j), out(:, j)> with respect to all parameters.
  Gradients backward(const Cache& cache, const Matrix& G) const;

  /// d out / d input at a single input (output_dim x input_dim).
  Matrix input_jacobian(const Vector& x) const;

  std::vector<double> flat_params() const;
  void set_flat_params(const std::vector<double>& p);
  Gradients zero_gradients() const;

  bool all_finite() const;

 private:
  std::vector<int> widths_;
  std::vector<Matrix> W_;
  std::vector<Vector> b_;
};

double silu(double z);
double silu_derivative(double z);

/// Adam with decoupled weight decay.
class AdamW {
 public:
  struct Options {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
  };

  AdamW(const MLP& net, Options opt);
  void step(MLP& net, const MLP::Gradients& g);
  long long steps_taken() const noexcept { return t_; }

 private:
  Options opt_;
  long long t_ = 0;
  MLP::Gradients m_;
  MLP::Gradients v_;
};

}  // namespace dflab
