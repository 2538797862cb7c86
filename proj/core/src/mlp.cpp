// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "dflab/mlp.hpp"

#include <cmath>
#include <random>

#include "dflab/error.hpp"

namespace dflab {

double silu(double z) { return z / (1.0 + std::exp(-z)); }

double silu_derivative(double z) {
  const double s = 1.0 / (1.0 + std::exp(-z));
  return s * (1.0 + z * (1.0 - s));
}

MLP::MLP(std::vector<int> widths, std::uint64_t seed) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw DomainError("MLP needs at least input and output widths");
  for (int w : widths_) {
    if (w < 1) throw DomainError("MLP widths must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const int in = widths_[l];
    const int out = widths_[l + 1];
    const double sd = 1.0 / std::sqrt(static_cast<double>(in));
    Matrix W(out, in);
    for (int j = 0; j < in; ++j) {
      for (int i = 0; i < out; ++i) W(i, j) = sd * normal(rng);
    }
    W_.push_back(std::move(W));
    b_.push_back(Vector::Zero(out));
  }
}

std::size_t MLP::n_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < W_.size(); ++l) n += W_[l].size() + b_[l].size();
  return n;
}

Matrix MLP::forward(const Matrix& X) const {
  if (X.rows() != input_dim()) throw DomainError("MLP::forward: input width mismatch");
  Matrix h = X;
  const int L = n_layers();
  for (int l = 0; l < L; ++l) {
    Matrix z = (W_[l] * h).colwise() + b_[l];
    h = (l + 1 < L) ? Matrix(z.unaryExpr([](double v) { return silu(v); })) : std::move(z);
  }
  return h;
}

Matrix MLP::forward(const Matrix& X, Cache& cache) const {
  if (X.rows() != input_dim()) throw DomainError("MLP::forward: input width mismatch");
  const int L = n_layers();
  cache.pre.assign(L, Matrix());
  cache.act.assign(L + 1, Matrix());
  cache.act[0] = X;
  for (int l = 0; l < L; ++l) {
    cache.pre[l] = (W_[l] * cache.act[l]).colwise() + b_[l];
    cache.act[l + 1] = (l + 1 < L) ? Matrix(cache.pre[l].unaryExpr([](double v) { return silu(v); }))
                                   : cache.pre[l];
  }
  return cache.act[L];
}

Vector MLP::forward(const Vector& x) const { return forward(Matrix(x)).col(0); }

MLP::Gradients MLP::backward(const Cache& cache, const Matrix& G) const {
  const int L = n_layers();
  Gradients g;
  g.dW.resize(L);
  g.db.resize(L);
  Matrix delta = G;  // d loss / d pre-activation of the current layer
  for (int l = L - 1; l >= 0; --l) {
    g.dW[l] = delta * cache.act[l].transpose();
    g.db[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = (W_[l].transpose() * delta)
                  .cwiseProduct(cache.pre[l - 1].unaryExpr([](double v) { return silu_derivative(v); }));
    }
  }
  return g;
}

Matrix MLP::input_jacobian(const Vector& x) const {
  Cache cache;
  forward(Matrix(x), cache);
  const int L = n_layers();
  Matrix J = W_[L - 1];
  for (int l = L - 2; l >= 0; --l) {
    const Vector dact = cache.pre[l].col(0).unaryExpr([](double v) { return silu_derivative(v); });
    J = (J * dact.asDiagonal()) * W_[l];
  }
  return J;
}

std::vector<double> MLP::flat_params() const {
  std::vector<double> p;
  p.reserve(n_params());
  for (std::size_t l = 0; l < W_.size(); ++l) {
    p.insert(p.end(), W_[l].data(), W_[l].data() + W_[l].size());
    p.insert(p.end(), b_[l].data(), b_[l].data() + b_[l].size());
  }
  return p;
}

void MLP::set_flat_params(const std::vector<double>& p) {
  if (p.size() != n_params()) throw DomainError("MLP::set_flat_params: size mismatch");
  std::size_t k = 0;
  for (std::size_t l = 0; l < W_.size(); ++l) {
    std::copy(p.begin() + k, p.begin() + k + W_[l].size(), W_[l].data());
    k += W_[l].size();
    std::copy(p.begin() + k, p.begin() + k + b_[l].size(), b_[l].data());
    k += b_[l].size();
  }
}

MLP::Gradients MLP::zero_gradients() const {
  Gradients g;
  for (std::size_t l = 0; l < W_.size(); ++l) {
    g.dW.push_back(Matrix::Zero(W_[l].rows(), W_[l].cols()));
    g.db.push_back(Vector::Zero(b_[l].size()));
  }
  return g;
}

bool MLP::all_finite() const {
  for (std::size_t l = 0; l < W_.size(); ++l) {
    if (!W_[l].allFinite() || !b_[l].allFinite()) return false;
  }
  return true;
}

AdamW::AdamW(const MLP& net, Options opt)
    : opt_(opt), m_(net.zero_gradients()), v_(net.zero_gradients()) {
  if (!(opt_.lr > 0.0) || opt_.weight_decay < 0.0) throw ConfigError("AdamW: invalid options");
}

void AdamW::step(MLP& net, const MLP::Gradients& g) {
  ++t_;
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = opt_.beta1 * m + (1.0 - opt_.beta1) * grad;
    v = opt_.beta2 * v + (1.0 - opt_.beta2) * grad.cwiseProduct(grad);
    auto denom = ((v / c2).array().sqrt() + opt_.eps).matrix();
    param -= opt_.lr * ((m / c1).cwiseQuotient(denom) + opt_.weight_decay * param);
  };
  for (int l = 0; l < net.n_layers(); ++l) {
    update(net.weight(l), g.dW[l], m_.dW[l], v_.dW[l]);
    update(net.bias(l), g.db[l], m_.db[l], v_.db[l]);
  }
}

}  // namespace dflab
