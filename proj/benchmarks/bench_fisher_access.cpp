// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

// Cost of the Fisher access paths: trace estimators and Fisher-vector products.
// The range argument is the number of points in the chessboard dataset.

#include <benchmark/benchmark.h>

#include <memory>

#include "dflab/dirac_oracle.hpp"
#include "dflab/fisher_access.hpp"
#include "dflab/ode.hpp"
#include "dflab/providers.hpp"
#include "dflab/training.hpp"

namespace {

using namespace dflab;

constexpr double kT = 0.5;

struct Fixture {
  NoiseSchedule sched = NoiseSchedule::ve();
  std::unique_ptr<DiracProvider> oracle;
  Vector x;
  Vector lambda;

  explicit Fixture(int n) {
    oracle = std::make_unique<DiracProvider>(gen_chessboard(n, 1), sched);
    x = sched.alpha(kT) * Vector(oracle->dataset().point(0));
    x(0) += 0.7 * sched.sigma(kT);
    x(1) -= 0.4 * sched.sigma(kT);
    lambda = Vector::Ones(2);
  }
};

// A small untrained eps-net stands in for a learned model on the network paths.
const EpsNetProvider& small_net() {
  static const EpsNetProvider net = [] {
    TrainConfig cfg;
    cfg.n_steps = 1;
    cfg.batch_size = 8;
    cfg.hidden = {64, 64, 64};
    return EpsNetProvider(train_eps(gen_chessboard(64, 1), NoiseSchedule::ve(), cfg).net);
  }();
  return net;
}

void BM_TraceExact(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(f.oracle->fisher_trace(f.x, kT));
}

void BM_TraceDfTm(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(df_tm_trace(*f.oracle, *f.oracle, f.sched, f.x, kT));
}

void BM_TraceVjpOracle(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    benchmark::DoNotOptimize(trace_via_vjp(*f.oracle, f.x, kT, JacobianPath::FiniteDifference));
  }
}

void BM_TraceHutchinsonOracle(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    benchmark::DoNotOptimize(trace_hutchinson(*f.oracle, f.x, kT, 1, 7, JacobianPath::FiniteDifference));
  }
}

void BM_TraceVjpNet(benchmark::State& st) {
  const EpsNetProvider& net = small_net();
  const Vector x = Vector::Constant(2, 0.3);
  for (auto _ : st) benchmark::DoNotOptimize(trace_via_vjp(net, x, kT));
}

void BM_FisherMatrixApply(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(Vector(f.oracle->fisher(f.x, kT).matrix * f.lambda));
}

void BM_VjpApplyOracle(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    benchmark::DoNotOptimize(vjp_apply(*f.oracle, f.x, kT, f.lambda, JacobianPath::FiniteDifference));
  }
}

void BM_DfEaApply(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)));
  const Vector x0 = f.oracle->dataset().point(0);
  const Vector yhat = f.oracle->y_prediction(f.x, kT);
  for (auto _ : st) benchmark::DoNotOptimize(df_ea_apply(x0, yhat, f.lambda, f.sched, kT));
}

void BM_PfOdeSolve(benchmark::State& st) {
  const Fixture f(static_cast<int>(st.range(0)));
  const Vector x_T = Vector::Constant(2, 20.0);
  for (auto _ : st) benchmark::DoNotOptimize(pf_ode_solve(*f.oracle, x_T, 100).endpoint());
}

#define DFLAB_SIZES ->Arg(3)->Arg(100)->Arg(1000)->Arg(5000)

BENCHMARK(BM_TraceExact) DFLAB_SIZES;
BENCHMARK(BM_TraceDfTm) DFLAB_SIZES;
BENCHMARK(BM_TraceVjpOracle) DFLAB_SIZES;
BENCHMARK(BM_TraceHutchinsonOracle) DFLAB_SIZES;
BENCHMARK(BM_TraceVjpNet);
BENCHMARK(BM_FisherMatrixApply) DFLAB_SIZES;
BENCHMARK(BM_VjpApplyOracle) DFLAB_SIZES;
BENCHMARK(BM_DfEaApply) DFLAB_SIZES;
BENCHMARK(BM_PfOdeSolve)->Arg(3)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
