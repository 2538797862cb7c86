// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

namespace dflab {

/// Worker count: DF_LAB_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int thread_budget();

/// Runs fn(i) for i in [0, n) on up to thread_budget() threads. Indices are
/// handed out in contiguous blocks; the first exception thrown is rethrown
/// after all workers join.
void parallel_for(int n, const std::function<void(int)>& fn);

/// Stateless SplitMix64 mixing of (seed, stream) for per-task RNG seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace dflab
