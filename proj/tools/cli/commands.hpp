// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "config.hpp"

namespace dflab::cli {

/// Each command takes the fully resolved config and returns the process exit
/// code (0 on success, 1 when an internal check fails).
int cmd_gen_data(const json& cfg);
int cmd_fisher_check(const json& cfg);
int cmd_trace_bench(const json& cfg);
int cmd_nll(const json& cfg);
int cmd_adjoint_sim(const json& cfg);
int cmd_ot_test(const json& cfg);
int cmd_train(const json& cfg);

}  // namespace dflab::cli
