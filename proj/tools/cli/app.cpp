// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "app.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "dflab/error.hpp"

namespace dflab::cli {

namespace {

// Values of flags given on the command line; unset flags leave the config alone.
struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out, schedule, data, trace_method, op, net;
  int steps = 0, m = 0, n_traj = 0, n = 0;
  bool transpose_variant = false;
};

struct Command {
  const char* name;
  const char* help;
  std::function<int(const json&)> fn;
  std::vector<std::string> flags;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> list = {
      {"gen-data", "write a dataset CSV (or a Gaussian JSON for n = 0)", cmd_gen_data, {"data", "n"}},
      {"fisher-check", "oracle versus finite-difference checks", cmd_fisher_check, {"schedule", "data"}},
      {"trace-bench", "Fisher trace methods against the oracle", cmd_trace_bench, {"schedule", "data"}},
      {"nll", "per-sample NLL and BPD", cmd_nll, {"schedule", "data", "steps", "trace-method"}},
      {"adjoint-sim", "adjoint-guided sampling per operator", cmd_adjoint_sim,
       {"schedule", "data", "steps", "op", "n-traj"}},
      {"ot-test", "fundamental-matrix OT test", cmd_ot_test,
       {"schedule", "data", "m", "n-traj", "transpose-variant"}},
      {"train", "train an eps or tm network", cmd_train, {"schedule", "data", "n", "net"}},
  };
  return list;
}

void add_flags(CLI::App& sub, const Command& cmd, Flags& f) {
  sub.add_option("--config", f.config, "JSON config file");
  sub.add_option("--seed", f.seed, "random seed");
  sub.add_option("--out", f.out, "output path");
  for (const std::string& name : cmd.flags) {
    if (name == "schedule") sub.add_option("--schedule", f.schedule, "ve|vp|subvp|edm");
    if (name == "data") sub.add_option("--data", f.data, "path.csv|chessboard|affine3|nonaffine3|gaussian");
    if (name == "steps") sub.add_option("--steps", f.steps, "Euler steps");
    if (name == "trace-method") sub.add_option("--trace-method", f.trace_method, "exact|df-tm|vjp|hutchinson");
    if (name == "op") sub.add_option("--op", f.op, "exact|vjp|df-ea");
    if (name == "transpose-variant") sub.add_flag("--transpose-variant", f.transpose_variant, "use A' = A^T B");
    if (name == "m") sub.add_option("--m", f.m, "fundamental-matrix steps");
    if (name == "n-traj") sub.add_option("--n-traj", f.n_traj, "number of trajectories");
    if (name == "n") sub.add_option("--n", f.n, "number of data points");
    if (name == "net") sub.add_option("--net", f.net, "eps|tm");
  }
}

json resolve(const std::string& command, const CLI::App& sub, const Flags& f) {
  json cfg = command_defaults(command);
  if (sub.count("--config")) merge_checked(cfg, load_config_file(f.config));
  const auto given = [&](const char* flag) { return sub.get_options([&](const CLI::Option* o) {
                                                   return o->check_lname(flag + 2) && o->count() > 0;
                                                 }).size() > 0; };
  if (given("--seed")) cfg["seed"] = f.seed;
  if (given("--out")) cfg["out"] = f.out;
  if (given("--schedule")) cfg["schedule"]["kind"] = f.schedule;
  if (given("--data")) cfg["data"] = f.data;
  if (given("--steps")) cfg["steps"] = f.steps;
  if (given("--trace-method")) cfg["trace_method"] = f.trace_method;
  if (given("--op")) cfg["op"] = f.op;
  if (given("--transpose-variant")) cfg["transpose_variant"] = true;
  if (given("--m")) cfg["m"] = f.m;
  if (given("--n-traj")) cfg["n_traj"] = f.n_traj;
  if (given("--n")) cfg["n"] = f.n;
  if (given("--net")) cfg["net"] = f.net;
  return cfg;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"df_lab: diffusion Fisher experiments"};
  app.require_subcommand(1, 1);
  Flags flags;
  std::map<std::string, CLI::App*> subs;
  for (const Command& c : commands()) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_flags(*sub, c, flags);
    subs[c.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "df_lab: " << e.what() << '\n';
    return kConfigError;
  }

  for (const Command& c : commands()) {
    CLI::App* sub = subs[c.name];
    if (!sub->parsed()) continue;
    try {
      const json cfg = resolve(c.name, *sub, flags);
      const int code = c.fn(cfg);
      if (code == kCheckFailed) err << "df_lab " << c.name << ": checks failed\n";
      return code;
    } catch (const NumericalError& e) {
      err << "df_lab " << c.name << ": numerical error: " << e.what() << '\n';
      return kNumericalError;
    } catch (const ConfigError& e) {
      err << "df_lab " << c.name << ": config error: " << e.what() << '\n';
      return kConfigError;
    } catch (const DomainError& e) {
      err << "df_lab " << c.name << ": invalid input: " << e.what() << '\n';
      return kConfigError;
    } catch (const nlohmann::json::exception& e) {
      err << "df_lab " << c.name << ": config error: " << e.what() << '\n';
      return kConfigError;
    } catch (const std::exception& e) {
      err << "df_lab " << c.name << ": " << e.what() << '\n';
      return kCheckFailed;
    }
  }
  return kConfigError;
}

}  // namespace dflab::cli
