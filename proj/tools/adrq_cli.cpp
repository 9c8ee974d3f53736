// Copyright 2026 The adrq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adrq/experiments.hpp"

namespace {

using adrq::ConfigError;
using adrq::KeyValueConfig;
namespace ex = adrq::experiments;

using Runner = std::function<ex::Outcome(const ex::ExperimentConfig &, const std::filesystem::path &)>;

struct Options {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
};

int run(const std::string &name, const Runner &runner, const Options &opt) {
  try {
    KeyValueConfig kv = opt.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(opt.config);
    for (const auto &o : opt.overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + o + "'");
      kv.set(adrq::detail::trim(o.substr(0, eq)), adrq::detail::trim(o.substr(eq + 1)));
    }
    if (kv.has("experiment")) {
      const std::string declared = kv.get_string("experiment", name);
      if (declared != name)
        throw ConfigError("config declares experiment '" + declared + "' but subcommand is '" +
                          name + "'");
    } else {
      kv.set("experiment", name);
    }
    const ex::ExperimentConfig cfg = ex::ExperimentConfig::from(kv);
    const std::filesystem::path out = opt.out.empty() ? cfg.out_dir : opt.out;
    const ex::Outcome res = runner(cfg, out);
    for (const auto &f : res.files)
      std::cout << "wrote " << f.string() << "\n";
    for (const auto &m : res.messages)
      std::cerr << name << ": " << m << "\n";
    return res.status;
  } catch (const ConfigError &e) {
    std::cerr << name << ": invalid configuration: " << e.what() << "\n";
    return ex::kInvalidConfig;
  } catch (const std::invalid_argument &e) {
    std::cerr << name << ": invalid configuration: " << e.what() << "\n";
    return ex::kInvalidConfig;
  } catch (const std::exception &e) {
    std::cerr << name << ": error: " << e.what() << "\n";
    return ex::kToleranceFailure;
  }
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Carleman linearisation and block-encoding studies for the 1D ADR equation"};
  app.require_subcommand(1);

  const std::map<std::string, std::pair<std::string, Runner>> commands = {
      {"convergence", {"Euler vs truncated Carleman trajectories over K", ex::run_convergence}},
      {"pauli", {"Pauli decomposition and truncation scaling", ex::run_pauli_scaling}},
      {"p0scan", {"Success probability of the L block encoding over a Courant grid", ex::run_p0_scan}},
      {"beverify", {"Simulate the block-encoding circuits against direct products", ex::run_be_verify}},
  };

  std::map<std::string, Options> options;
  for (const auto &[name, entry] : commands) {
    Options &opt = options[name];
    CLI::App *sub = app.add_subcommand(name, entry.first);
    sub->add_option("-c,--config", opt.config, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", opt.out, "output directory (overrides output.dir)");
    sub->add_option("-s,--set", opt.overrides, "override a config key, key=value (repeatable)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ex::kInvalidConfig;
  }

  for (const auto &[name, entry] : commands)
    if (app.got_subcommand(name))
      return run(name, entry.second, options[name]);
  return ex::kInvalidConfig;
}
