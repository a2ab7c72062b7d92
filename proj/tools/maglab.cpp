//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file maglab.cpp
//! Command-line entry point: one subcommand per pipeline stage plus `run`.
//---------------------------------------------------------------------------//
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "maglab/scenario.hpp"

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("maglab");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("MAGLAB_LOG")) spdlog::cfg::helpers::load_levels(lvl);

  CLI::App app{"Numerical laboratory for magnetic flows on surfaces"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  int workers = 0;
  std::uint64_t seed = 0;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "Integrate trajectories from the seeds"},
      {"orbits", "Find closed orbits from the seeds"},
      {"classify", "Floquet classes and dominated-splitting products"},
      {"twist", "Birkhoff twist coefficient of elliptic orbits"},
      {"franks-verify", "Perturbation constants, response bound and surjectivity"},
      {"entropy", "Invariant manifolds, homoclinic crossings and an entropy bound"},
      {"critical-value", "Bracket for the strict critical value on the torus"},
      {"run", "Run every stage listed in the scenario"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (overrides the scenario)");
    sub->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Random seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  maglab::RunOverrides ov;
  const auto* sub = app.get_subcommands().front();
  if (sub->get_name() != "run") ov.stage = sub->get_name();
  if (!out.empty()) ov.output = out;
  if (sub->count("--workers")) ov.workers = workers;
  if (sub->count("--seed")) ov.seed = seed;

  const auto res = maglab::run_scenario_file(config, ov);
  if (res.exit_code != 0) std::cerr << "maglab: " << res.message << '\n';
  for (const auto& f : res.files) std::cout << f << '\n';
  return res.exit_code;
}
