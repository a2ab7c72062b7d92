//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file scenario.hpp
//! Scenario configs and the stage pipeline behind the command-line tool.
//!
//! A scenario is a JSON object (unknown keys are rejected at every level):
//!
//!   {
//!     "name": "disk",
//!     "surface": {"kind": "planar", "params": {...}},
//!     "field": {"kind": "constant", "params": {"value": -1}},
//!     "energy": 0.5,
//!     "seeds": [{"chart": 0, "pos": [-1, 0], "vel": [1, 0], "period_guess": 6.28}],
//!     "integrator": {"rel_tol": 1e-11, "abs_tol": 1e-12, "max_step": 0.05},
//!     "stages": [{"stage": "orbits", "params": {...}}, ...],
//!     "output": "out/disk",
//!     "seed": 1,
//!     "workers": 1
//!   }
//!
//! Stage names: simulate, orbits, classify, twist, franks-verify, entropy,
//! critical-value. Every stage writes <stage>.json into the output
//! directory; summary.json lists the stages run and their outcome.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "maglab/io.hpp"

namespace maglab {

struct SeedSpec {
  PhasePoint state;
  std::optional<double> period_guess;
};

struct StageSpec {
  std::string stage;
  Json params = Json::object();
};

struct Scenario {
  std::string name;
  Surface surface = Surface::torus();
  MagneticField field = MagneticField::constant(0.0);
  double energy = 0.5;
  std::vector<SeedSpec> seeds;
  FlowOptions integrator;
  std::vector<StageSpec> stages;
  std::string output;
  std::uint64_t seed = 1;
  int workers = 1;
};

//! Known stage names in pipeline order.
const std::vector<std::string>& stage_names();

//! Throws ValidationError on any schema violation, including unknown stage
//! parameters.
Scenario parse_scenario(const Json& j);
Scenario load_scenario(const std::string& path);

struct RunOverrides {
  std::optional<std::string> output;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  //! Run only this stage (plus the orbit search when it needs orbits).
  std::optional<std::string> stage;
};

struct RunResult {
  int exit_code = 0;  //!< 0 ok, 2 validation, 3 numerical failure
  std::string message;
  std::vector<std::string> files;  //!< written, relative to the output directory
};

RunResult run_scenario(Scenario scenario, const RunOverrides& overrides = {});
//! Load and run; config errors map to exit code 2.
RunResult run_scenario_file(const std::string& path, const RunOverrides& overrides = {});

}  // namespace maglab
