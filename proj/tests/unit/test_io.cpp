//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "maglab/errors.hpp"
#include "maglab/scenario.hpp"

using namespace maglab;
namespace fs = std::filesystem;

namespace {

Json base_config() {
  return Json::parse(R"({
    "name": "t",
    "surface": {"kind": "torus", "params": {"lx": 1.0}},
    "field": {"kind": "constant", "params": {"value": 0.0}},
    "energy": 0.5,
    "seeds": [{"chart": 0, "pos": [0.1, 0.2], "vel": [1.0, 0.0]}],
    "stages": [{"stage": "orbits"}]
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("maglab_test_io_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("scenario parsing") {
  const Scenario s = parse_scenario(base_config());
  CHECK(s.surface.topology() == Topology::Torus);
  CHECK(s.seeds.size() == 1);
  CHECK(s.output == "out/t");
  CHECK(s.workers == 1);

  auto broken = [](auto edit) {
    Json j = base_config();
    edit(j);
    return j;
  };
  CHECK_THROWS_AS(parse_scenario(broken([](Json& j) { j["extra"] = 1; })), ValidationError);
  CHECK_THROWS_AS(parse_scenario(broken([](Json& j) { j["surface"]["params"]["lz"] = 1; })), ValidationError);
  CHECK_THROWS_AS(parse_scenario(broken([](Json& j) { j["field"]["kind"] = "dipole"; })), ValidationError);
  CHECK_THROWS_AS(parse_scenario(broken([](Json& j) { j["energy"] = 0.0; })), ValidationError);
  CHECK_THROWS_AS(parse_scenario(broken([](Json& j) { j["energy"] = "half"; })), ValidationError);
  CHECK_THROWS_AS(parse_scenario(broken([](Json& j) { j["seeds"][0]["pos"] = {1.0}; })), ValidationError);
  CHECK_THROWS_AS(parse_scenario(broken([](Json& j) { j["stages"][0]["stage"] = "plot"; })), ValidationError);
  CHECK_THROWS_AS(parse_scenario(broken([](Json& j) { j["stages"][0]["params"] = {{"tolerance", 1}}; })),
                  ValidationError);
  CHECK_THROWS_AS(parse_scenario(broken([](Json& j) { j["integrator"] = {{"order", 5}}; })), ValidationError);
  CHECK_THROWS_AS(parse_scenario(broken([](Json& j) { j["workers"] = 0; })), ValidationError);
  CHECK_THROWS_AS(parse_scenario(broken([](Json& j) {
                    j["surface"] = {{"kind", "sphere"}};
                    j["field"] = {{"kind", "sinusoidal"}, {"params", {{"modes", Json::array()}}}};
                  })),
                  Error);
}

TEST_CASE("round-trip number formatting") {
  const double x = 0.1 + 0.2;
  const Json j = to_json(Vec2{x, 1.0 / 3.0});
  const Json back = Json::parse(j.dump());
  CHECK(back[0].get<double>() == x);
  CHECK(back[1].get<double>() == 1.0 / 3.0);
}

TEST_CASE("trajectory CSV on the disk example") {
  const Surface disk = Surface::planar(3.0, pi);
  const auto tr = flow(disk, MagneticField::constant(-1.0), {0, {-1, 0}, {1, 0}}, two_pi);
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  write_trajectory_csv((dir / "t.csv").string(), disk, {&tr}, 0.1);
  const auto ls = lines(dir / "t.csv");
  REQUIRE(ls.size() > 10);
  CHECK(ls[0] == "t,x,y,vx,vy,E");
  for (std::size_t i = 1; i < ls.size(); ++i) {
    std::stringstream ss(ls[i]);
    std::vector<double> v;
    for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
    REQUIRE(v.size() == 6);
    CHECK(std::abs(v[5] - 0.5) <= 1e-9);
  }
  write_trajectory_csv((dir / "empty.csv").string(), disk, {}, 0.1);
  CHECK(slurp(dir / "empty.csv") == "t,x,y,vx,vy,E\n");
  write_manifold_csv((dir / "m.csv").string(), {});
  CHECK(slurp(dir / "m.csv") == "s,y,ydot,side\n");
  write_fit_csv((dir / "f.csv").string(), TwistFit{});
  CHECK(slurp(dir / "f.csv") == "r,rho\n");
}

TEST_CASE("manifold CSV arclength is monotone") {
  const StandardMap m(1.5);
  const auto p = hyperbolic_fixed_point(m, {0, 0});
  GrowOptions go;
  go.max_arclength = 2.0;
  const auto br = grow_manifold(m, p, Side::Unstable, 1, go);
  const fs::path dir = scratch("manifold");
  fs::create_directories(dir);
  write_manifold_csv((dir / "m.csv").string(), {&br});
  const auto ls = lines(dir / "m.csv");
  REQUIRE(ls.size() == br.points.size() + 1);
  double prev = -1.0;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const double s = std::stod(ls[i].substr(0, ls[i].find(',')));
    CHECK(s > prev);
    prev = s;
    CHECK(ls[i].substr(ls[i].rfind(',') + 1) == "unstable");
  }
}

TEST_CASE("run exit codes and determinism") {
  SUBCASE("ok") {
    Scenario s = parse_scenario(base_config());
    const fs::path dir = scratch("ok");
    s.output = dir.string();
    const auto r = run_scenario(s);
    CHECK(r.exit_code == 0);
    const Json orbits = read_json((dir / "orbits.json").string());
    CHECK(orbits["count"] == 1);
    const Json& o = orbits["orbits"][0];
    CHECK(o["class"] == "Parabolic");
    CHECK(o["rotation_vector"]["class"] == Json::array({1, 0}));
    const std::string first = slurp(dir / "orbits.json");
    run_scenario(s);
    CHECK(slurp(dir / "orbits.json") == first);
  }
  SUBCASE("empty orbit database gives a header-only CSV") {
    Json j = base_config();
    j["seeds"] = Json::array();
    Scenario s = parse_scenario(j);
    const fs::path dir = scratch("empty");
    s.output = dir.string();
    CHECK(run_scenario(s).exit_code == 0);
    CHECK(slurp(dir / "orbit_trajectories.csv") == "t,x,y,vx,vy,E\n");
  }
  SUBCASE("numerical failure keeps partial reports") {
    // Zero field on a disk: the straight line leaves the chart and never returns.
    Json j = base_config();
    j["surface"] = {{"kind", "planar"}, {"params", {{"domain_radius", 3.0}, {"injectivity_radius", 1.0}}}};
    j["seeds"][0]["pos"] = {0.0, 0.0};
    j["stages"] = {{{"stage", "simulate"}, {"params", {{"t_final", 1.0}}}},
                   {{"stage", "orbits"}, {"params", {{"max_time", 5.0}}}}};
    Scenario s = parse_scenario(j);
    const fs::path dir = scratch("fail");
    s.output = dir.string();
    const auto r = run_scenario(s);
    CHECK(r.exit_code == 3);
    CHECK(fs::exists(dir / "simulate.json"));
    CHECK(fs::exists(dir / "orbits.json"));
    const Json sum = read_json((dir / "summary.json").string());
    CHECK(sum["stages"][1]["status"] == "numerical-failure");
  }
  SUBCASE("validation error") {
    Json j = base_config();
    j["stages"] = {{{"stage", "franks-verify"}, {"params", {{"orbit", 4}}}}};
    Scenario s = parse_scenario(j);
    s.output = scratch("bad").string();
    CHECK(run_scenario(s).exit_code == 2);
    CHECK(run_scenario_file("/nonexistent/config.json").exit_code == 2);
  }
  SUBCASE("stage override pulls in the orbit search") {
    Json j = base_config();
    j["stages"] = {{{"stage", "classify"}}};
    Scenario s = parse_scenario(j);
    const fs::path dir = scratch("dep");
    s.output = dir.string();
    RunOverrides ov;
    ov.stage = "classify";
    const auto r = run_scenario(s, ov);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "orbits.json"));
    CHECK(fs::exists(dir / "classify.json"));
  }
}
