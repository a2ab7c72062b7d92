//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
#include "maglab/scenario.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>

#include "maglab/parallel.hpp"

namespace maglab {

namespace fs = std::filesystem;

namespace {

// Allowed parameter keys per stage.
const std::map<std::string, std::vector<const char*>>& stage_keys() {
  static const std::map<std::string, std::vector<const char*>> keys{
      {"simulate", {"t_final", "csv_dt"}},
      {"orbits", {"tol", "half_width", "max_time", "class_tol", "max_iters", "csv_dt"}},
      {"classify", {"class_tol", "splitting"}},
      {"twist", {"radii", "iterates", "escape_radius", "half_width", "fd_fraction", "injected"}},
      {"franks-verify",
       {"orbit", "start", "duration", "cota_samples", "targets", "target_fraction", "c1_radius",
        "chart_width"}},
      {"entropy",
       {"map", "fixed_point", "target_point", "unstable_sign", "stable_sign", "max_arclength",
        "grow_tol", "max_segment", "angle_tol", "k_max", "neighbourhood", "boxes", "k"}},
      {"critical-value",
       {"k_lo", "k_hi", "tol", "closed", "modes", "restarts", "max_evals", "nodes", "step"}},
  };
  return keys;
}

void check_params(const std::string& stage, const Json& p) {
  const std::string where = "stages." + stage + ".params";
  if (!p.is_object()) throw ValidationError(where + ": expected an object");
  const auto& allowed = stage_keys().at(stage);
  for (const auto& item : p.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; }))
      throw ValidationError(where + ": unknown key '" + item.key() + "'");
}

bool needs_orbits(const std::string& stage, const Json& params) {
  if (stage == "classify" || stage == "twist") return true;
  if (stage == "franks-verify") return !params.contains("start");
  if (stage == "entropy") return params.contains("map") && params["map"].value("type", "") == "return";
  return false;
}

double max_det_error(const VariationalPath& v, const std::vector<double>& grid) {
  double e = 0.0;
  for (double t : grid) e = std::max(e, std::abs(v.X(t).det() - 1.0));
  return e;
}

// Rounding alone puts |det X - 1| near eps |X|^2, so this is reported too.
double max_X_norm(const VariationalPath& v, const std::vector<double>& grid) {
  double n = 0.0;
  for (double t : grid) n = std::max(n, frobenius(v.X(t)));
  return n;
}

class Runner {
 public:
  Runner(const Scenario& s, fs::path out) : s_(s), out_(std::move(out)) {}

  void run(const StageSpec& st) {
    spdlog::info("stage {}", st.stage);
    const Json& p = st.params;
    if (st.stage == "simulate") simulate(p);
    else if (st.stage == "orbits") orbits(p);
    else if (st.stage == "classify") classify_stage(p);
    else if (st.stage == "twist") twist(p);
    else if (st.stage == "franks-verify") franks(p);
    else if (st.stage == "entropy") entropy(p);
    else if (st.stage == "critical-value") critical(p);
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  void emit(const std::string& name, const Json& j) {
    write_json((out_ / name).string(), j);
    record(name);
  }
  void record(const std::string& name) {
    if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
  }
  std::string path(const std::string& name) {
    record(name);
    return (out_ / name).string();
  }

  void simulate(const Json& p) {
    const std::string w = "simulate";
    const double t_final = get_or(p, "t_final", 10.0, w);
    const double dt = get_or(p, "csv_dt", 0.05, w);
    if (!(dt > 0)) throw ValidationError("simulate: csv_dt must be positive");
    Json runs = Json::array();
    const auto results = parallel_map<std::shared_ptr<FlowWithVariation>>(
        s_.seeds.size(), s_.workers, [&](std::size_t i) {
          const PhasePoint x0 = on_energy_level(s_.surface, s_.seeds[i].state, s_.energy);
          return std::make_shared<FlowWithVariation>(
              flow_with_variation(s_.surface, s_.field, x0, t_final, s_.integrator));
        });
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = *results[i];
      const auto& tr = r.trajectory;
      runs.push_back({{"seed", i},
                      {"t_final", tr.t_end()},
                      {"exited", tr.exited()},
                      {"steps", tr.stats().steps},
                      {"rejected", tr.stats().rejected},
                      {"max_energy_drift", tr.max_energy_drift()},
                      {"max_det_error", max_det_error(r.variation, tr.time_grid())},
                      {"max_X_norm", max_X_norm(r.variation, tr.time_grid())},
                      {"final_state", to_json(tr.final_state())},
                      {"final_X", to_json(r.variation.final_X())}});
      write_trajectory_csv(path("trajectory_" + std::to_string(i) + ".csv"), s_.surface, {&tr}, dt);
    }
    emit("simulate.json", {{"energy", s_.energy}, {"runs", runs}});
  }

  void orbits(const Json& p) {
    const std::string w = "orbits";
    const double tol = get_or(p, "tol", 1e-10, w);
    ShootingOptions so;
    so.half_width = get_or(p, "half_width", so.half_width, w);
    so.ret.max_time = get_or(p, "max_time", so.ret.max_time, w);
    so.class_tol = get_or(p, "class_tol", so.class_tol, w);
    so.max_iters = get_or(p, "max_iters", so.max_iters, w);
    so.ret.flow = s_.integrator;
    const double dt = get_or(p, "csv_dt", 0.01, w);
    class_tol_ = so.class_tol;

    struct Attempt {
      bool ok = false;
      ClosedOrbit orbit;
      std::string error;
    };
    const auto attempts = parallel_map<Attempt>(s_.seeds.size(), s_.workers, [&](std::size_t i) {
      Attempt a;
      try {
        const auto& seed = s_.seeds[i];
        a.orbit = seed.period_guess
                      ? analyze_periodic_state(s_.surface, s_.field,
                                               on_energy_level(s_.surface, seed.state, s_.energy),
                                               *seed.period_guess, so)
                      : find_closed_orbit(s_.surface, s_.field, s_.energy, seed.state, tol, so);
        a.ok = true;
      } catch (const NumericalError& e) {
        a.error = e.what();
      }
      return a;
    });
    Json failures = Json::array();
    for (std::size_t i = 0; i < attempts.size(); ++i) {
      if (attempts[i].ok) db_.add(s_.surface, s_.field, attempts[i].orbit);
      else failures.push_back({{"seed", i}, {"error", attempts[i].error}});
    }

    orbit_json_ = Json::array();
    std::vector<std::shared_ptr<FlowWithVariation>> flows;
    for (const auto& o : db_.orbits()) {
      auto f = std::make_shared<FlowWithVariation>(
          flow_with_variation(s_.surface, s_.field, o.initial_state, o.period, s_.integrator));
      Json j = to_json(o);
      j["max_det_error"] = max_det_error(f->variation, f->trajectory.time_grid());
      if (s_.surface.topology() == Topology::Torus) {
        try {
          j["rotation_vector"] = to_json(rotation_vector(s_.surface, s_.field, o));
        } catch (const NumericalError& e) {
          j["rotation_vector"] = {{"error", e.what()}};
        }
      }
      orbit_json_.push_back(j);
      flows.push_back(std::move(f));
    }
    std::vector<const Trajectory*> trs;
    for (const auto& f : flows) trs.push_back(&f->trajectory);
    write_trajectory_csv(path("orbit_trajectories.csv"), s_.surface, trs, dt);
    orbits_done_ = true;
    orbit_failures_ = failures;
    write_orbits();
    if (db_.size() == 0 && !s_.seeds.empty())
      throw NumericalError("no closed orbit found from " + std::to_string(s_.seeds.size()) + " seeds");
  }

  void write_orbits() {
    emit("orbits.json", {{"energy", s_.energy},
                         {"count", orbit_json_.size()},
                         {"orbits", orbit_json_},
                         {"failures", orbit_failures_}});
  }

  const ClosedOrbit& orbit_at(const Json& p, const std::string& where) {
    const int i = get_or(p, "orbit", 0, where);
    if (i < 0 || static_cast<std::size_t>(i) >= db_.size())
      throw ValidationError(where + ": orbit index " + std::to_string(i) + " out of range (" +
                            std::to_string(db_.size()) + " orbits)");
    return db_.orbits()[static_cast<std::size_t>(i)];
  }

  void classify_stage(const Json& p) {
    const std::string w = "classify";
    const double tol = get_or(p, "class_tol", class_tol_, w);
    Json list = Json::array();
    std::vector<ClosedOrbit> hyperbolic;
    for (const auto& o : db_.orbits()) {
      const auto c = classify(o, tol);
      Json j{{"period", o.period}, {"trace", o.trace}, {"class", to_string(c.cls)}};
      if (c.cls == FloquetClass::Elliptic) j["alpha"] = c.alpha;
      if (c.cls == FloquetClass::Hyperbolic) {
        const auto e = eigendata(o.monodromy, c.cls);
        j["lambda_u"] = e.lambda_u;
        j["lambda_s"] = e.lambda_s;
        hyperbolic.push_back(o);
        hyperbolic.back().cls = c.cls;
        hyperbolic.back().eigen = e;
      }
      list.push_back(j);
    }
    Json rep{{"class_tol", tol}, {"orbits", list}};
    if (p.contains("splitting")) {
      const Json& q = p["splitting"];
      expect_keys(q, {"T", "lambda_target", "m_max"}, "classify.splitting");
      if (hyperbolic.empty()) {
        rep["splitting"] = {{"status", "no hyperbolic orbits"}};
      } else {
        const auto sr = dominated_splitting_check(
            hyperbolic, s_.surface, s_.field, get_required<double>(q, "T", "classify.splitting"),
            get_or(q, "lambda_target", 0.5, "classify.splitting"),
            get_or(q, "m_max", 8, "classify.splitting"));
        rep["splitting"] = to_json(sr);
      }
    }
    emit("classify.json", rep);
  }

  void twist(const Json& p) {
    const std::string w = "twist";
    const auto radii = get_or(p, "radii", std::vector<double>{0.01, 0.02, 0.03, 0.04, 0.05}, w);
    RotationOptions ro;
    ro.iterates = get_or(p, "iterates", ro.iterates, w);
    ro.escape_radius = get_or(p, "escape_radius", ro.escape_radius, w);
    const double hw = get_or(p, "half_width", 0.1, w);
    JetOptions jo;
    jo.fd_fraction = get_or(p, "fd_fraction", jo.fd_fraction, w);

    auto entry = [&](const TwistData& td, const TwistFit& fit) {
      return Json{{"jet", to_json(td)},
                  {"fit", to_json(fit)},
                  {"relative_difference", std::abs(td.beta - fit.beta) / std::abs(fit.beta)}};
    };
    Json list = Json::array();
    for (std::size_t i = 0; i < db_.size(); ++i) {
      const auto& o = db_.orbits()[i];
      if (o.cls != FloquetClass::Elliptic) continue;
      Json j{{"orbit", i}};
      try {
        const Section sec = make_section(s_.surface, o.initial_state, hw);
        const TwistData td = birkhoff_beta(jet3(sec, o, s_.field, jo));
        const TwistFit fit = twist_by_rotation_number(sec, o, s_.field, radii, ro);
        j.update(entry(td, fit));
        write_fit_csv(path("twist_fit_" + std::to_string(i) + ".csv"), fit);
        orbit_json_[i]["twist"] = to_json(td);
      } catch (const Error& e) {
        j["error"] = e.what();
      }
      list.push_back(j);
    }
    Json injected = Json::array();
    for (const auto& ab : get_or(p, "injected", Json::array(), w)) {
      const Vec2 v = vec2_from_json(ab, "twist.injected");
      const FunctionMap m = twist_map(v.x, v.y);
      const TwistData td = birkhoff_beta(jet3(m, {0, 0}, 0.05));
      const TwistFit fit = twist_by_rotation_number(m, {0, 0}, Mat2::rotation(two_pi * v.x), radii, ro);
      Json j{{"alpha0", v.x}, {"beta0", v.y}};
      j.update(entry(td, fit));
      injected.push_back(j);
    }
    emit("twist.json", {{"orbits", list}, {"injected", injected}});
    if (orbits_done_) write_orbits();
  }

  void franks(const Json& p) {
    const std::string w = "franks-verify";
    OrbitSegment seg;
    if (p.contains("start")) {
      seg.start = on_energy_level(s_.surface, phase_point_from_json(p["start"]), s_.energy);
      seg.duration = get_required<double>(p, "duration", w);
    } else {
      const ClosedOrbit& o = orbit_at(p, w);
      seg.start = o.initial_state;
      seg.period = o.period;
      seg.duration = get_or(p, "duration", o.period, w);
    }
    ConstantsOptions co;
    co.c1_radius = get_or(p, "c1_radius", co.c1_radius, w);
    co.chart_width = get_or(p, "chart_width", co.chart_width, w);
    co.flow = s_.integrator;
    const FranksConstants k = compute_constants(s_.surface, s_.field, s_.energy, seg, co);
    Json rep{{"segment", {{"start", to_json(seg.start)}, {"duration", seg.duration}}},
             {"constants", to_json(k)}};
    const int n = get_or(p, "cota_samples", 20, w);
    const auto cota = verify_cota(k, n, s_.seed, s_.workers, false);
    rep["cota"] = to_json(cota);
    const Mat2 S0 = k.base->variation.X(k.duration);
    SurjectivityOptions so;
    so.workers = s_.workers;
    const auto sur = verify_ball_surjectivity(
        k, sphere_targets(S0, get_or(p, "target_fraction", 0.5, w) * k.delta, get_or(p, "targets", 8, w)),
        so);
    rep["surjectivity"] = to_json(sur);
    emit("franks-verify.json", rep);
    if (!cota.passed) throw CotaViolation("response bound violated; see franks-verify.json");
    if (!sur.passed) throw NumericalError("surjectivity check failed; see franks-verify.json");
  }

  void entropy(const Json& p) {
    const std::string w = "entropy";
    const Json m = get_or(p, "map", Json{{"type", "standard"}}, w);
    expect_keys(m, {"type", "kick", "harmonic", "matrix", "orbit", "half_width"}, "entropy.map");
    const auto type = get_required<std::string>(m, "type", "entropy.map");
    std::unique_ptr<MapOracle> map;
    Vec2 fixed{0, 0};
    if (type == "standard") {
      map = std::make_unique<StandardMap>(get_or(m, "kick", 1.5, "entropy.map"),
                                          get_or(m, "harmonic", 1, "entropy.map"));
    } else if (type == "horseshoe") {
      map = std::make_unique<LinearHorseshoe>();
    } else if (type == "linear") {
      map = std::make_unique<FunctionMap>(
          linear_map(mat2_from_json(get_required<Json>(m, "matrix", "entropy.map"), "entropy.map.matrix")));
    } else if (type == "return") {
      const ClosedOrbit& o = orbit_at(m, "entropy.map");
      ReturnOptions ro;
      ro.flow = s_.integrator;
      const Section sec = make_section(s_.surface, o.initial_state, get_or(m, "half_width", 0.1, "entropy.map"));
      fixed = *sec.coords(o.initial_state);
      map = std::make_unique<SectionReturnMap>(sec, s_.field, ro);
    } else {
      throw ValidationError("entropy.map: unknown type '" + type + "'");
    }
    if (p.contains("fixed_point")) fixed = vec2_from_json(p["fixed_point"], "entropy.fixed_point");
    const Vec2 target = p.contains("target_point") ? vec2_from_json(p["target_point"], "entropy.target_point") : fixed;

    HorseshoeParams hp;
    hp.k_max = get_or(p, "k_max", hp.k_max, w);
    hp.neighbourhood = get_or(p, "neighbourhood", hp.neighbourhood, w);
    hp.k = get_or(p, "k", 0, w);
    for (const auto& b : get_or(p, "boxes", Json::array(), w)) {
      if (!b.is_array() || b.size() != 4 || !std::all_of(b.begin(), b.end(), [](const Json& x) { return x.is_number(); }))
        throw ValidationError("entropy.boxes: expected [u0, u1, s0, s1]");
      const auto v = b.get<std::vector<double>>();
      if (v[1] <= v[0] || v[3] <= v[2]) throw ValidationError("entropy.boxes: expected [u0, u1, s0, s1]");
      hp.boxes.push_back({v[0], v[1], v[2], v[3]});
    }

    const FixedPoint base = hyperbolic_fixed_point(*map, fixed);
    Json rep{{"map", m}, {"fixed_point", to_json(base.point)},
             {"lambda_u", base.lambda_u}, {"lambda_s", base.lambda_s}};
    std::vector<Intersection> crossings;
    if (hp.k <= 0) {
      GrowOptions go;
      go.max_arclength = get_or(p, "max_arclength", 8.0, w);
      go.tol = get_or(p, "grow_tol", go.tol, w);
      go.max_segment = get_or(p, "max_segment", go.max_segment, w);
      const FixedPoint other = hyperbolic_fixed_point(*map, target);
      const auto un = grow_manifold(*map, base, Side::Unstable, get_or(p, "unstable_sign", 1, w), go);
      const auto st = grow_manifold(*map, other, Side::Stable, get_or(p, "stable_sign", -1, w), go);
      crossings = detect_homoclinic(st, un, get_or(p, "angle_tol", 1e-3, w));
      Json branches = Json::array();
      for (const auto* b : {&un, &st})
        branches.push_back({{"side", to_string(b->side)},
                            {"sign", b->sign},
                            {"base", to_json(b->base.point)},
                            {"points", b->points.size()},
                            {"arclength", b->arclength},
                            {"max_deviation", b->max_deviation},
                            {"invariance_error", invariance_error(*map, *b)},
                            {"truncated", b->truncated}});
      rep["branches"] = branches;
      write_manifold_csv(path("manifolds.csv"), {&un, &st});
    }
    const auto er = certify_horseshoe(*map, base, crossings, hp);
    rep.update(to_json(er));
    emit("entropy.json", rep);
  }

  void critical(const Json& p) {
    const std::string w = "critical-value";
    const Vec2 closed = p.contains("closed") ? vec2_from_json(p["closed"], "critical-value.closed") : Vec2{};
    const Lagrangian L = Lagrangian::for_field(s_.surface, s_.field, closed);
    LoopSearch ls;
    ls.modes = get_or(p, "modes", ls.modes, w);
    ls.restarts = get_or(p, "restarts", ls.restarts, w);
    ls.max_evals = get_or(p, "max_evals", ls.max_evals, w);
    ls.nodes = get_or(p, "nodes", ls.nodes, w);
    ls.step = get_or(p, "step", ls.step, w);
    ls.seed = s_.seed;
    ls.workers = s_.workers;
    const double tol = get_or(p, "tol", 1e-4, w);
    const auto br = estimate_critical_value(L, get_required<double>(p, "k_lo", w),
                                            get_required<double>(p, "k_hi", w), ls, tol);
    Json rep = to_json(br);
    rep["bisection_tol"] = tol;
    if (br.has_witness) rep["witness_reverified"] = loop_action(L, br.witness, br.c_lo);
    emit("critical-value.json", rep);
  }

  const Scenario& s_;
  fs::path out_;
  std::vector<std::string> files_;
  OrbitDatabase db_;
  Json orbit_json_ = Json::array();
  Json orbit_failures_ = Json::array();
  bool orbits_done_ = false;
  double class_tol_ = 1e-6;
};

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"simulate", "orbits",  "classify",      "twist",
                                              "franks-verify", "entropy", "critical-value"};
  return names;
}

Scenario parse_scenario(const Json& j) {
  expect_keys(j, {"name", "surface", "field", "energy", "seeds", "integrator", "stages", "output",
                  "seed", "workers"},
              "scenario");
  Scenario s;
  s.name = get_required<std::string>(j, "name", "scenario");
  s.surface = surface_from_json(get_required<Json>(j, "surface", "scenario"));
  s.field = field_from_json(get_required<Json>(j, "field", "scenario"));
  s.field.validate_for(s.surface);
  s.energy = get_or(j, "energy", 0.5, "scenario");
  if (!(s.energy > 0)) throw ValidationError("scenario: energy must be positive");
  for (const auto& sd : get_or(j, "seeds", Json::array(), "scenario")) {
    expect_keys(sd, {"chart", "pos", "vel", "period_guess"}, "seeds");
    Json state = sd;
    state.erase("period_guess");
    SeedSpec spec{phase_point_from_json(state), std::nullopt};
    if (sd.contains("period_guess")) spec.period_guess = get_required<double>(sd, "period_guess", "seeds");
    if (!s.surface.contains(spec.state.base())) throw ValidationError("seeds: point outside the surface");
    if (norm(spec.state.vel) == 0.0) throw ValidationError("seeds: zero velocity");
    s.seeds.push_back(spec);
  }
  if (j.contains("integrator")) {
    const Json& in = j["integrator"];
    expect_keys(in, {"rel_tol", "abs_tol", "max_step"}, "integrator");
    s.integrator.rel_tol = get_or(in, "rel_tol", s.integrator.rel_tol, "integrator");
    s.integrator.abs_tol = get_or(in, "abs_tol", s.integrator.abs_tol, "integrator");
    s.integrator.max_step = get_or(in, "max_step", s.integrator.max_step, "integrator");
    if (!(s.integrator.rel_tol > 0 && s.integrator.abs_tol > 0 && s.integrator.max_step > 0))
      throw ValidationError("integrator: tolerances must be positive");
  }
  for (const auto& st : get_required<Json>(j, "stages", "scenario")) {
    expect_keys(st, {"stage", "params"}, "stages");
    StageSpec spec{get_required<std::string>(st, "stage", "stages"), st.value("params", Json::object())};
    if (!stage_keys().count(spec.stage)) throw ValidationError("stages: unknown stage '" + spec.stage + "'");
    check_params(spec.stage, spec.params);
    s.stages.push_back(std::move(spec));
  }
  s.output = get_or(j, "output", "out/" + s.name, "scenario");
  s.seed = get_or(j, "seed", std::uint64_t{1}, "scenario");
  s.workers = get_or(j, "workers", 1, "scenario");
  if (s.workers < 1) throw ValidationError("scenario: workers must be >= 1");
  return s;
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_json(path)); }

RunResult run_scenario(Scenario s, const RunOverrides& ov) {
  if (ov.output) s.output = *ov.output;
  if (ov.workers) {
    if (*ov.workers < 1) throw ValidationError("workers must be >= 1");
    s.workers = *ov.workers;
  }
  if (ov.seed) s.seed = *ov.seed;

  std::vector<StageSpec> plan;
  if (ov.stage) {
    if (!stage_keys().count(*ov.stage)) throw ValidationError("unknown stage '" + *ov.stage + "'");
    auto find = [&](const std::string& name) {
      for (const auto& st : s.stages)
        if (st.stage == name) return st;
      return StageSpec{name, Json::object()};
    };
    const StageSpec target = find(*ov.stage);
    if (*ov.stage != "orbits" && needs_orbits(target.stage, target.params)) plan.push_back(find("orbits"));
    plan.push_back(target);
  } else {
    plan = s.stages;
    bool have = false;
    for (auto it = plan.begin(); it != plan.end(); ++it) {
      if (it->stage == "orbits") have = true;
      if (!have && needs_orbits(it->stage, it->params)) {
        it = plan.insert(it, StageSpec{"orbits", Json::object()});
        have = true;
      }
    }
  }

  const fs::path out(s.output);
  fs::create_directories(out);
  Runner runner(s, out);
  RunResult res;
  Json stages = Json::array();
  for (const auto& st : plan) {
    Json entry{{"stage", st.stage}};
    try {
      runner.run(st);
      entry["status"] = "ok";
    } catch (const NumericalError& e) {
      spdlog::error("{}: {}", st.stage, e.what());
      entry["status"] = "numerical-failure";
      entry["message"] = e.what();
      res.exit_code = 3;
      res.message = st.stage + ": " + e.what();
    } catch (const std::exception& e) {
      spdlog::error("{}: {}", st.stage, e.what());
      entry["status"] = "validation-error";
      entry["message"] = e.what();
      res.exit_code = 2;
      res.message = st.stage + ": " + e.what();
    }
    stages.push_back(entry);
    if (res.exit_code != 0) break;
  }
  Json summary{{"scenario", s.name},
               {"energy", s.energy},
               {"seed", s.seed},
               {"stages", stages},
               {"files", runner.files()},
               {"exit_code", res.exit_code}};
  write_json((out / "summary.json").string(), summary);
  res.files = runner.files();
  res.files.push_back("summary.json");
  return res;
}

RunResult run_scenario_file(const std::string& path, const RunOverrides& ov) {
  try {
    return run_scenario(load_scenario(path), ov);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    RunResult r;
    r.exit_code = 2;
    r.message = e.what();
    return r;
  }
}

}  // namespace maglab
