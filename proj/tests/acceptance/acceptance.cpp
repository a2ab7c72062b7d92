//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file acceptance.cpp
//! Acceptance gate: runs the bundled scenarios and prints one PASS/FAIL line
//! per criterion with the measured values. Exit status 1 if any fails.
//---------------------------------------------------------------------------//
#include <spdlog/spdlog.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "maglab/scenario.hpp"

using namespace maglab;
namespace fs = std::filesystem;

namespace {

const fs::path scenario_dir = MAGLAB_SCENARIO_DIR;
fs::path out_root;

const std::vector<std::string> bundled{
    "disk_example", "torus_geodesic", "franks_verify", "sphere_round", "sphere_elliptic",
    "torus_sine",   "torus_closed_form", "standard_map", "horseshoe"};

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int n, const Outcome& o) {
  std::printf("criterion %2d: %s  %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

// Runs `body` and converts library errors into a failed criterion.
void criterion(int n, const std::function<Outcome()>& body) {
  try {
    report(n, body());
  } catch (const std::exception& e) {
    report(n, {false, std::string("error: ") + e.what()});
  }
}

std::string show(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double num(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Scenario bundled_scenario(const std::string& name) {
  return load_scenario((scenario_dir / (name + ".json")).string());
}

// Full run of a bundled scenario into out_root/<tag>/<name>.
RunResult run_bundled(const std::string& name, const std::string& tag, RunOverrides ov = {}) {
  ov.output = (out_root / tag / name).string();
  return run_scenario(bundled_scenario(name), ov);
}

Json report_of(const std::string& name, const std::string& file) {
  return read_json((out_root / "A" / name / file).string());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Mat2 mat(const Json& j) { return mat2_from_json(j, "report"); }

PhasePoint state_of(const Json& j) { return phase_point_from_json(j); }

FourierLoop loop_of(const Json& j) {
  FourierLoop l;
  l.center = vec2_from_json(j["center"], "loop");
  l.period = j["period"].get<double>();
  for (const auto& v : j["a"]) l.a.push_back(vec2_from_json(v, "loop"));
  for (const auto& v : j["b"]) l.b.push_back(vec2_from_json(v, "loop"));
  return l;
}

// Unit sphere in R^3 with the chart orientation: i v = v x x, so
// x'' = -|x'|^2 x + f (x' x x).
using V3 = std::array<double, 3>;
V3 cross3(const V3& a, const V3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot3(const V3& a, const V3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

struct S6 {
  V3 x, v;
};
S6 sphere_rhs(const S6& s, double f) {
  const V3 c = cross3(s.v, s.x);
  const double vv = dot3(s.v, s.v);
  S6 d;
  for (int i = 0; i < 3; ++i) {
    d.x[i] = s.v[i];
    d.v[i] = -vv * s.x[i] + f * c[i];
  }
  return d;
}
S6 axpy(const S6& s, double h, const S6& d) {
  S6 r;
  for (int i = 0; i < 3; ++i) {
    r.x[i] = s.x[i] + h * d.x[i];
    r.v[i] = s.v[i] + h * d.v[i];
  }
  return r;
}
S6 rk4(const S6& s, double h, double f) {
  const S6 k1 = sphere_rhs(s, f), k2 = sphere_rhs(axpy(s, h / 2, k1), f);
  const S6 k3 = sphere_rhs(axpy(s, h / 2, k2), f), k4 = sphere_rhs(axpy(s, h, k3), f);
  S6 r;
  for (int i = 0; i < 3; ++i) {
    r.x[i] = s.x[i] + h / 6 * (k1.x[i] + 2 * k2.x[i] + 2 * k3.x[i] + k4.x[i]);
    r.v[i] = s.v[i] + h / 6 * (k1.v[i] + 2 * k2.v[i] + 2 * k3.v[i] + k4.v[i]);
  }
  return r;
}

// Return time to the plane through x0 normal to v0, by fixed-step RK4 and a
// bisection on the last step.
double sphere_period_oracle(const PhasePoint& p, double f, double h) {
  // Chart 0 is the projection from the north pole: (2x, 2y, r^2 - 1) / (1 + r^2).
  if (p.chart != 0) throw ValidationError("oracle expects a chart-0 seed");
  const double x = p.pos.x, y = p.pos.y, r2 = x * x + y * y, q = 1 + r2, q2 = q * q;
  const V3 px{(2 * q - 4 * x * x) / q2, -4 * x * y / q2, 4 * x / q2};
  const V3 py{-4 * x * y / q2, (2 * q - 4 * y * y) / q2, 4 * y / q2};
  S6 s{{2 * x / q, 2 * y / q, (r2 - 1) / q}, {}};
  for (int i = 0; i < 3; ++i) s.v[i] = px[i] * p.vel.x + py[i] * p.vel.y;
  const double sp = std::sqrt(dot3(s.v, s.v));
  for (double& c : s.v) c /= sp;
  const S6 s0 = s;
  auto g = [&](const S6& z) {
    V3 d{z.x[0] - s0.x[0], z.x[1] - s0.x[1], z.x[2] - s0.x[2]};
    return dot3(d, s0.v);
  };
  double t = 0.0;
  for (;;) {
    const S6 n = rk4(s, h, f);
    if (t > 1.0 && g(s) < 0 && g(n) >= 0) {
      double lo = 0.0, hi = h;
      for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(rk4(s, mid, f)) < 0 ? lo : hi) = mid;
      }
      return t + 0.5 * (lo + hi);
    }
    s = n;
    t += h;
    if (t > 100.0) throw NumericalError("oracle found no return");
  }
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  out_root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "maglab_acceptance";
  fs::remove_all(out_root);

  // Reference run of every bundled scenario, and a rerun with two workers.
  std::vector<int> exit_a, exit_b;
  for (const auto& name : bundled) exit_a.push_back(run_bundled(name, "A").exit_code);
  RunOverrides two;
  two.workers = 2;
  for (const auto& name : bundled) exit_b.push_back(run_bundled(name, "B", two).exit_code);

  criterion(1, [] {
    const auto t0 = std::chrono::steady_clock::now();
    RunOverrides ov;
    ov.stage = "orbits";
    const auto r = run_bundled("disk_example", "timing", ov);
    const double dt = seconds_since(t0);
    const Json o = read_json((out_root / "timing" / "disk_example" / "orbits.json").string())["orbits"][0];
    const double dT = std::abs(o["period"].get<double>() - two_pi);
    const double dM = max_abs(mat(o["monodromy"]) - Mat2::identity());
    const std::string cls = o["class"];
    return Outcome{r.exit_code == 0 && dT <= 1e-8 && dM <= 1e-6 && cls == "Parabolic" && dt < 1.0,
                   "|T-2pi|=" + show(dT) + " |M-I|=" + show(dM) + " class=" + cls + " time=" + show(dt) + "s"};
  });

  criterion(2, [] {
    const auto t0 = std::chrono::steady_clock::now();
    RunOverrides ov;
    ov.stage = "simulate";
    const auto r = run_bundled("torus_sine", "timing", ov);
    const double dt = seconds_since(t0);
    // Independent recheck of E along dense output.
    const Scenario s = bundled_scenario("torus_sine");
    const auto tr = flow(s.surface, s.field, on_energy_level(s.surface, s.seeds[0].state, s.energy), 1000.0,
                         s.integrator);
    double drift = 0.0, raw = 0.0;
    const int n = 200000;
    for (int i = 0; i <= n; ++i) {
      const double t = 1000.0 * i / n;
      drift = std::max(drift, std::abs(energy(s.surface, tr.state(t)) - s.energy));
      raw = std::max(raw, std::abs(energy(s.surface, tr.raw_state(t)) - s.energy));
    }
    const double steps = tr.max_energy_drift();
    return Outcome{r.exit_code == 0 && tr.t_end() == 1000.0 && drift <= 1e-9 && steps <= 1e-9 && dt < 10.0,
                   "max|E-c|=" + show(drift) + " (step ends before projection " + show(steps) +
                       ", raw interpolant " + show(raw) + ") over [0," + show(tr.t_end()) +
                       "] rel_tol=" + show(s.integrator.rel_tol) + " time=" + show(dt) + "s"};
  });

  criterion(3, [] {
    bool pass = true;
    std::string detail;
    for (const auto& name : bundled) {
      double worst = 0.0, xn = 0.0;
      bool any = false;
      for (const char* file : {"simulate.json", "orbits.json"}) {
        const fs::path p = out_root / "A" / name / file;
        if (!fs::exists(p)) continue;
        const Json j = read_json(p.string());
        for (const auto& run : j.contains("runs") ? j["runs"] : j["orbits"]) {
          any = true;
          worst = std::max(worst, num(run["max_det_error"]));
          if (run.contains("max_X_norm")) xn = std::max(xn, num(run["max_X_norm"]));
        }
      }
      if (!any) continue;
      const bool ok = worst <= 1e-8;
      pass = pass && ok;
      detail += name + "=" + show(worst) + (ok ? "" : " (max|X|=" + show(xn) + ")") + " ";
    }
    return Outcome{pass, detail};
  });

  criterion(4, [] {
    int checked = 0;
    bool pass = true;
    std::string detail;
    for (const auto& name : {"disk_example", "torus_geodesic", "franks_verify", "sphere_elliptic", "sphere_round"}) {
      const Scenario s = bundled_scenario(name);
      const Json o = report_of(name, "orbits.json")["orbits"][0];
      const Section sec = make_section(s.surface, state_of(o["initial_state"]), 0.1);
      ReturnOptions ret;
      ret.flow = s.integrator;
      const double h = 1e-5;
      Vec2 cols[2];
      for (int j = 0; j < 2; ++j) {
        const Vec2 e = j == 0 ? Vec2{h, 0} : Vec2{0, h};
        cols[j] = (first_return(sec, e, s.field, ret).coords - first_return(sec, -1.0 * e, s.field, ret).coords) /
                  (2 * h);
      }
      const double err = max_abs(Mat2::from_columns(cols[0], cols[1]) - mat(o["monodromy"]));
      pass = pass && err <= 1e-4;
      ++checked;
      detail += std::string(name) + "=" + show(err) + " ";
    }
    return Outcome{pass && checked >= 3, detail};
  });

  criterion(5, [] {
    const Scenario s = bundled_scenario("sphere_round");
    const double T = report_of("sphere_round", "orbits.json")["orbits"][0]["period"];
    const double oracle = sphere_period_oracle(s.seeds[0].state, 1.0, 1e-3);
    const double analytic = two_pi / std::sqrt(2.0);
    const double e1 = std::abs(T - oracle), e2 = std::abs(T - analytic);
    return Outcome{e1 <= 1e-6 && e2 <= 1e-6,
                   "T=" + show(T) + " |T-oracle|=" + show(e1) + " |T-2pi/sqrt2|=" + show(e2)};
  });

  criterion(6, [] {
    double worst = 0.0;
    const Json runs = report_of("torus_geodesic", "simulate.json")["runs"];
    for (const auto& r : runs) {
      if (r["t_final"].get<double>() != 1.0) return Outcome{false, "simulate horizon is not 1"};
      worst = std::max(worst, max_abs(mat(r["final_X"]) - Mat2{1, 1, 0, 1}));
    }
    return Outcome{!runs.empty() && worst <= 1e-9,
                   std::to_string(runs.size()) + " seeds, max|X(1)-[[1,1],[0,1]]|=" + show(worst)};
  });

  criterion(7, [] {
    // Hyperbolic orbit segment from the bundled run, flat straight segment here.
    const Json hyp = report_of("franks_verify", "franks-verify.json")["constants"]["ledger"];
    const FranksConstants flat = compute_constants(Surface::torus(), MagneticField::constant(0.0), 0.5,
                                                   OrbitSegment{{0, {0.1, 0.5}, {1, 0}}, 0.5});
    bool pass = !hyp.empty();
    double min_slack = std::numeric_limits<double>::infinity();
    std::size_t count = 0;
    for (const auto& q : hyp) {
      pass = pass && q["holds"].get<bool>() && q["slack"].get<double>() >= 0.0;
      min_slack = std::min(min_slack, q["slack"].get<double>());
      ++count;
    }
    for (const auto& q : flat.ledger()) {
      pass = pass && q.holds() && q.slack() >= 0.0;
      min_slack = std::min(min_slack, q.slack());
      ++count;
    }
    pass = pass && flat.check();
    return Outcome{pass, std::to_string(count) + " inequalities on 2 segments, min slack=" + show(min_slack)};
  });

  criterion(8, [] {
    const auto t0 = std::chrono::steady_clock::now();
    RunOverrides ov;
    ov.stage = "franks-verify";
    run_bundled("franks_verify", "timing", ov);
    const double dt = seconds_since(t0);
    const Json c = report_of("franks_verify", "franks-verify.json")["cota"];
    const int n = c["samples"];
    const double m = c["min_margin"], lin = c["linearity_error"];
    return Outcome{n == 20 && m >= 1.0 && lin <= 1e-6 && dt < 60.0,
                   "samples=" + std::to_string(n) + " min_margin=" + show(m) + " linearity=" + show(lin) +
                       " time=" + show(dt) + "s"};
  });

  criterion(9, [] {
    const Json r = report_of("franks_verify", "franks-verify.json");
    const Json& s = r["surjectivity"];
    const double delta1 = r["constants"]["delta1"], delta = r["constants"]["delta"];
    bool conv = true;
    for (const auto& t : s["details"]) conv = conv && t["converged"].get<bool>();
    const int n = s["targets"];
    const double res = s["max_residual"], rel = s["max_relative_residual"], an = s["max_A_norm"];
    const double radius = s["radius"];
    return Outcome{n == 8 && conv && res <= 1e-6 && rel <= 1e-6 && an <= delta1 &&
                       std::abs(radius - 0.5 * delta) <= 1e-12 * delta,
                   "targets=" + std::to_string(n) + " radius=" + show(radius) + " max_residual=" + show(res) +
                       " relative=" + show(rel) + " max|A|=" + show(an) + " delta1=" + show(delta1)};
  });

  criterion(10, [] {
    const Json t = report_of("sphere_elliptic", "twist.json");
    bool pass = !t["orbits"].empty() && !t["injected"].empty();
    std::string detail;
    for (const auto& o : t["orbits"]) {
      if (o.contains("error")) return Outcome{false, o["error"].get<std::string>()};
      const double d = o["relative_difference"];
      pass = pass && d <= 0.05;
      detail += "sphere: beta_jet=" + show(o["jet"]["beta"]) + " beta_fit=" + show(o["fit"]["beta"]) +
                " rel=" + show(d) + "; ";
    }
    for (const auto& o : t["injected"]) {
      const double a0 = o["alpha0"], b0 = o["beta0"];
      double worst = 0.0;
      for (const char* path : {"jet", "fit"}) {
        worst = std::max(worst, std::abs(o[path]["alpha"].get<double>() - a0) / std::abs(a0));
        worst = std::max(worst, std::abs(o[path]["beta"].get<double>() - b0) / std::abs(b0));
      }
      const double d = o["relative_difference"];
      pass = pass && d <= 0.05 && worst <= 0.01;
      detail += "injected (" + show(a0) + "," + show(b0) + "): rel=" + show(d) + " recovery=" + show(worst);
    }
    return Outcome{pass, detail};
  });

  criterion(11, [] {
    const Json e = report_of("standard_map", "entropy.json");
    int transversal = 0;
    double best = 0.0;
    for (const auto& x : e["intersections"]) {
      const double a = x["angle"];
      if (x["transversal"].get<bool>() && a > 1e-3) ++transversal;
      best = std::max(best, a);
    }
    const double h = e["h_top_lower"];
    const Json pl = report_of("horseshoe", "entropy.json");
    const double per = pl["per_iterate"], hpl = pl["h_top_lower"];
    const double err = std::abs(per - std::log(2.0));
    return Outcome{transversal >= 1 && h > 0 && err <= 1e-12 && std::abs(hpl - std::log(2.0)) <= 1e-12,
                   "standard map: " + std::to_string(transversal) + " transversal (max angle " + show(best) +
                       "), h>=" + show(h) + "; PL horseshoe |h-log2|=" + show(err)};
  });

  criterion(12, [] {
    bool pass = true;
    std::string detail;
    for (double mu : {2.0, 3.0, 5.0}) {
      ClosedOrbit o;
      o.period = 1.0;
      o.monodromy = Mat2::diag(mu, 1.0 / mu);
      o.trace = o.monodromy.trace();
      o.cls = FloquetClass::Hyperbolic;
      o.eigen = eigendata(o.monodromy, o.cls);
      const auto r = dominated_splitting_check({o}, 1.0, 0.5);
      const auto& s = r.orbits.at(0);
      const double e = std::abs(s.product - 1.0 / (mu * mu));
      const double pe = std::max(s.power_error[0], s.power_error[1]);
      pass = pass && e <= 1e-12 && pe <= 1e-5;
      detail += "mu=" + show(mu) + ": |p-1/mu^2|=" + show(e) + " power=" + show(pe) + " ";
    }
    return Outcome{pass, detail};
  });

  criterion(13, [] {
    bool pass = true;
    std::string detail;
    for (const auto& name : {"torus_closed_form", "torus_sine"}) {
      const Scenario s = bundled_scenario(name);
      Json params;
      for (const auto& st : s.stages)
        if (st.stage == "critical-value") params = st.params;
      const Vec2 closed = params.contains("closed") ? vec2_from_json(params["closed"], "closed") : Vec2{};
      const Lagrangian L = Lagrangian::for_field(s.surface, s.field, closed);
      const Json r = report_of(name, "critical-value.json");
      const double lo = r["c_lo"], hi = r["c_hi"], tol = r["bisection_tol"];
      if (r["witness_loop"].is_null()) return Outcome{false, std::string(name) + ": no witness"};
      const double again = loop_action(L, loop_of(r["witness_loop"]), lo);
      const bool witness_ok = again < 0 && std::abs(again - r["witness_action"].get<double>()) <= 1e-8;
      pass = pass && witness_ok && lo <= hi;
      detail += std::string(name) + ": [" + show(lo) + ", " + show(hi) + "] witness " + show(again);
      if (std::string(name) == "torus_closed_form") {
        const bool ok = lo <= 0 && hi >= 0 && hi - lo <= 2 * tol;
        pass = pass && ok;
        detail += " width=" + show(hi - lo);
      }
      detail += "; ";
    }
    return Outcome{pass, detail};
  });

  criterion(14, [&] {
    bool pass = true;
    int files = 0;
    std::string detail;
    for (std::size_t i = 0; i < bundled.size(); ++i) {
      const fs::path a = out_root / "A" / bundled[i], b = out_root / "B" / bundled[i];
      pass = pass && exit_a[i] == 0 && exit_a[i] == exit_b[i];
      if (exit_a[i] != 0) detail += bundled[i] + " exit " + std::to_string(exit_a[i]) + "; ";
      std::vector<fs::path> names;
      for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename());
      std::size_t in_b = 0;
      for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++in_b;
      if (in_b != names.size()) {
        pass = false;
        detail += bundled[i] + ": file sets differ; ";
      }
      for (const auto& n : names) {
        ++files;
        if (!fs::exists(b / n) || slurp(a / n) != slurp(b / n)) {
          pass = false;
          detail += (bundled[i] + "/" + n.string() + " differs; ");
        }
      }
    }
    return Outcome{pass, std::to_string(bundled.size()) + " scenarios, " + std::to_string(files) +
                             " files compared (rerun with 2 workers) " + detail};
  });

  std::printf("%d of 14 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
