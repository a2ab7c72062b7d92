//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
#include "maglab/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace maglab {

void expect_keys(const Json& j, std::initializer_list<const char*> allowed,
                 const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) throw ValidationError(where + ": unknown key '" + item.key() + "'");
  }
}

Vec2 vec2_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ValidationError(where + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Mat2 mat2_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ValidationError(where + ": expected [[a, b], [c, d]]");
  const Vec2 r0 = vec2_from_json(j[0], where), r1 = vec2_from_json(j[1], where);
  return {r0.x, r0.y, r1.x, r1.y};
}

Surface surface_from_json(const Json& j) {
  expect_keys(j, {"kind", "params"}, "surface");
  const auto kind = get_required<std::string>(j, "kind", "surface");
  const Json p = j.value("params", Json::object());
  if (kind == "torus") {
    expect_keys(p, {"lx", "ly", "bump"}, "surface.params");
    return Surface::torus(get_or(p, "lx", 1.0, "surface.params"), get_or(p, "ly", 1.0, "surface.params"),
                          get_or(p, "bump", 0.0, "surface.params"));
  }
  if (kind == "sphere") {
    expect_keys(p, {"radius"}, "surface.params");
    return Surface::sphere(get_or(p, "radius", 1.0, "surface.params"));
  }
  if (kind == "planar") {
    expect_keys(p, {"domain_radius", "injectivity_radius"}, "surface.params");
    return Surface::planar(get_required<double>(p, "domain_radius", "surface.params"),
                           get_required<double>(p, "injectivity_radius", "surface.params"));
  }
  throw ValidationError("surface: unknown kind '" + kind + "'");
}

MagneticField field_from_json(const Json& j) {
  expect_keys(j, {"kind", "params"}, "field");
  const auto kind = get_required<std::string>(j, "kind", "field");
  const Json p = j.value("params", Json::object());
  const std::string where = "field.params";
  if (kind == "constant") {
    expect_keys(p, {"value"}, where);
    return MagneticField::constant(get_required<double>(p, "value", where));
  }
  if (kind == "sinusoidal") {
    expect_keys(p, {"modes", "offset"}, where);
    std::vector<FourierMode> modes;
    for (const auto& m : get_required<Json>(p, "modes", where)) {
      expect_keys(m, {"amplitude", "kx", "ky", "phase"}, where + ".modes");
      modes.push_back({get_required<double>(m, "amplitude", where), get_or(m, "kx", 0, where),
                       get_or(m, "ky", 0, where), get_or(m, "phase", 0.0, where)});
    }
    return MagneticField::sinusoidal(std::move(modes), get_or(p, "offset", 0.0, where));
  }
  if (kind == "zonal") {
    expect_keys(p, {"coeffs"}, where);
    return MagneticField::zonal(get_required<std::vector<double>>(p, "coeffs", where));
  }
  if (kind == "polynomial") {
    expect_keys(p, {"terms"}, where);
    std::vector<PolyTerm> terms;
    for (const auto& t : get_required<Json>(p, "terms", where)) {
      expect_keys(t, {"coef", "px", "py"}, where + ".terms");
      terms.push_back({get_required<double>(t, "coef", where), get_or(t, "px", 0, where),
                       get_or(t, "py", 0, where)});
    }
    return MagneticField::polynomial(std::move(terms));
  }
  throw ValidationError("field: unknown kind '" + kind + "'");
}

PhasePoint phase_point_from_json(const Json& j) {
  expect_keys(j, {"chart", "pos", "vel"}, "state");
  return {get_or(j, "chart", 0, "state"), vec2_from_json(get_required<Json>(j, "pos", "state"), "state.pos"),
          vec2_from_json(get_required<Json>(j, "vel", "state"), "state.vel")};
}

Json to_json(const Vec2& v) { return Json::array({v.x, v.y}); }

Json to_json(const Mat2& m) { return Json::array({Json::array({m.a, m.b}), Json::array({m.c, m.d})}); }

Json to_json(const PhasePoint& p) {
  return Json{{"chart", p.chart}, {"pos", to_json(p.pos)}, {"vel", to_json(p.vel)}};
}

Json to_json(const ClosedOrbit& o) {
  Json j{{"initial_state", to_json(o.initial_state)},
         {"energy", o.energy},
         {"period", o.period},
         {"monodromy", to_json(o.monodromy)},
         {"trace", o.trace},
         {"class", to_string(o.cls)},
         {"residual", o.residual},
         {"status", o.status}};
  if (o.cls == FloquetClass::Hyperbolic)
    j["eigen"] = {{"lambda_u", o.eigen.lambda_u}, {"lambda_s", o.eigen.lambda_s},
                  {"e_u", to_json(o.eigen.e_u)}, {"e_s", to_json(o.eigen.e_s)}};
  else if (o.cls == FloquetClass::Elliptic)
    j["eigen"] = {{"alpha", o.eigen.alpha}};
  return j;
}

Json to_json(const RotationVector& r) {
  return Json{{"class", Json::array({r.p, r.q})},
              {"period", r.period},
              {"rho", to_json(r.rho)},
              {"multiplicity", r.multiplicity}};
}

Json to_json(const TwistData& t) {
  return Json{{"alpha", t.alpha},
              {"beta", t.beta},
              {"nonresonant", t.nonresonant},
              {"beta_error", t.beta_error},
              {"beta_tol", t.beta_tol},
              {"radial_coefficient", t.radial_coefficient},
              {"verdict", t.verdict()}};
}

Json to_json(const TwistFit& f) {
  return Json{{"alpha", f.alpha},     {"beta", f.beta},   {"alpha_error", f.alpha_error},
              {"beta_error", f.beta_error}, {"residual", f.residual}, {"radii", f.radii},
              {"rho", f.rho}};
}

Json to_json(const FranksConstants& k) {
  Json ledger = Json::array();
  for (const auto& q : k.ledger())
    ledger.push_back({{"name", q.name}, {"lhs", q.lhs}, {"rhs", q.rhs}, {"strict", q.strict},
                      {"slack", q.slack()}, {"holds", q.holds()}});
  std::vector<std::string> failures;
  const bool ok = k.check(&failures);
  return Json{{"c", k.c},
              {"duration", k.duration},
              {"k0", k.k0},
              {"k1", k.k1},
              {"k2", k.k2},
              {"k3", k.k3},
              {"k5", k.k5},
              {"k6", k.k6},
              {"lambda", k.lambda},
              {"lambda_halvings", k.lambda_halvings},
              {"rho", k.rho},
              {"delta1", k.delta1},
              {"delta", k.delta},
              {"epsilon", k.epsilon},
              {"eps0", k.eps0},
              {"kmag_c0", k.kmag_c0},
              {"alpha_defect", k.alpha_defect},
              {"ledger", ledger},
              {"valid", ok},
              {"failures", failures}};
}

Json to_json(const CotaReport& r) {
  return Json{{"samples", r.samples.size()},
              {"min_margin", r.min_margin},
              {"max_margin", r.max_margin},
              {"linearity_error", r.linearity_error},
              {"passed", r.passed}};
}

Json to_json(const SurjectivityReport& r) {
  Json targets = Json::array();
  for (const auto& t : r.targets)
    targets.push_back({{"distance", t.distance},
                       {"A", {t.A.a, t.A.b, t.A.c}},
                       {"A_norm", t.A_norm},
                       {"residual", t.residual},
                       {"relative_residual", t.relative_residual},
                       {"iterations", t.iterations},
                       {"converged", t.converged},
                       {"within_gene_bound", t.within_gene_bound},
                       {"message", t.message}});
  return Json{{"radius", r.radius},
              {"targets", r.targets.size()},
              {"max_residual", r.max_residual},
              {"max_relative_residual", r.max_relative_residual},
              {"max_A_norm", r.max_A_norm},
              {"passed", r.passed},
              {"details", targets}};
}

Json to_json(const EntropyReport& r) {
  Json xs = Json::array();
  for (const auto& x : r.intersections)
    xs.push_back({{"point", to_json(x.point)}, {"angle", x.angle}, {"transversal", x.transversal}});
  Json boxes = Json::array();
  for (const auto& b : r.boxes) boxes.push_back(Json::array({b.u0, b.u1, b.s0, b.s1}));
  return Json{{"intersections", xs},
              {"horseshoe", {{"N", r.symbols}, {"k", r.iterate}, {"T_ret", r.return_time},
                             {"boxes", boxes}}},
              {"per_iterate", r.per_iterate},
              {"h_top_lower", r.h_top_lower},
              {"status", r.status}};
}

Json to_json(const SplittingReport& r) {
  Json orbits = Json::array();
  for (const auto& o : r.orbits)
    orbits.push_back({{"period", o.period}, {"product", o.product}, {"power_error", o.power_error}});
  Json j{{"T", r.T}, {"orbits", orbits}, {"max_product", r.max_product},
         {"lambda_target", r.lambda_target}, {"certified", r.certified}};
  if (r.max_product < 1.0) j["m"] = r.m;
  return j;
}

Json to_json(const FourierLoop& l) {
  Json a = Json::array(), b = Json::array();
  for (const auto& v : l.a) a.push_back(to_json(v));
  for (const auto& v : l.b) b.push_back(to_json(v));
  return Json{{"center", to_json(l.center)}, {"period", l.period}, {"a", a}, {"b", b}};
}

Json to_json(const CriticalBracket& b) {
  Json j{{"c_lo", b.c_lo}, {"c_hi", b.c_hi}};
  j["witness_loop"] = b.has_witness ? to_json(b.witness) : Json(nullptr);
  j["witness_action"] = b.has_witness ? Json(b.witness_action) : Json(nullptr);
  j["effort"] = {{"restarts", b.restarts},
                 {"bisection_steps", b.bisection_steps},
                 {"evaluations", b.evaluations},
                 {"c_hi_label", b.c_hi_label}};
  return j;
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

namespace {

std::ofstream open_csv(const std::string& path, const char* header) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << std::setprecision(std::numeric_limits<double>::max_digits10) << header << '\n';
  return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Surface& surface,
                          const std::vector<const Trajectory*>& trajectories, double dt) {
  auto out = open_csv(path, "t,x,y,vx,vy,E");
  for (const Trajectory* tr : trajectories) {
    const double t0 = tr->t_start(), t1 = tr->t_end();
    const double span = std::abs(t1 - t0);
    const long n = std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9)));
    for (long i = 0; i <= n; ++i) {
      const double t = i == n ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n);
      const PhasePoint s = tr->state(t);
      out << t << ',' << s.pos.x << ',' << s.pos.y << ',' << s.vel.x << ',' << s.vel.y << ','
          << energy(surface, s) << '\n';
    }
  }
}

void write_manifold_csv(const std::string& path, const std::vector<const ManifoldBranch*>& branches) {
  auto out = open_csv(path, "s,y,ydot,side");
  for (const ManifoldBranch* b : branches) {
    double s = 0.0;
    for (std::size_t i = 0; i < b->points.size(); ++i) {
      if (i > 0) s += norm(b->points[i] - b->points[i - 1]);
      out << s << ',' << b->points[i].x << ',' << b->points[i].y << ',' << to_string(b->side)
          << '\n';
    }
  }
}

void write_fit_csv(const std::string& path, const TwistFit& fit) {
  auto out = open_csv(path, "r,rho");
  for (std::size_t i = 0; i < fit.radii.size() && i < fit.rho.size(); ++i)
    out << fit.radii[i] << ',' << fit.rho[i] << '\n';
}

}  // namespace maglab
