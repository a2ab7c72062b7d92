//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file orbits.cpp
//---------------------------------------------------------------------------//
#include "maglab/orbits.hpp"

#include <algorithm>
#include <cmath>

#include "maglab/errors.hpp"
#include "maglab/parallel.hpp"

namespace maglab {
namespace {

double wrap_angle(double a) {
  a = std::remainder(a, two_pi);
  return a;
}

std::optional<PhasePoint> to_anchor(const Section& sec, const PhasePoint& s) {
  auto q = sec.surface.to_chart(s, sec.anchor.chart);
  if (!q) return std::nullopt;
  q->pos = sec.surface.reduce_near(q->pos, sec.anchor.pos);
  return q;
}

}  // namespace

std::optional<Vec2> Section::coords(const PhasePoint& s) const {
  auto q = to_anchor(*this, s);
  if (!q) return std::nullopt;
  const double Y = lambda0 * dot(q->pos - anchor.pos, u);
  const double th = std::atan2(q->vel.y, q->vel.x);
  const double rel = wrap_angle(th - angle0 - (Y / lambda0) * cross(u, grad_log0));
  return Vec2{Y, std::sqrt(2.0 * c) * rel};
}

PhasePoint Section::state(const Vec2& yz) const {
  const Vec2 p = anchor.pos + (yz.x / lambda0) * u;
  const double th = angle0 + (yz.x / lambda0) * cross(u, grad_log0) + yz.y / std::sqrt(2.0 * c);
  const double l = surface.conformal_factor({anchor.chart, p});
  const double speed = std::sqrt(2.0 * c) / l;
  return {anchor.chart, p, {speed * std::cos(th), speed * std::sin(th)}};
}

std::optional<double> Section::crossing_function(const PhasePoint& s) const {
  auto q = to_anchor(*this, s);
  if (!q) return std::nullopt;
  return dot(q->pos - anchor.pos, vhat);
}

Section make_section(const Surface& surface, const PhasePoint& anchor, double half_width) {
  const double vn = norm(anchor.vel);
  if (!(vn > 0)) throw ValidationError("section anchor has zero velocity");
  if (!(half_width > 0)) throw ValidationError("section half-width must be positive");
  Section s;
  s.surface = surface;
  s.anchor = anchor;
  s.c = energy(surface, anchor);
  s.vhat = anchor.vel / vn;
  s.u = perp(s.vhat);
  const MetricData m = surface.metric(anchor.base());
  s.lambda0 = m.lambda;
  s.grad_log0 = m.grad_log;
  s.angle0 = std::atan2(anchor.vel.y, anchor.vel.x);
  s.half_width_y = half_width;
  s.half_width_z = half_width;
  return s;
}

ReturnResult first_return(const Section& sec, const Vec2& coords, const MagneticField& field,
                          const ReturnOptions& opts) {
  const PhasePoint s0 = sec.state(coords);
  const double dir = opts.direction >= 0 ? 1.0 : -1.0;
  std::optional<ReturnResult> found;

  auto g_of = [&](const PhasePoint& s) -> std::optional<double> {
    return sec.crossing_function(s);
  };
  auto seg_state = [](const Trajectory::Segment& seg, double t) {
    const auto y = seg.at(t);
    return PhasePoint{seg.chart, {y[0], y[1]}, {y[2], y[3]}};
  };

  auto observer = [&](const Trajectory::Segment& seg) -> bool {
    const PhasePoint sa = seg_state(seg, seg.t0), sb = seg_state(seg, seg.t1());
    const auto ga = g_of(sa), gb = g_of(sb);
    if (!ga || !gb) return false;
    const bool crossing = dir > 0 ? (*ga < 0 && *gb >= 0) : (*gb < 0 && *ga >= 0);
    if (!crossing) return false;
    // Lattice reduction can make g jump; a genuine crossing moves g by at most
    // the chart distance travelled.
    const double travel = std::abs(seg.h) * std::max(norm(sa.vel), norm(sb.vel));
    if (std::abs(*gb - *ga) > 1.5 * travel + 1e-12) return false;

    // Bisection on the dense output.
    double lo = seg.t0, hi = seg.t1();
    double glo = *ga;
    for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-15 * (1.0 + std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto gm = g_of(seg_state(seg, mid));
      if (!gm) return false;
      const bool same = dir > 0 ? ((*gm < 0) == (glo < 0)) : ((*gm >= 0) == (glo >= 0));
      if (same) {
        lo = mid;
        glo = *gm;
      } else {
        hi = mid;
      }
    }
    double t_star = 0.5 * (lo + hi);
    if (std::abs(t_star) < 1e-9) return false;  // the starting point itself
    {
      const auto q = sec.coords(seg_state(seg, t_star));
      if (!q || std::abs(q->x) > opts.capture) return false;
    }

    // Polish by re-integrating from the step start and Newton on g.
    const PhasePoint start = seg_state(seg, seg.t0);
    PhasePoint st = seg_state(seg, t_star);
    for (int it = 0; it < 6; ++it) {
      const double dt = t_star - seg.t0;
      st = dt == 0.0 ? start : flow(sec.surface, field, start, dt, opts.flow).final_state();
      const auto q = to_anchor(sec, st);
      if (!q) break;
      const double g = dot(q->pos - sec.anchor.pos, sec.vhat);
      const double gdot = dot(q->vel, sec.vhat);
      if (gdot == 0.0) break;
      const double step = -g / gdot;
      t_star += step;
      if (std::abs(step) <= opts.time_tol) {
        // One more evaluation at the corrected time keeps state and time consistent.
        const double dt2 = t_star - seg.t0;
        st = flow(sec.surface, field, start, dt2, opts.flow).final_state();
        break;
      }
    }
    const auto q = to_anchor(sec, st);
    const auto yz = sec.coords(st);
    if (!q || !yz) return false;
    found = ReturnResult{*yz, t_star, *q};
    return true;
  };

  flow(sec.surface, field, s0, dir * opts.max_time, opts.flow, observer);
  if (!found) throw NoReturnError("no return to the section within the time limit");
  return *found;
}

std::string to_string(FloquetClass c) {
  switch (c) {
    case FloquetClass::Hyperbolic: return "Hyperbolic";
    case FloquetClass::Elliptic: return "Elliptic";
    case FloquetClass::Parabolic: return "Parabolic";
  }
  return "Parabolic";
}

FloquetClass floquet_class_from_string(const std::string& s) {
  if (s == "Hyperbolic") return FloquetClass::Hyperbolic;
  if (s == "Elliptic") return FloquetClass::Elliptic;
  if (s == "Parabolic") return FloquetClass::Parabolic;
  throw ValidationError("unknown Floquet class: " + s);
}

Classification classify_trace(double tr, double class_tol) {
  Classification c;
  if (std::abs(tr) > 2.0 + class_tol) {
    c.cls = FloquetClass::Hyperbolic;
  } else if (std::abs(tr) < 2.0 - class_tol) {
    c.cls = FloquetClass::Elliptic;
    c.alpha = std::acos(tr / 2.0) / two_pi;
  } else {
    c.cls = FloquetClass::Parabolic;
  }
  return c;
}

Eigendata eigendata(const Mat2& m, FloquetClass cls) {
  Eigendata e;
  const double tr = m.trace();
  if (cls == FloquetClass::Hyperbolic) {
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * m.det()));
    double mu1 = 0.5 * (tr + disc), mu2 = 0.5 * (tr - disc);
    if (std::abs(mu1) < std::abs(mu2)) std::swap(mu1, mu2);
    auto eigvec = [&](double mu) {
      const Vec2 a{m.b, mu - m.a}, b{mu - m.d, m.c};
      Vec2 v = norm(a) >= norm(b) ? a : b;
      if (norm(v) == 0.0) v = {1.0, 0.0};
      v = v / norm(v);
      // Fix the sign: first nonzero component positive.
      if (v.x < 0 || (v.x == 0 && v.y < 0)) v = -v;
      return v;
    };
    e.lambda_u = mu1;
    e.lambda_s = mu2;
    e.e_u = eigvec(mu1);
    e.e_s = eigvec(mu2);
  } else if (cls == FloquetClass::Elliptic) {
    e.alpha = std::acos(std::clamp(tr / 2.0, -1.0, 1.0)) / two_pi;
  }
  return e;
}

Classification classify(const ClosedOrbit& orbit, double class_tol) {
  return classify_trace(orbit.monodromy.trace(), class_tol);
}

double phase_distance(const Surface& surface, const PhasePoint& a, const PhasePoint& b) {
  auto q = surface.to_chart(b, a.chart);
  if (!q) {
    auto p = surface.to_chart(a, b.chart);
    if (!p) return std::numeric_limits<double>::infinity();
    const Vec2 pos = surface.reduce_near(b.pos, p->pos);
    return std::max(norm(pos - p->pos), norm(b.vel - p->vel));
  }
  const Vec2 pos = surface.reduce_near(q->pos, a.pos);
  return std::max(norm(pos - a.pos), norm(q->vel - a.vel));
}

namespace {

// Finalize an orbit at a state believed periodic with approximate period.
ClosedOrbit finalize(const Surface& surface, const MagneticField& field, const PhasePoint& anchor,
                     const ShootingOptions& opts) {
  const Section sec = make_section(surface, anchor, opts.half_width);
  const ReturnResult r = first_return(sec, {0.0, 0.0}, field, opts.ret);
  double T = r.time;
  auto fv = flow_with_variation(surface, field, anchor, T, opts.ret.flow);
  // Minimal period: the largest divisor at which the orbit already closes.
  for (int k = 6; k >= 2; --k) {
    const PhasePoint s = fv.trajectory.state(T / k);
    if (phase_distance(surface, anchor, s) <= opts.subdivision_tol) {
      T /= k;
      fv = flow_with_variation(surface, field, anchor, T, opts.ret.flow);
      break;
    }
  }
  ClosedOrbit o;
  o.initial_state = anchor;
  o.energy = sec.c;
  o.period = T;
  o.monodromy = fv.variation.final_X();
  o.trace = o.monodromy.trace();
  const auto cl = classify_trace(o.trace, opts.class_tol);
  o.cls = cl.cls;
  o.eigen = eigendata(o.monodromy, o.cls);
  o.residual = phase_distance(surface, anchor, fv.trajectory.final_state());
  return o;
}

struct NewtonOutcome {
  Vec2 z;
  double residual;
  int iterations;
  bool converged;
  bool singular;
};

NewtonOutcome newton_fixed_point(const Section& sec, const MagneticField& field, double tol,
                                 const ShootingOptions& opts) {
  auto F = [&](const Vec2& z) { return first_return(sec, z, field, opts.ret).coords - z; };
  Vec2 z{0.0, 0.0};
  Vec2 Fz = F(z);
  double res = norm(Fz);
  double mu = 1e-8;
  bool singular = false;
  for (int it = 0; it < opts.max_iters; ++it) {
    if (res <= tol) return {z, res, it, true, false};
    const double h = opts.fd_step;
    const Vec2 c0 = (F(z + Vec2{h, 0}) - F(z - Vec2{h, 0})) / (2 * h);
    const Vec2 c1 = (F(z + Vec2{0, h}) - F(z - Vec2{0, h})) / (2 * h);
    const Mat2 A = Mat2::from_columns(c0, c1);  // Jacobian of P - id
    const double smax = spectral_norm(A);
    const double smin = std::abs(A.det()) / std::max(smax, 1e-300);
    if (smin <= 0 || smax / smin > opts.singular_threshold) {
      singular = true;
      return {z, res, it, false, true};
    }
    // Levenberg-Marquardt step with adaptive damping.
    bool accepted = false;
    for (int k = 0; k < 30; ++k) {
      const Mat2 At = A.transpose();
      Mat2 N = At * A;
      N.a += mu;
      N.d += mu;
      const Vec2 dz = -1.0 * (N.inverse() * (At * Fz));
      Vec2 znew = z + dz;
      if (std::abs(znew.x) > opts.ret.capture) break;
      Vec2 Fn;
      try {
        Fn = F(znew);
      } catch (const NoReturnError&) {
        mu *= 10.0;
        continue;
      }
      const double rn = norm(Fn);
      if (rn < res) {
        z = znew;
        Fz = Fn;
        res = rn;
        mu = std::max(mu * 0.1, 1e-14);
        accepted = true;
        break;
      }
      mu *= 10.0;
    }
    if (!accepted) return {z, res, it, res <= tol, singular};
  }
  return {z, res, opts.max_iters, res <= tol, singular};
}

}  // namespace

ClosedOrbit find_closed_orbit(const Surface& surface, const MagneticField& field, double c,
                              const PhasePoint& seed, double tol, const ShootingOptions& opts) {
  if (!(c > 0)) throw ValidationError("energy level must be positive");
  const PhasePoint s0 = on_energy_level(surface, seed, c);
  const Section sec = make_section(surface, s0, opts.half_width);
  const NewtonOutcome n = newton_fixed_point(sec, field, tol, opts);
  if (!n.converged && !n.singular)
    throw NewtonDivergence("closed-orbit shooting did not converge (residual " +
                           std::to_string(n.residual) + ")");
  ClosedOrbit o = finalize(surface, field, sec.state(n.z), opts);
  o.newton_iterations = n.iterations;
  if (!n.converged) o.status = "parabolic-suspect";
  return o;
}

ClosedOrbit analyze_periodic_state(const Surface& surface, const MagneticField& field,
                                   const PhasePoint& state, double period_guess,
                                   const ShootingOptions& opts) {
  ShootingOptions o = opts;
  if (period_guess > 0) o.ret.max_time = std::max(o.ret.max_time, 1.5 * period_guess);
  return finalize(surface, field, state, o);
}

ClosedOrbit continue_orbit(const Surface& surface, const ClosedOrbit& orbit,
                           const MagneticField& new_field, double tol,
                           const ShootingOptions& opts) {
  ShootingOptions o = opts;
  o.ret.max_time = std::max(o.ret.max_time, 2.0 * orbit.period);
  try {
    const Section sec = make_section(surface, orbit.initial_state, o.half_width);
    const NewtonOutcome n = newton_fixed_point(sec, new_field, tol, o);
    if (!n.converged) throw ContinuationLost("continuation lost: Newton failed");
    ClosedOrbit out = finalize(surface, new_field, sec.state(n.z), o);
    out.newton_iterations = n.iterations;
    out.displacement = phase_distance(surface, orbit.initial_state, out.initial_state);
    return out;
  } catch (const ContinuationLost&) {
    throw;
  } catch (const NumericalError& e) {
    throw ContinuationLost(std::string("continuation lost: ") + e.what());
  }
}

std::vector<PhasePoint> generate_seeds(const Surface& surface, double c,
                                       const std::vector<ChartPoint>& base_points,
                                       int directions) {
  if (directions < 1) throw ValidationError("need at least one seed direction");
  std::vector<PhasePoint> out;
  for (const auto& b : base_points) {
    const double l = surface.conformal_factor(b);
    const double speed = std::sqrt(2.0 * c) / l;
    for (int k = 0; k < directions; ++k) {
      const double a = two_pi * k / directions;
      out.push_back({b.chart, b.pos, {speed * std::cos(a), speed * std::sin(a)}});
    }
  }
  return out;
}

bool OrbitDatabase::add(const Surface& surface, const MagneticField& field,
                        const ClosedOrbit& orbit, double tol) {
  for (const auto& o : orbits_) {
    if (std::abs(o.period - orbit.period) > 1e3 * tol * std::max(1.0, o.period)) continue;
    FlowOptions fo;
    const auto tr = flow(surface, field, o.initial_state, o.period, fo);
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
      if (phase_distance(surface, tr.state(o.period * i / n), orbit.initial_state) <
          1e-3 * std::max(1.0, o.period))
        return false;
    }
  }
  orbits_.push_back(orbit);
  std::stable_sort(orbits_.begin(), orbits_.end(), [](const ClosedOrbit& a, const ClosedOrbit& b) {
    if (a.period != b.period) return a.period < b.period;
    return a.trace < b.trace;
  });
  return true;
}

OrbitDatabase search_orbits(const Surface& surface, const MagneticField& field, double c,
                            const std::vector<PhasePoint>& seeds, double tol,
                            const ShootingOptions& opts, int workers) {
  auto results = parallel_map<std::optional<ClosedOrbit>>(
      seeds.size(), workers, [&](std::size_t i) -> std::optional<ClosedOrbit> {
        try {
          auto o = find_closed_orbit(surface, field, c, seeds[i], tol, opts);
          if (o.status != "converged") return std::nullopt;
          return o;
        } catch (const NumericalError&) {
          return std::nullopt;
        }
      });
  OrbitDatabase db;
  for (const auto& r : results)
    if (r) db.add(surface, field, *r, tol);
  return db;
}

}  // namespace maglab
