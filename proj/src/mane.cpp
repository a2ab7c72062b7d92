//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file mane.cpp
//---------------------------------------------------------------------------//
#include "maglab/mane.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>
#include <gsl/gsl_multimin.h>
#include <spdlog/spdlog.h>

#include "maglab/dynamics.hpp"
#include "maglab/errors.hpp"
#include "maglab/parallel.hpp"

namespace maglab {

//---------------------------------------------------------------------------//
// Lagrangian
//---------------------------------------------------------------------------//

Lagrangian::Lagrangian(Surface torus, Vec2 closed, std::vector<OneFormTerm> terms)
    : surface_(std::move(torus)), closed_(closed), terms_(std::move(terms)) {
  if (surface_.topology() != Topology::Torus)
    throw UnsupportedError("magnetic Lagrangians are implemented on the torus only");
}

Lagrangian Lagrangian::for_field(const Surface& torus, const MagneticField& field, Vec2 closed) {
  if (torus.topology() != Topology::Torus)
    throw UnsupportedError("magnetic Lagrangians are implemented on the torus only");
  if (!field.perturbations().empty())
    throw UnsupportedError("no closed-form primitive for perturbed fields");
  const auto data = field.fourier_data();
  if (!data) throw UnsupportedError("primitive needs a sinusoidal or constant field");
  const auto& [modes, offset] = *data;
  if (offset != 0.0)
    throw DomainError("field has nonzero mean " + std::to_string(offset) + "; it is not exact");
  if (!modes.empty() && torus.bump() != 0.0)
    throw UnsupportedError("closed-form primitive needs a flat torus");
  const Vec2 per = torus.periods();
  std::vector<OneFormTerm> terms;
  for (const auto& m : modes) {
    const Vec2 K{two_pi * m.kx / per.x, two_pi * m.ky / per.y};
    const double K2 = dot(K, K);
    if (K2 == 0.0) {
      if (m.amplitude * std::sin(m.phase) != 0.0)
        throw DomainError("constant Fourier mode gives a nonzero mean; field is not exact");
      continue;
    }
    // d(c cos(K.x + phase)) = -sin(..) (c_y K_x - c_x K_y) dx^dy.
    terms.push_back({Vec2{K.y, -K.x} * (m.amplitude / K2), m.kx, m.ky, m.phase});
  }
  return Lagrangian(torus, closed, std::move(terms));
}

namespace {

struct TermEval {
  double c, s;
  Vec2 K;
};

TermEval term_at(const Surface& surface, const OneFormTerm& t, const Vec2& x) {
  const Vec2 per = surface.periods();
  const Vec2 K{two_pi * t.kx / per.x, two_pi * t.ky / per.y};
  const double arg = dot(K, x) + t.phase;
  return {std::cos(arg), std::sin(arg), K};
}

}  // namespace

Vec2 Lagrangian::eta(const Vec2& x) const {
  Vec2 out = closed_;
  for (const auto& t : terms_) out += term_at(surface_, t, x).c * t.coeff;
  return out;
}

Mat2 Lagrangian::deta(const Vec2& x) const {
  Mat2 out;
  for (const auto& t : terms_) {
    const auto e = term_at(surface_, t, x);
    out += -e.s * Mat2{t.coeff.x * e.K.x, t.coeff.x * e.K.y, t.coeff.y * e.K.x, t.coeff.y * e.K.y};
  }
  return out;
}

double Lagrangian::field(const Vec2& x) const {
  const Mat2 d = deta(x);
  const double lam = surface_.conformal_factor({0, x});
  return (d.c - d.b) / (lam * lam);
}

double Lagrangian::eval(const Vec2& x, const Vec2& v) const {
  const double lam = surface_.conformal_factor({0, x});
  return 0.5 * lam * lam * dot(v, v) - dot(eta(x), v);
}

//---------------------------------------------------------------------------//
// Loops and actions
//---------------------------------------------------------------------------//

FourierLoop FourierLoop::circle(const Vec2& center, double radius, double speed) {
  if (!(radius > 0) || !(speed > 0)) throw ValidationError("circle needs positive radius and speed");
  FourierLoop l;
  l.center = center;
  l.a = {{radius, 0.0}};
  l.b = {{0.0, radius}};
  l.period = two_pi * radius / speed;
  return l;
}

Vec2 FourierLoop::position(double t) const {
  Vec2 out = center;
  const double w = two_pi / period;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double arg = w * (j + 1) * t;
    out += std::cos(arg) * a[j] + std::sin(arg) * b[j];
  }
  return out;
}

Vec2 FourierLoop::velocity(double t) const {
  Vec2 out;
  const double w = two_pi / period;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double wj = w * (j + 1), arg = wj * t;
    out += wj * (std::cos(arg) * b[j] - std::sin(arg) * a[j]);
  }
  return out;
}

namespace {

LoopEnergies energies_fixed(const Lagrangian& L, const FourierLoop& loop, int n) {
  LoopEnergies e;
  e.nodes = n;
  for (int i = 0; i < n; ++i) {
    const double t = loop.period * i / n;
    const Vec2 x = loop.position(t);
    const Vec2 v = loop.period * loop.velocity(t);  // unit-period shape
    const double lam = L.surface().conformal_factor({0, x});
    e.kinetic += 0.5 * lam * lam * dot(v, v);
    e.flux += dot(L.eta(x), v);
  }
  e.kinetic /= n;
  e.flux /= n;
  return e;
}

}  // namespace

LoopEnergies loop_energies(const Lagrangian& L, const FourierLoop& loop, double tol) {
  if (!(loop.period > 0)) throw ValidationError("loop period must be positive");
  LoopEnergies prev = energies_fixed(L, loop, 64);
  for (int n = 128; n <= (1 << 18); n *= 2) {
    const LoopEnergies next = energies_fixed(L, loop, n);
    const bool done = std::abs(next.kinetic - prev.kinetic) <= tol * std::max(1.0, next.kinetic) &&
                      std::abs(next.flux - prev.flux) <= tol * std::max(1.0, std::abs(next.flux));
    prev = next;
    if (done) return prev;
  }
  spdlog::warn("loop quadrature did not settle at {} nodes", prev.nodes);
  return prev;
}

double loop_action(const Lagrangian& L, const FourierLoop& loop, double k, double tol) {
  const LoopEnergies e = loop_energies(L, loop, tol);
  return e.kinetic / loop.period - e.flux + k * loop.period;
}

//---------------------------------------------------------------------------//
// Loop minimization
//---------------------------------------------------------------------------//

namespace {

FourierLoop unpack(const double* x, int modes) {
  FourierLoop l;
  l.center = {x[0], x[1]};
  for (int j = 0; j < modes; ++j) {
    l.a.push_back({x[2 + 4 * j], x[3 + 4 * j]});
    l.b.push_back({x[4 + 4 * j], x[5 + 4 * j]});
  }
  return l;
}

std::vector<double> pack(const FourierLoop& l, int modes) {
  std::vector<double> x(2 + 4 * modes, 0.0);
  x[0] = l.center.x;
  x[1] = l.center.y;
  for (int j = 0; j < modes && j < static_cast<int>(l.a.size()); ++j) {
    x[2 + 4 * j] = l.a[j].x;
    x[3 + 4 * j] = l.a[j].y;
    x[4 + 4 * j] = l.b[j].x;
    x[5 + 4 * j] = l.b[j].y;
  }
  return x;
}

// Best period for a shape at k > 0, and the resulting action.
std::pair<double, double> optimal_period(const LoopEnergies& e, double k) {
  if (k > 0) {
    const double T = std::sqrt(std::max(e.kinetic, 1e-300) / k);
    return {T, 2.0 * std::sqrt(k * e.kinetic) - e.flux};
  }
  // k = 0: the infimum -flux is approached as T grows; take T = 4E / flux.
  if (e.flux > 0) return {4.0 * e.kinetic / e.flux, -0.75 * e.flux};
  return {1.0, std::numeric_limits<double>::infinity()};
}

struct Objective {
  const Lagrangian* L;
  double k;
  int modes, nodes;
  long evals = 0;
};

double objective(const gsl_vector* v, void* params) {
  auto* o = static_cast<Objective*>(params);
  ++o->evals;
  FourierLoop shape = unpack(v->data, o->modes);
  shape.period = 1.0;
  const double a = optimal_period(energies_fixed(*o->L, shape, o->nodes), o->k).second;
  return std::isfinite(a) ? a : 1e6;
}

struct RestartResult {
  FourierLoop loop;
  double action = std::numeric_limits<double>::infinity();
  long evals = 0;
};

FourierLoop finish(const Lagrangian& L, FourierLoop shape, double k, double* action) {
  shape.period = 1.0;
  const auto [T, a] = optimal_period(loop_energies(L, shape), k);
  (void)a;
  shape.period = T;
  *action = loop_action(L, shape, k);
  return shape;
}

RestartResult descend(const Lagrangian& L, double k, const LoopSearch& s, std::vector<double> x0) {
  Objective obj{&L, k, s.modes, s.nodes};
  const std::size_t n = x0.size();
  gsl_multimin_function fn{&objective, n, &obj};
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* step = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x, i, x0[i]);
  gsl_vector_set_all(step, s.step);
  gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(m, &fn, x, step);
  while (obj.evals < s.max_evals) {
    if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
    // Any clearly negative action settles the question at this k.
    if (m->fval < -1e-6) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-9) == GSL_SUCCESS) break;
  }
  RestartResult r;
  r.loop = finish(L, unpack(m->x->data, s.modes), k, &r.action);
  r.evals = obj.evals;
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(x);
  gsl_vector_free(step);
  return r;
}

std::vector<double> random_start(const Lagrangian& L, const LoopSearch& s, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Vec2 per = L.surface().periods();
  const double r = (0.05 + 0.35 * uni(rng)) * std::min(per.x, per.y);
  const double orient = uni(rng) < 0.5 ? -1.0 : 1.0;
  FourierLoop l = FourierLoop::circle({per.x * uni(rng), per.y * uni(rng)}, r, 1.0);
  l.b[0].y *= orient;
  for (int j = 2; j <= s.modes; ++j) {
    const double amp = 0.05 * r / j;
    l.a.push_back({amp * gauss(rng), amp * gauss(rng)});
    l.b.push_back({amp * gauss(rng), amp * gauss(rng)});
  }
  return pack(l, s.modes);
}

}  // namespace

LoopMinimum minimize_loop_action(const Lagrangian& L, double k, const LoopSearch& s,
                                 const std::vector<FourierLoop>& hints) {
  if (s.modes < 1 || s.restarts < 1 || s.nodes < 8) throw ValidationError("invalid loop search");
  LoopMinimum out;
  if (k < 0) {
    // A rest point held for unit time.
    out.loop.center = {0, 0};
    out.loop.period = 1.0;
    out.action = loop_action(L, out.loop, k);
    out.negative = out.action < -s.margin;
    return out;
  }
  for (const auto& h : hints) {
    double a;
    FourierLoop l = finish(L, h, k, &a);
    if (a < -s.margin) return {true, l, a, 0};
  }
  out.action = std::numeric_limits<double>::infinity();
  // Fixed batches keep the outcome independent of the worker count.
  const std::size_t batch = 8;
  for (std::size_t b0 = 0; b0 < static_cast<std::size_t>(s.restarts); b0 += batch) {
    const std::size_t nb = std::min(batch, static_cast<std::size_t>(s.restarts) - b0);
    const auto results = parallel_map<RestartResult>(nb, s.workers, [&](std::size_t i) {
      const std::size_t idx = b0 + i;
      return descend(L, k, s, idx < hints.size() ? pack(hints[idx], s.modes) : random_start(L, s, idx));
    });
    for (const auto& r : results) {
      out.evaluations += r.evals;
      if (r.action < out.action) {
        out.action = r.action;
        out.loop = r.loop;
      }
    }
    if (out.action < -s.margin) break;
  }
  out.negative = out.action < -s.margin;
  return out;
}

CriticalBracket estimate_critical_value(const Lagrangian& L, double k_lo, double k_hi,
                                        const LoopSearch& s, double tol) {
  if (!(k_lo < k_hi)) throw ValidationError("k_range must satisfy k_lo < k_hi");
  if (!(tol > 0)) throw ValidationError("bisection_tol must be positive");
  CriticalBracket br;
  br.restarts = s.restarts;
  std::vector<FourierLoop> hints;
  auto test = [&](double k) {
    LoopMinimum m = minimize_loop_action(L, k, s, hints);
    br.evaluations += m.evaluations;
    if (m.negative) {
      FourierLoop shape = m.loop;
      shape.period = 1.0;
      hints.insert(hints.begin(), shape);
    }
    return m;
  };
  const LoopMinimum lo = test(k_lo);
  if (!lo.negative)
    throw ValidationError(fmt::format("k_range does not bracket: no negative loop at k_lo = {}", k_lo));
  if (test(k_hi).negative)
    throw ValidationError(fmt::format("k_range does not bracket: negative loop at k_hi = {}", k_hi));
  br.c_lo = k_lo;
  br.c_hi = k_hi;
  br.has_witness = true;
  br.witness = lo.loop;
  br.witness_action = lo.action;
  while (br.c_hi - br.c_lo > tol) {
    const double mid = 0.5 * (br.c_lo + br.c_hi);
    const LoopMinimum m = test(mid);
    ++br.bisection_steps;
    spdlog::debug("critical value bisection k = {}: min action {}", mid, m.action);
    if (m.negative) {
      br.c_lo = mid;
      br.witness = m.loop;
      br.witness_action = m.action;
    } else {
      br.c_hi = mid;
    }
  }
  br.c_hi_label = fmt::format("no-negative-loop-found up to effort {} restarts x {} evaluations, {} modes",
                              s.restarts, s.max_evals, s.modes);
  return br;
}

//---------------------------------------------------------------------------//
// Rotation vectors
//---------------------------------------------------------------------------//

RotationVector rotation_vector(const Surface& surface, const MagneticField& field,
                               const ClosedOrbit& orbit, int max_cover, double close_tol) {
  if (surface.topology() != Topology::Torus)
    throw UnsupportedError("rotation vectors are defined for torus orbits only");
  if (!(orbit.period > 0)) throw ValidationError("orbit period must be positive");
  const Trajectory traj = flow(surface, field, orbit.initial_state, orbit.period);
  // Unwrap through the lattice with sub-step sampling.
  Vec2 prev = orbit.initial_state.pos, disp;
  const auto grid = traj.time_grid();
  for (std::size_t i = 1; i < grid.size(); ++i)
    for (int j = 1; j <= 4; ++j) {
      const double t = grid[i - 1] + (grid[i] - grid[i - 1]) * j / 4.0;
      const Vec2 pos = surface.reduce_near(traj.state(t).pos, prev);
      disp += pos - prev;
      prev = pos;
    }
  const Vec2 per = surface.periods();
  const Vec2 w{disp.x / per.x, disp.y / per.y};
  RotationVector rv;
  rv.p = static_cast<int>(std::lround(w.x));
  rv.q = static_cast<int>(std::lround(w.y));
  if (std::abs(w.x - rv.p) > 1e-4 || std::abs(w.y - rv.q) > 1e-4)
    throw NumericalError(fmt::format("orbit does not close in the lift: winding ({}, {})", w.x, w.y));
  rv.period = orbit.period;
  for (int n = max_cover; n >= 2; --n) {
    if (rv.p % n != 0 || rv.q % n != 0) continue;
    if (phase_distance(surface, orbit.initial_state, traj.state(orbit.period / n)) <= close_tol) {
      rv.multiplicity = n;
      rv.p /= n;
      rv.q /= n;
      rv.period /= n;
      break;
    }
  }
  rv.rho = Vec2{static_cast<double>(rv.p), static_cast<double>(rv.q)} / rv.period;
  return rv;
}

}  // namespace maglab
