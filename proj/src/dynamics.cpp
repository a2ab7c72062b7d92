//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file dynamics.cpp
//---------------------------------------------------------------------------//
#include "maglab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "maglab/errors.hpp"

namespace maglab {

std::pair<Vec2, Vec2> magnetic_acceleration(const Surface& surface, const MagneticField& field,
                                            const PhasePoint& s) {
  const ChartPoint p = s.base();
  const MetricData m = surface.metric(p);
  const FieldValue fv = field.eval(surface, p);
  const Vec2& v = s.vel;
  const Vec2& gp = m.grad_log;
  const Vec2 acc = -2.0 * dot(v, gp) * v + dot(v, v) * gp + fv.f * perp(v);
  return {v, acc};
}

double magnetic_curvature_at(const Surface& surface, const MagneticField& field,
                             const PhasePoint& s) {
  const ChartPoint p = s.base();
  const MetricData m = surface.metric(p);
  const FieldValue fv = field.eval(surface, p);
  const double two_c = m.lambda * m.lambda * dot(s.vel, s.vel);
  return two_c * m.curvature - dot(fv.grad, perp(s.vel)) + fv.f * fv.f;
}

PhasePoint on_energy_level(const Surface& surface, PhasePoint s, double c) {
  const double l = surface.conformal_factor(s.base());
  const double speed = l * norm(s.vel);
  if (!(speed > 0)) throw ValidationError("zero velocity has no energy level");
  s.vel *= std::sqrt(2.0 * c) / speed;
  return s;
}

namespace {

template <class Seg>
std::size_t find_segment(const std::vector<Seg>& segs, double t) {
  if (segs.empty()) throw NumericalError("empty trajectory");
  const bool forward = segs.front().h > 0;
  // Segments are ordered in integration order; t1 is monotone in that order.
  auto it = std::lower_bound(segs.begin(), segs.end(), t, [&](const Seg& s, double v) {
    return forward ? s.t1() < v : s.t1() > v;
  });
  if (it == segs.end()) return segs.size() - 1;
  return static_cast<std::size_t>(it - segs.begin());
}

}  // namespace

std::size_t Trajectory::segment_index(double t) const { return find_segment(segments_, t); }

PhasePoint Trajectory::state(double t) const {
  const PhasePoint s = raw_state(t);
  if (!level_surface_ || segments_.empty() || !level_surface_->contains(s.base())) return s;
  return on_energy_level(*level_surface_, s, c_);
}

PhasePoint Trajectory::raw_state(double t) const {
  if (segments_.empty()) return initial_;
  const double lo = std::min(t_start_, t_end_), hi = std::max(t_start_, t_end_);
  t = std::clamp(t, lo, hi);
  if (t == t_end_) return final_;
  const auto& seg = segments_[segment_index(t)];
  const auto y = seg.at(t);
  return {seg.chart, {y[0], y[1]}, {y[2], y[3]}};
}

std::vector<double> Trajectory::time_grid() const {
  std::vector<double> g;
  g.reserve(segments_.size() + 1);
  g.push_back(t_start_);
  for (const auto& s : segments_) g.push_back(s.t1());
  if (!g.empty()) g.back() = t_end_;
  return g;
}

std::size_t VariationalPath::segment_index(double t) const { return find_segment(segments_, t); }

Mat2 VariationalPath::X(double t) const {
  if (segments_.empty()) return Mat2::identity();
  const double lo = std::min(t_start_, t_end_), hi = std::max(t_start_, t_end_);
  t = std::clamp(t, lo, hi);
  const auto y = segments_[segment_index(t)].at(t);
  return {y[0], y[1], y[2], y[3]};
}

Vec2 VariationalPath::drift(double t) const {
  if (segments_.empty()) return {};
  const double lo = std::min(t_start_, t_end_), hi = std::max(t_start_, t_end_);
  t = std::clamp(t, lo, hi);
  const auto y = segments_[segment_index(t)].at(t);
  return {y[4], y[5]};
}

Mat2 VariationalPath::final_X() const { return X(t_end_); }

class FlowEngine {
 public:
  template <bool WithVar>
  static FlowWithVariation run(const Surface& surface, const MagneticField& field,
                               const PhasePoint& state, double t_final, const FlowOptions& opts,
                               const StepObserver& observer) {
    constexpr std::size_t N = WithVar ? 10 : 4;
    if (!surface.contains(state.base())) throw DomainError("initial state outside the chart");
    const double c = energy(surface, state);
    if (!(c > 0) || !std::isfinite(c)) throw ValidationError("initial energy must be positive");
    if (!std::isfinite(t_final)) throw ValidationError("final time must be finite");

    FlowWithVariation out;
    Trajectory& tr = out.trajectory;
    VariationalPath& vp = out.variation;
    tr.c_ = c;
    if (opts.renormalize) tr.level_surface_ = surface;
    tr.t_start_ = 0.0;
    tr.t_end_ = 0.0;
    tr.initial_ = state;
    tr.final_ = state;
    vp.t_start_ = 0.0;
    vp.t_end_ = 0.0;

    PhasePoint start = state;
    {
      const int pc = surface.preferred_chart(start.base());
      if (pc != start.chart)
        if (auto q = surface.to_chart(start, pc)) start = *q;
    }
    int chart = start.chart;

    State<N> y{};
    y[0] = start.pos.x;
    y[1] = start.pos.y;
    y[2] = start.vel.x;
    y[3] = start.vel.y;
    if constexpr (WithVar) {
      y[4] = 1.0;
      y[7] = 1.0;
    }

    auto rhs = [&](const State<N>& u, State<N>& du) {
      const PhasePoint s{chart, {u[0], u[1]}, {u[2], u[3]}};
      const ChartPoint p = s.base();
      const MetricData m = surface.metric(p);
      const FieldValue fv = field.eval(surface, p);
      const Vec2 v = s.vel;
      const Vec2 acc = -2.0 * dot(v, m.grad_log) * v + dot(v, v) * m.grad_log + fv.f * perp(v);
      du[0] = v.x;
      du[1] = v.y;
      du[2] = acc.x;
      du[3] = acc.y;
      if constexpr (WithVar) {
        const double two_c = m.lambda * m.lambda * dot(v, v);
        const double K = two_c * m.curvature - dot(fv.grad, perp(v)) + fv.f * fv.f;
        du[4] = u[6];
        du[5] = u[7];
        du[6] = -K * u[4];
        du[7] = -K * u[5];
        du[8] = fv.f * u[4];
        du[9] = fv.f * u[5];
      }
    };

    IntegratorOptions io;
    io.rel_tol = opts.rel_tol;
    io.abs_tol = opts.abs_tol;
    io.max_step = opts.max_step;

    bool exited = false, stopped = false;
    double t_reached = 0.0;
    auto hook = [&](const DenseSegment<N>& seg, State<N>& yend) -> StepAction {
      Trajectory::Segment ps;
      ps.t0 = seg.t0;
      ps.h = seg.h;
      ps.chart = chart;
      for (int k = 0; k < 5; ++k)
        for (int i = 0; i < 4; ++i) ps.rc[k][i] = seg.rc[k][i];
      tr.segments_.push_back(ps);
      if constexpr (WithVar) {
        VariationalPath::Segment vs;
        vs.t0 = seg.t0;
        vs.h = seg.h;
        vs.chart = chart;
        for (int k = 0; k < 5; ++k)
          for (int i = 0; i < 6; ++i) vs.rc[k][i] = seg.rc[k][i + 4];
        vp.segments_.push_back(vs);
      }
      t_reached = seg.t1();

      PhasePoint s{chart, {yend[0], yend[1]}, {yend[2], yend[3]}};
      if (!surface.contains(s.base())) {
        exited = true;
        tr.final_ = s;
        return StepAction::Stop;
      }
      const double e = energy(surface, s);
      tr.max_drift_ = std::max(tr.max_drift_, std::abs(e - c));
      StepAction act = StepAction::Continue;
      if (opts.renormalize) {
        s = on_energy_level(surface, s, c);
        act = StepAction::Modified;
      }
      const int pc = surface.preferred_chart(s.base());
      if (pc != chart) {
        if (auto q = surface.to_chart(s, pc)) {
          s = *q;
          chart = pc;
          act = StepAction::Modified;
        }
      }
      yend[0] = s.pos.x;
      yend[1] = s.pos.y;
      yend[2] = s.vel.x;
      yend[3] = s.vel.y;
      tr.final_ = s;
      if (observer && observer(ps)) {
        stopped = true;
        return StepAction::Stop;
      }
      return act;
    };

    try {
      dopri5<N>(rhs, y, 0.0, t_final, io, tr.stats_, hook);
    } catch (const DomainError&) {
      // A trial stage left the planar domain.
      if (surface.topology() != Topology::PlanarChart) throw;
      exited = true;
    }
    tr.exited_ = exited;
    tr.stopped_ = stopped;
    tr.t_end_ = tr.segments_.empty() ? 0.0 : t_reached;
    vp.t_end_ = tr.t_end_;
    return out;
  }
};

Trajectory flow(const Surface& surface, const MagneticField& field, const PhasePoint& state,
                double t_final, const FlowOptions& opts, const StepObserver& observer) {
  return FlowEngine::run<false>(surface, field, state, t_final, opts, observer).trajectory;
}

FlowWithVariation flow_with_variation(const Surface& surface, const MagneticField& field,
                                      const PhasePoint& state, double t_final,
                                      const FlowOptions& opts, const StepObserver& observer) {
  return FlowEngine::run<true>(surface, field, state, t_final, opts, observer);
}

double magnetic_curvature(const Surface& surface, const MagneticField& field,
                          const Trajectory& trajectory, double t) {
  return magnetic_curvature_at(surface, field, trajectory.state(t));
}

double field_sup_norm(const Surface& surface, const MagneticField& field, int n,
                      double inflation) {
  double sup = 0.0, inf = std::numeric_limits<double>::infinity();
  auto take = [&](double f) {
    sup = std::max(sup, std::abs(f));
    inf = std::min(inf, std::abs(f));
  };
  switch (surface.topology()) {
    case Topology::Torus: {
      const Vec2 per = surface.periods();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          take(field.eval(surface, {0, {per.x * i / n, per.y * j / n}}).f);
      break;
    }
    case Topology::Sphere: {
      // Each chart's closed unit disk covers a hemisphere.
      for (int chart = 0; chart < 2; ++chart)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const Vec2 p{-1.0 + 2.0 * (i + 0.5) / n, -1.0 + 2.0 * (j + 0.5) / n};
            if (dot(p, p) > 1.0) continue;
            take(field.eval(surface, {chart, p}).f);
          }
      break;
    }
    case Topology::PlanarChart: {
      const double R = surface.domain_radius();
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
          const Vec2 p{R * (-1.0 + 2.0 * i / n), R * (-1.0 + 2.0 * j / n)};
          if (norm(p) > R) continue;
          take(field.eval(surface, {0, p}).f);
        }
      break;
    }
  }
  // Sampling is exact when |f| is constant.
  if (sup == inf) return sup;
  return sup * inflation;
}

double injectivity_time(const Surface& surface, const MagneticField& field, double c,
                        const InjectivityOptions& opts) {
  if (!(c > 0)) throw ValidationError("energy level must be positive");
  const double fsup = opts.f_sup >= 0
                          ? opts.f_sup
                          : field_sup_norm(surface, field, opts.samples_per_axis, opts.inflation);
  const double first = 1.0 / ((fsup + 1.0) * (fsup + 1.0));
  const double denom = opts.sqrt_variant ? std::sqrt(2.0 * c) : 2.0 * c;
  const double second = surface.injectivity_radius() / denom;
  return std::min(first, second);
}

}  // namespace maglab
