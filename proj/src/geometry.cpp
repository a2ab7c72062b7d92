//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file geometry.cpp
//---------------------------------------------------------------------------//
#include "maglab/geometry.hpp"

#include <cmath>
#include <complex>

#include "maglab/errors.hpp"

namespace maglab {
namespace {

// Sphere charts cover |z| <= this radius; the overlap is 1/R < |z| < R.
constexpr double kSphereChartRadius = 4.0;
// Integrators leave a sphere chart once |z| exceeds this value.
constexpr double kSphereSwitchRadius = 1.5;

struct LambdaJet {
  double l, lx, ly, lxx, lxy, lyy;
};

MetricData assemble(const LambdaJet& j) {
  MetricData m;
  m.lambda = j.l;
  m.dlambda = {j.lx, j.ly};
  m.lxx = j.lxx;
  m.lxy = j.lxy;
  m.lyy = j.lyy;
  const double inv = 1.0 / j.l;
  m.grad_log = {j.lx * inv, j.ly * inv};
  const double lap_log = (j.lxx + j.lyy) * inv - (j.lx * j.lx + j.ly * j.ly) * inv * inv;
  m.curvature = -lap_log * inv * inv;
  // Conformal metric: Gamma^x = [[px, py], [py, -px]], Gamma^y = [[-py, px], [px, py]]
  // with (px, py) = grad log lambda.
  const double px = m.grad_log.x, py = m.grad_log.y;
  m.christoffel[0] = {{{px, py}, {py, -px}}};
  m.christoffel[1] = {{{-py, px}, {px, py}}};
  return m;
}

}  // namespace

std::string to_string(Topology t) {
  switch (t) {
    case Topology::Torus: return "torus";
    case Topology::Sphere: return "sphere";
    case Topology::PlanarChart: return "planar";
  }
  return "unknown";
}

Surface Surface::torus(double lx, double ly, double bump) {
  if (!(lx > 0) || !(ly > 0)) throw ValidationError("torus periods must be positive");
  if (!(std::abs(bump) < 1.0)) throw ValidationError("torus bump amplitude must satisfy |a| < 1");
  Surface s;
  s.topology_ = Topology::Torus;
  s.lx_ = lx;
  s.ly_ = ly;
  s.bump_ = bump;
  s.injectivity_radius_ = 0.5 * std::min(lx, ly);
  return s;
}

Surface Surface::sphere(double radius) {
  if (!(radius > 0)) throw ValidationError("sphere radius must be positive");
  Surface s;
  s.topology_ = Topology::Sphere;
  s.radius_ = radius;
  s.injectivity_radius_ = pi * radius;
  return s;
}

Surface Surface::planar(double domain_radius, double injectivity_radius) {
  if (!(domain_radius > 0)) throw ValidationError("planar domain radius must be positive");
  if (!(injectivity_radius > 0)) throw ValidationError("injectivity radius must be positive");
  Surface s;
  s.topology_ = Topology::PlanarChart;
  s.domain_radius_ = domain_radius;
  s.injectivity_radius_ = injectivity_radius;
  return s;
}

bool Surface::contains(const ChartPoint& p) const {
  if (!std::isfinite(p.pos.x) || !std::isfinite(p.pos.y)) return false;
  if (p.chart < 0 || p.chart >= chart_count()) return false;
  switch (topology_) {
    case Topology::Torus: return true;
    case Topology::Sphere: return norm(p.pos) <= kSphereChartRadius;
    case Topology::PlanarChart: return norm(p.pos) <= domain_radius_;
  }
  return false;
}

double Surface::conformal_factor(const ChartPoint& p) const {
  switch (topology_) {
    case Topology::Torus: {
      if (bump_ == 0.0) return 1.0;
      return 1.0 + bump_ * std::cos(two_pi * p.pos.x / lx_) * std::cos(two_pi * p.pos.y / ly_);
    }
    case Topology::Sphere: return 2.0 * radius_ / (1.0 + dot(p.pos, p.pos));
    case Topology::PlanarChart: return 1.0;
  }
  return 1.0;
}

MetricData Surface::metric(const ChartPoint& p) const {
  if (!contains(p)) throw DomainError("point outside chart domain");
  switch (topology_) {
    case Topology::Torus: {
      if (bump_ == 0.0) return assemble({1, 0, 0, 0, 0, 0});
      const double kx = two_pi / lx_, ky = two_pi / ly_;
      const double cx = std::cos(kx * p.pos.x), sx = std::sin(kx * p.pos.x);
      const double cy = std::cos(ky * p.pos.y), sy = std::sin(ky * p.pos.y);
      const double a = bump_;
      return assemble({1.0 + a * cx * cy, -a * kx * sx * cy, -a * ky * cx * sy,
                       -a * kx * kx * cx * cy, a * kx * ky * sx * sy, -a * ky * ky * cx * cy});
    }
    case Topology::Sphere: {
      const double x = p.pos.x, y = p.pos.y;
      const double q = 1.0 + x * x + y * y;
      const double R = radius_;
      const double q2 = q * q, q3 = q2 * q;
      return assemble({2.0 * R / q, -4.0 * R * x / q2, -4.0 * R * y / q2,
                       -4.0 * R / q2 + 16.0 * R * x * x / q3, 16.0 * R * x * y / q3,
                       -4.0 * R / q2 + 16.0 * R * y * y / q3});
    }
    case Topology::PlanarChart: return assemble({1, 0, 0, 0, 0, 0});
  }
  return assemble({1, 0, 0, 0, 0, 0});
}

std::optional<ChartPoint> Surface::to_chart(const ChartPoint& p, int target) const {
  if (p.chart == target) {
    if (!contains(p)) return std::nullopt;
    return p;
  }
  if (topology_ != Topology::Sphere || target < 0 || target > 1) return std::nullopt;
  const double r2 = dot(p.pos, p.pos);
  if (r2 == 0.0) return std::nullopt;
  // w = 1/z
  ChartPoint q{target, {p.pos.x / r2, -p.pos.y / r2}};
  if (!contains(q)) return std::nullopt;
  return q;
}

std::optional<PhasePoint> Surface::to_chart(const PhasePoint& p, int target) const {
  auto base = to_chart(p.base(), target);
  if (!base) return std::nullopt;
  if (p.chart == target) return p;
  // dw/dt = -zdot / z^2
  const std::complex<double> z(p.pos.x, p.pos.y), zd(p.vel.x, p.vel.y);
  const std::complex<double> wd = -zd / (z * z);
  return PhasePoint{target, base->pos, {wd.real(), wd.imag()}};
}

int Surface::preferred_chart(const ChartPoint& p) const {
  if (topology_ != Topology::Sphere) return p.chart;
  if (norm(p.pos) > kSphereSwitchRadius) return 1 - p.chart;
  return p.chart;
}

Vec2 Surface::reduce_near(const Vec2& pos, const Vec2& ref) const {
  if (topology_ != Topology::Torus) return pos;
  const double dx = pos.x - ref.x, dy = pos.y - ref.y;
  return {pos.x - lx_ * std::round(dx / lx_), pos.y - ly_ * std::round(dy / ly_)};
}

std::optional<ChartPoint> Surface::express_near(const ChartPoint& p, const ChartPoint& ref) const {
  auto q = to_chart(p, ref.chart);
  if (!q) return std::nullopt;
  q->pos = reduce_near(q->pos, ref.pos);
  return q;
}

std::pair<double, Vec2> Surface::sphere_height(const ChartPoint& p) const {
  if (topology_ != Topology::Sphere) throw UnsupportedError("height coordinate needs a sphere");
  const double r2 = dot(p.pos, p.pos);
  const double q = 1.0 + r2;
  // chart 0 (north projection): h = (r^2 - 1)/(r^2 + 1); chart 1 is the mirror image.
  const double sign = p.chart == 0 ? 1.0 : -1.0;
  const double h = sign * (r2 - 1.0) / q;
  const double dh = sign * 4.0 / (q * q);
  return {h, {dh * p.pos.x, dh * p.pos.y}};
}

MetricData metric_at(const Surface& surface, const ChartPoint& p) { return surface.metric(p); }

Vec2 rotate90(const Surface&, const ChartPoint&, const Vec2& v) { return perp(v); }

double energy(const Surface& surface, const PhasePoint& state) {
  const double l = surface.conformal_factor(state.base());
  return 0.5 * l * l * dot(state.vel, state.vel);
}

double metric_dot(const Surface& surface, const ChartPoint& p, const Vec2& u, const Vec2& v) {
  const double l = surface.conformal_factor(p);
  return l * l * dot(u, v);
}

}  // namespace maglab
