//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file geometry.hpp
//! Closed oriented surfaces as conformal chart atlases.
//!
//! Every chart carries a metric g = lambda^2 (dx^2 + dy^2). In such a chart
//! the quarter-turn rotation i is the Euclidean rotation and the area form is
//! lambda^2 dx ^ dy.
//---------------------------------------------------------------------------//
#pragma once

#include <array>
#include <optional>
#include <string>

#include "maglab/linalg.hpp"

namespace maglab {

enum class Topology { Torus, Sphere, PlanarChart };

std::string to_string(Topology t);

struct ChartPoint {
  int chart = 0;
  Vec2 pos;
};

//! A tangent vector attached to a chart point; velocity in chart components.
struct PhasePoint {
  int chart = 0;
  Vec2 pos;
  Vec2 vel;

  ChartPoint base() const { return {chart, pos}; }
};

struct MetricData {
  double lambda = 1.0;   //!< conformal factor
  Vec2 dlambda;          //!< first partials of lambda
  double lxx = 0.0, lxy = 0.0, lyy = 0.0;  //!< second partials of lambda
  Vec2 grad_log;         //!< gradient of log(lambda)
  double curvature = 0.0;  //!< Gaussian curvature -Laplacian(log lambda)/lambda^2
  //! christoffel[k][i][j] = Gamma^k_ij
  std::array<std::array<std::array<double, 2>, 2>, 2> christoffel{};
};

class Surface {
 public:
  //! Torus R^2 / (Lx Z x Ly Z) with lambda = 1 + bump cos(2 pi x/Lx) cos(2 pi y/Ly).
  static Surface torus(double lx = 1.0, double ly = 1.0, double bump = 0.0);
  //! Round sphere of the given radius, two stereographic charts related by w = 1/z.
  static Surface sphere(double radius = 1.0);
  //! Euclidean disk of the given radius; injectivity radius is user supplied.
  static Surface planar(double domain_radius, double injectivity_radius);

  Topology topology() const { return topology_; }
  int chart_count() const { return topology_ == Topology::Sphere ? 2 : 1; }
  double injectivity_radius() const { return injectivity_radius_; }
  bool is_compact() const { return topology_ != Topology::PlanarChart; }

  // Torus data
  Vec2 periods() const { return {lx_, ly_}; }
  double bump() const { return bump_; }
  // Sphere data
  double radius() const { return radius_; }
  // Planar data
  double domain_radius() const { return domain_radius_; }

  bool contains(const ChartPoint& p) const;
  double conformal_factor(const ChartPoint& p) const;
  MetricData metric(const ChartPoint& p) const;

  //! Express a point in another chart; nullopt when it is outside that chart.
  std::optional<ChartPoint> to_chart(const ChartPoint& p, int target) const;
  std::optional<PhasePoint> to_chart(const PhasePoint& p, int target) const;

  //! Chart an integrator should continue in (switching away from chart edges).
  int preferred_chart(const ChartPoint& p) const;

  //! On the torus, the lattice translate of pos nearest to ref. Identity otherwise.
  Vec2 reduce_near(const Vec2& pos, const Vec2& ref) const;

  //! Express p in the chart of ref and reduce it near ref (torus lattice).
  //! nullopt when the point is not representable in that chart.
  std::optional<ChartPoint> express_near(const ChartPoint& p, const ChartPoint& ref) const;

  //! Height coordinate Z/R on the sphere (cosine of the polar angle) and its
  //! chart gradient. Sphere only.
  std::pair<double, Vec2> sphere_height(const ChartPoint& p) const;

 private:
  Surface() = default;

  Topology topology_ = Topology::PlanarChart;
  double lx_ = 1.0, ly_ = 1.0, bump_ = 0.0;
  double radius_ = 1.0;
  double domain_radius_ = 0.0;
  double injectivity_radius_ = 0.0;
};

//! Metric factor, its partials, curvature and Christoffel symbols at a point.
//! Throws DomainError outside the chart domain.
MetricData metric_at(const Surface& surface, const ChartPoint& p);

//! The quarter-turn rotation i; in a conformal chart (vx, vy) -> (-vy, vx).
Vec2 rotate90(const Surface& surface, const ChartPoint& p, const Vec2& v);

//! Kinetic energy 1/2 g(v, v).
double energy(const Surface& surface, const PhasePoint& state);

//! Riemannian inner product g_p(u, v).
double metric_dot(const Surface& surface, const ChartPoint& p, const Vec2& u, const Vec2& v);

}  // namespace maglab
