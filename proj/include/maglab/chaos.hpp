//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file chaos.hpp
//! Invariant manifolds of hyperbolic fixed points of planar maps, homoclinic
//! crossings, horseshoe certificates with an entropy lower bound, and the
//! dominated-splitting products along periodic orbits.
//---------------------------------------------------------------------------//
#pragma once

#include <array>
#include <string>
#include <vector>

#include "maglab/map_oracle.hpp"

namespace maglab {

//---------------------------------------------------------------------------//
// Synthetic maps
//---------------------------------------------------------------------------//

//! theta' = theta + p', p' = p + (K/m) sin(m theta), on the lift to R^2.
//! reduce_near shifts both coordinates by multiples of 2 pi.
class StandardMap : public MapOracle {
 public:
  explicit StandardMap(double kick, int harmonic = 1) : k_(kick), m_(harmonic) {}
  Vec2 eval(const Vec2& p) const override;
  Vec2 inverse(const Vec2& p) const override;
  Mat2 differential(const Vec2& p) const override;
  Vec2 reduce_near(const Vec2& p, const Vec2& ref) const override;
  double kick() const { return k_; }

 private:
  double k_;
  int m_;
};

//! Piecewise-linear horseshoe with stretch 3: (x/3, 3y) for y < 1/2 and
//! (1 - x/3, 3 - 3y) otherwise. The fixed point (0, 0) has E^u = y, E^s = x.
class LinearHorseshoe : public MapOracle {
 public:
  Vec2 eval(const Vec2& p) const override;
  Vec2 inverse(const Vec2& p) const override;
  Mat2 differential(const Vec2& p) const override;
};

//! Linear map z -> M z.
FunctionMap linear_map(const Mat2& m);

//---------------------------------------------------------------------------//
// Manifolds
//---------------------------------------------------------------------------//

struct FixedPoint {
  Vec2 point;
  Mat2 jacobian;
  double lambda_u = 0.0, lambda_s = 0.0;  //!< signed eigenvalues, |lambda_u| > 1
  Vec2 e_u, e_s;                          //!< unit eigenvectors
  //! Coordinates (u, s) of z - point in the eigenbasis.
  Vec2 frame_coords(const Vec2& z) const;
  Vec2 from_frame(const Vec2& us) const;
};

//! Jacobian and eigendata at a fixed point. Throws DomainError unless
//! |tr| > 2 + class_tol.
FixedPoint hyperbolic_fixed_point(const MapOracle& map, const Vec2& p, double class_tol = 1e-6);

enum class Side { Stable, Unstable };
std::string to_string(Side s);

struct GrowOptions {
  double max_arclength = 5.0;
  double tol = 1e-6;           //!< max distance of a true midpoint from its chord
  double max_segment = 0.05;   //!< longest chord
  double initial_offset = 1e-7;  //!< start of the linear fundamental domain
  int max_levels = 200;
  std::size_t max_points = 200000;
};

//! Polyline approximation of one branch. Vertex i is G^level[i](p + sign s e)
//! with s = param[i] in the first fundamental domain, G the map (unstable)
//! or its inverse (stable), squared when the eigenvalue is negative.
struct ManifoldBranch {
  FixedPoint base;
  Side side = Side::Unstable;
  int sign = 1;
  std::vector<Vec2> points;
  std::vector<int> level;
  std::vector<double> param;
  double arclength = 0.0;
  double max_deviation = 0.0;  //!< largest midpoint-to-chord distance after refinement
  double first_angle = 0.0;    //!< angle between the first chord and the eigenvector
  bool truncated = false;      //!< stopped by an oracle failure
  std::string message;
};

ManifoldBranch grow_manifold(const MapOracle& map, const FixedPoint& base, Side side, int sign,
                             const GrowOptions& opts = {});

//! Max distance to the polyline from the image of each chord's parameter
//! midpoint under the branch map (inverse for stable branches, squared when
//! the eigenvalue is negative). The last level is skipped.
double invariance_error(const MapOracle& map, const ManifoldBranch& branch);

//! Distance from a point to a polyline.
double polyline_distance(const std::vector<Vec2>& poly, const Vec2& p);

//---------------------------------------------------------------------------//
// Crossings
//---------------------------------------------------------------------------//

struct Intersection {
  Vec2 point;
  double angle = 0.0;  //!< in [0, pi/2]
  bool transversal = false;
  std::size_t segment_s = 0, segment_u = 0;
  double arc_s = 0.0, arc_u = 0.0;  //!< arclength from the base points
};

//! All crossings of the two polylines. Crossings at a shared base point are
//! excluded.
std::vector<Intersection> detect_homoclinic(const ManifoldBranch& stable,
                                            const ManifoldBranch& unstable,
                                            double angle_tol = 1e-3);

//---------------------------------------------------------------------------//
// Horseshoes
//---------------------------------------------------------------------------//

//! Box [u0, u1] x [s0, s1] in eigenframe coordinates of the fixed point.
struct EigenBox {
  double u0 = 0, u1 = 0, s0 = 0, s1 = 0;
};

//! Search over k = m + n, with q_{-m} and q_n the backward and forward
//! iterates of a crossing q. D0 = [-a, a] x [-b0, b0] sits at the fixed point
//! and D1 = (u_m, s_m) + [-a, a] x [-b1, b1] at q_{-m}, where
//! a = w |u_m| / lambda^k for w = 2, 4, ... below lambda^k / 2,
//! b0 = h |s_n| for h in height_factors, and
//! b1 = |s_n - s_m| + g |s_n| for g in gap_slack.
struct HorseshoeParams {
  int k_max = 20;
  std::vector<double> height_factors{1.5, 3.0, 8.0};
  std::vector<double> gap_slack{1e-3, 1e-2, 0.1, 0.5};
  //! Iterates q_{-m}, q_n must lie this close to the fixed point.
  double neighbourhood = 0.5;
  int edge_samples = 200;
  int grid = 40;
  std::size_t max_intersections = 4;  //!< transversal crossings tried, nearest first
  //! Explicit candidate: both boxes and the iterate count (k <= 0 disables).
  std::vector<EigenBox> boxes;
  int k = 0;
};

struct EntropyReport {
  std::vector<Intersection> intersections;
  int symbols = 0;  //!< N
  int iterate = 0;  //!< k
  double return_time = 1.0;  //!< mean T_ret over box samples
  double per_iterate = 0.0;  //!< log(N) / k
  double h_top_lower = 0.0;  //!< log(N) / (k T_ret)
  std::vector<EigenBox> boxes;
  std::string status;  //!< "certified", "no crossing", "no transversal crossing", "not certified"
};

//! Does F^k(from) cross `to` fully in the u direction (sampled)?
bool covers(const MapOracle& map, const FixedPoint& base, const EigenBox& from, const EigenBox& to,
            int k, int edge_samples, int grid);

EntropyReport certify_horseshoe(const MapOracle& map, const FixedPoint& base,
                                const std::vector<Intersection>& intersections,
                                const HorseshoeParams& params = {});

//---------------------------------------------------------------------------//
// Dominated splitting
//---------------------------------------------------------------------------//

//! |X|_{E^s}| |X^-1|_{X E^u}| for unit eigenvectors e_s, e_u at the start.
double dominated_product(const Mat2& X, const Vec2& e_s, const Vec2& e_u);

struct OrbitSplitting {
  double period = 0.0;
  double product = 0.0;  //!< over time T
  std::array<double, 2> power_error{};  //!< |product(N T) / product(T)^N - 1| for N = 2, 3
};

struct SplittingReport {
  double T = 0.0;
  std::vector<OrbitSplitting> orbits;
  double max_product = 0.0;
  double lambda_target = 0.0;
  bool certified = false;
  int m = 1;  //!< smallest multiple of T at which the target holds, 0 if none up to m_max
};

//! Fundamental matrix along an orbit at time t >= 0.
using OrbitPropagator = std::function<Mat2(std::size_t orbit, double t)>;

SplittingReport dominated_splitting_check(const std::vector<ClosedOrbit>& orbits,
                                          const OrbitPropagator& X, double T,
                                          double lambda_target, int m_max = 8);

//! Propagates the variational flow of `field` along each orbit.
SplittingReport dominated_splitting_check(const std::vector<ClosedOrbit>& orbits,
                                          const Surface& surface, const MagneticField& field,
                                          double T, double lambda_target, int m_max = 8);

//! Uses monodromy powers only; T must be a multiple of every period.
SplittingReport dominated_splitting_check(const std::vector<ClosedOrbit>& orbits, double T,
                                          double lambda_target, int m_max = 8);

}  // namespace maglab
