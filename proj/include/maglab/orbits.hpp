//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file orbits.hpp
//! Poincare sections, first-return maps, closed-orbit shooting and Floquet
//! classification.
//!
//! Section coordinates (Y, Z) at an anchor (p0, v0):
//!   Y = lambda(p0) <p - p0, u>, u = i v0 / |v0|      (normal displacement)
//!   Z = sqrt(2c) (angle of v relative to the parallel-transported v0)
//! These are sqrt(2c) times the frame coordinates (y, y') of the reduced
//! variational system, so the linearized return map is the fundamental
//! matrix X(T).
//---------------------------------------------------------------------------//
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "maglab/dynamics.hpp"

namespace maglab {

struct Section {
  Surface surface = Surface::torus();
  PhasePoint anchor;
  double c = 0.5;
  Vec2 vhat;       //!< unit chart direction of v0
  Vec2 u;          //!< perp(vhat)
  double lambda0 = 1.0;
  Vec2 grad_log0;  //!< grad log(lambda) at p0
  double angle0 = 0.0;
  double half_width_y = 0.1;
  double half_width_z = 0.1;

  //! (Y, Z) of a phase point; the point is moved to the anchor chart and
  //! lattice cell first. nullopt if not representable.
  std::optional<Vec2> coords(const PhasePoint& s) const;
  //! Phase point on the section with the given coordinates (anchor chart).
  PhasePoint state(const Vec2& coords) const;
  //! Signed distance to the section hyperplane, in chart units.
  std::optional<double> crossing_function(const PhasePoint& s) const;
  //! Chart direction of the frame vectors: e1 = (i v0, 0), e2 = (0, i v0).
  Vec2 e1_position() const { return u; }
};

Section make_section(const Surface& surface, const PhasePoint& anchor, double half_width = 0.1);

struct ReturnOptions {
  FlowOptions flow;
  double max_time = 100.0;
  //! Crossings with |Y| larger than this are not returns near the anchor.
  double capture = 0.5;
  //! +1 for the forward return map, -1 for its inverse.
  int direction = 1;
  double time_tol = 1e-12;
};

struct ReturnResult {
  Vec2 coords;
  double time = 0.0;  //!< signed transit time
  PhasePoint state;   //!< state at the crossing, anchor chart
};

//! Next crossing (in the positive direction) of the section hyperplane near
//! the anchor. Throws NoReturnError if none occurs within max_time.
ReturnResult first_return(const Section& section, const Vec2& coords, const MagneticField& field,
                          const ReturnOptions& opts = {});

enum class FloquetClass { Hyperbolic, Elliptic, Parabolic };
std::string to_string(FloquetClass c);
FloquetClass floquet_class_from_string(const std::string& s);

struct Eigendata {
  // Hyperbolic: stable/unstable eigenvalues and unit eigenvectors.
  double lambda_s = 0.0, lambda_u = 0.0;
  Vec2 e_s, e_u;
  // Elliptic: rotation number alpha in (0, 1/2), eigenvalues exp(+-2 pi i alpha).
  double alpha = 0.0;
};

struct Classification {
  FloquetClass cls = FloquetClass::Parabolic;
  double alpha = 0.0;  //!< elliptic only
};

Classification classify_trace(double trace, double class_tol = 1e-6);
Eigendata eigendata(const Mat2& m, FloquetClass cls);

struct ClosedOrbit {
  PhasePoint initial_state;
  double energy = 0.5;
  double period = 0.0;
  Mat2 monodromy;
  double trace = 0.0;
  FloquetClass cls = FloquetClass::Parabolic;
  Eigendata eigen;
  double residual = 0.0;
  std::string status = "converged";  //!< or "parabolic-suspect"
  int newton_iterations = 0;
  double displacement = 0.0;  //!< set by continue_orbit
};

Classification classify(const ClosedOrbit& orbit, double class_tol = 1e-6);

struct ShootingOptions {
  ReturnOptions ret;
  double half_width = 0.1;
  int max_iters = 40;
  double fd_step = 1e-6;
  double class_tol = 1e-6;
  //! Condition number of I - M above which the fixed point is treated as degenerate.
  double singular_threshold = 1e10;
  //! Phase-space distance accepted as a return to the anchor in the
  //! subdivision check.
  double subdivision_tol = 1e-6;
};

//! Newton shooting for a fixed point of the return map on the section
//! through the seed. The seed velocity is rescaled to energy c.
ClosedOrbit find_closed_orbit(const Surface& surface, const MagneticField& field, double c,
                              const PhasePoint& seed, double tol,
                              const ShootingOptions& opts = {});

//! Period, monodromy and class of a known periodic state.
ClosedOrbit analyze_periodic_state(const Surface& surface, const MagneticField& field,
                                   const PhasePoint& state, double period_guess,
                                   const ShootingOptions& opts = {});

//! Re-solve the orbit for a nearby field starting from the old initial state.
//! Throws ContinuationLost if Newton fails.
ClosedOrbit continue_orbit(const Surface& surface, const ClosedOrbit& orbit,
                           const MagneticField& new_field, double tol,
                           const ShootingOptions& opts = {});

//! Phase-space distance between two states after moving b to a's chart and
//! lattice cell.
double phase_distance(const Surface& surface, const PhasePoint& a, const PhasePoint& b);

//! Initial directions on a grid at fixed base points, on energy level c.
std::vector<PhasePoint> generate_seeds(const Surface& surface, double c,
                                       const std::vector<ChartPoint>& base_points,
                                       int directions);

//! Orbits ordered by (period, trace) and deduplicated.
class OrbitDatabase {
 public:
  //! Adds unless an orbit with the same period and a state on the same
  //! trajectory is present.
  bool add(const Surface& surface, const MagneticField& field, const ClosedOrbit& orbit,
           double tol = 1e-6);
  const std::vector<ClosedOrbit>& orbits() const { return orbits_; }
  std::size_t size() const { return orbits_.size(); }

 private:
  std::vector<ClosedOrbit> orbits_;
};

//! Shoot from every seed (in parallel) and collect converged orbits.
OrbitDatabase search_orbits(const Surface& surface, const MagneticField& field, double c,
                            const std::vector<PhasePoint>& seeds, double tol,
                            const ShootingOptions& opts = {}, int workers = 1);

}  // namespace maglab
