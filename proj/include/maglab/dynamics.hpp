//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file dynamics.hpp
//! Magnetic geodesic flow D/dt v = f i v, its reduced variational system
//! d/dt (y, y') = [[0, 1], [-K_mag, 0]] (y, y'), and the drift x' = f y.
//---------------------------------------------------------------------------//
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "maglab/field.hpp"
#include "maglab/geometry.hpp"
#include "maglab/ode.hpp"

namespace maglab {

struct FlowOptions {
  double rel_tol = 1e-11;
  double abs_tol = 1e-12;
  double max_step = 0.05;
  //! Rescale the velocity onto the energy level after every step.
  bool renormalize = true;
};

class Trajectory {
 public:
  using Segment = DenseSegment<4>;

  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  double energy_level() const { return c_; }
  bool exited() const { return exited_; }
  bool stopped_early() const { return stopped_; }
  const IntegratorStats& stats() const { return stats_; }
  double max_energy_drift() const { return max_drift_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const PhasePoint& initial_state() const { return initial_; }

  //! State at time t (clamped to the covered range). With renormalization on,
  //! interpolated velocities are projected onto the energy level like the
  //! step ends.
  PhasePoint state(double t) const;
  //! The dense interpolant itself, without projection.
  PhasePoint raw_state(double t) const;
  PhasePoint final_state() const { return final_; }
  //! Step boundaries, including both ends.
  std::vector<double> time_grid() const;
  //! Index of the segment containing t.
  std::size_t segment_index(double t) const;

 private:
  friend class FlowEngine;
  double t_start_ = 0.0, t_end_ = 0.0, c_ = 0.0;
  bool exited_ = false, stopped_ = false;
  IntegratorStats stats_;
  double max_drift_ = 0.0;
  PhasePoint initial_, final_;
  std::vector<Segment> segments_;
  std::optional<Surface> level_surface_;
};

//! Fundamental matrix X(t) of the reduced variational system and the drift
//! integrals x(t) of both columns, on the trajectory's step grid.
class VariationalPath {
 public:
  using Segment = DenseSegment<6>;

  Mat2 X(double t) const;
  Vec2 drift(double t) const;
  Mat2 final_X() const;
  const std::vector<Segment>& segments() const { return segments_; }
  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }

 private:
  friend class FlowEngine;
  double t_start_ = 0.0, t_end_ = 0.0;
  std::vector<Segment> segments_;
  std::size_t segment_index(double t) const;
};

//! Observer called after each accepted step with the phase segment; return
//! true to stop the integration.
using StepObserver = std::function<bool(const Trajectory::Segment&)>;

Trajectory flow(const Surface& surface, const MagneticField& field, const PhasePoint& state,
                double t_final, const FlowOptions& opts = {}, const StepObserver& observer = {});

struct FlowWithVariation {
  Trajectory trajectory;
  VariationalPath variation;
};

FlowWithVariation flow_with_variation(const Surface& surface, const MagneticField& field,
                                      const PhasePoint& state, double t_final,
                                      const FlowOptions& opts = {},
                                      const StepObserver& observer = {});

//! Right-hand side of the phase ODE: (velocity, acceleration).
std::pair<Vec2, Vec2> magnetic_acceleration(const Surface& surface, const MagneticField& field,
                                            const PhasePoint& s);

//! K_mag = 2cK - g(grad f, i v) + f^2 at a phase point, with 2c = g(v, v).
double magnetic_curvature_at(const Surface& surface, const MagneticField& field,
                             const PhasePoint& s);
double magnetic_curvature(const Surface& surface, const MagneticField& field,
                          const Trajectory& trajectory, double t);

struct InjectivityOptions {
  int samples_per_axis = 512;
  double inflation = 1.01;
  //! Use i(M,g)/sqrt(2c) instead of i(M,g)/(2c) for the second argument.
  bool sqrt_variant = false;
  //! Sup of |f|; negative means estimate by sampling.
  double f_sup = -1.0;
};

//! min{1/(|f|_C0 + 1)^2, i(M,g)/(2c)}. Reported as a lower bound on the
//! minimal period of closed orbits.
double injectivity_time(const Surface& surface, const MagneticField& field, double c,
                        const InjectivityOptions& opts = {});

//! Sup |f| by grid sampling over a fundamental domain (inflated).
double field_sup_norm(const Surface& surface, const MagneticField& field, int samples_per_axis,
                      double inflation);

//! Scale the velocity so that energy equals c.
PhasePoint on_energy_level(const Surface& surface, PhasePoint s, double c);

}  // namespace maglab
