//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file normalform.hpp
//! Third-order jets of return maps, the first Birkhoff twist coefficient and
//! an independent rotation-number estimate of the same quantity.
//!
//! Conventions: alpha and beta are measured in turns, so the normal form is
//! (r, theta) -> (r, theta + 2 pi (alpha + beta r^2)) in area-normalized
//! coordinates (the linear part conjugated to a rotation by an SL(2) matrix).
//---------------------------------------------------------------------------//
#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "maglab/map_oracle.hpp"

namespace maglab {

//! Monomials x^i y^j with i + j <= 3, ordered by degree then by decreasing i:
//! 1, x, y, x^2, xy, y^2, x^3, x^2y, xy^2, y^3.
constexpr int kJetTerms = 10;
int monomial_index(int i, int j);
std::array<int, 2> monomial_powers(int index);

struct Jet3 {
  Vec2 center;  //!< base point in section coordinates
  //! Taylor coefficients of d -> P(center + d) - center.
  std::array<std::array<double, kJetTerms>, 2> coef{};
  std::array<std::array<double, kJetTerms>, 2> error{};
  double fd_scale = 0.0;

  Mat2 linear() const { return {coef[0][1], coef[0][2], coef[1][1], coef[1][2]}; }
  double residual() const { return std::hypot(coef[0][0], coef[1][0]); }
  Vec2 eval(const Vec2& d) const;
  double max_error() const;
};

//! Stencil jet of an arbitrary map at a point.
Jet3 jet3(const MapOracle& map, const Vec2& center, double fd_scale);

struct JetOptions {
  ReturnOptions ret;
  double fd_scale = -1.0;     //!< <= 0 selects the default fraction of the half-width
  double fd_fraction = 0.1;   //!< default fd_scale / section half-width
  int polish_iters = 3;       //!< Newton steps on the fixed point before the stencil
  JetOptions();
};

//! Jet of the return map on a section through the orbit's initial state.
Jet3 jet3(const Section& section, const ClosedOrbit& orbit, const MagneticField& field,
          const JetOptions& opts = {});

struct TwistData {
  double alpha = 0.0;
  double beta = 0.0;
  std::array<bool, 4> nonresonant{};  //!< flag n-1: n alpha not an integer
  double beta_error = 0.0;            //!< propagated from the jet errors
  double beta_tol = 0.0;
  double radial_coefficient = 0.0;    //!< Re part; zero for area-preserving maps
  bool twist = false;

  std::string verdict() const { return twist ? "twist" : "no-twist"; }
};

//! Flags computed from eigenvalue powers: |lambda^n - 1| >= tol.
std::array<bool, 4> resonance_flags(double alpha, double tol = 1e-8);

//! SL(2) matrix L and rotation angle omega in (0, 2 pi) with L^-1 M L = R(omega).
struct EllipticFrame {
  Mat2 L;
  double omega = 0.0;
};
EllipticFrame elliptic_frame(const Mat2& m);

//! Throws DomainError when the linear part is not elliptic and ResonantJet on
//! a resonance of order <= 4. beta_tol <= 0 selects 3x the propagated error.
TwistData birkhoff_beta(const Jet3& jet, double beta_tol = -1.0);

struct TwistFit {
  double alpha = 0.0;
  double beta = 0.0;
  double alpha_error = 0.0;
  double beta_error = 0.0;
  double residual = 0.0;  //!< rms of the fit
  std::vector<double> radii;
  std::vector<double> rho;
};

struct RotationOptions {
  int iterates = 500;
  double escape_radius = 0.1;  //!< iterates farther than this from the center escape
};

//! Rotation numbers of orbits started at +-r along the first normalized axis,
//! fitted to alpha + beta r^2. `linear` is the linear part at the fixed point.
TwistFit twist_by_rotation_number(const MapOracle& map, const Vec2& center, const Mat2& linear,
                                  const std::vector<double>& radii,
                                  const RotationOptions& opts = {});

TwistFit twist_by_rotation_number(const Section& section, const ClosedOrbit& orbit,
                                  const MagneticField& field, const std::vector<double>& radii,
                                  const RotationOptions& opts = {}, const ReturnOptions& ret = {});

//! Synthetic twist map (r, theta) -> (r, theta + 2 pi (alpha + beta r^2)).
FunctionMap twist_map(double alpha, double beta);

}  // namespace maglab
