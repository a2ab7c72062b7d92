//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file field.hpp
//! Magnetic intensity f (the 2-form is f times the area form) and localized
//! perturbations supported in tubes around orbit segments.
//---------------------------------------------------------------------------//
#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "maglab/geometry.hpp"

namespace maglab {

//! Field value with its chart gradient (partials in chart coordinates).
struct FieldValue {
  double f = 0.0;
  Vec2 grad;
};

//---------------------------------------------------------------------------//
// Bump template
//---------------------------------------------------------------------------//

//! Odd polynomial bump a(x) = x (1 - 4x^2)^3 on [-1/2, 1/2], zero outside.
//! a(0) = 0, a'(0) = 1, integral 0, sup|a'| = 1, C^2 at the support edges.
struct BumpTemplate {
  static double value(double x);
  static double derivative(double x);
  static constexpr double half_support = 0.5;
};

//! a_eps(x) = eps a(x/eps).
inline double scaled_bump(double eps, double x) { return eps * BumpTemplate::value(x / eps); }
inline double scaled_bump_derivative(double eps, double x) {
  return BumpTemplate::derivative(x / eps);
}

//---------------------------------------------------------------------------//
// Perturbations
//---------------------------------------------------------------------------//

//! Point in tube coordinates together with the chart Jacobian of psi.
struct TubePoint {
  double t = 0.0;
  double x = 0.0;
  Mat2 jacobian;  //!< columns d(psi)/dt and d(psi)/dx in the query chart
  double density_ratio = 1.0;  //!< rho(t,0)/rho(t,x), rho = area density of psi
  Vec2 density_ratio_grad;     //!< partials of density_ratio in (t, x)
};

//! Coordinates (t, x) around a curve; implemented by franks::TubularChart.
class TubeCoordinates {
 public:
  virtual ~TubeCoordinates() = default;
  //! Tube coordinates of p when p lies in the open tube, nullopt otherwise.
  virtual std::optional<TubePoint> locate(const ChartPoint& p) const = 0;
  virtual Topology topology() const = 0;
  virtual double width() const = 0;
  virtual double length() const = 0;
};

//! Time profile b(t) of a perturbation.
class TimeProfile {
 public:
  virtual ~TimeProfile() = default;
  virtual double value(double t) const = 0;
  virtual double derivative(double t) const = 0;
  //! Closed interval outside of which b vanishes.
  virtual std::pair<double, double> support() const = 0;
};

//! Norms of a time profile measured by sampling.
struct ProfileNorms {
  double c0 = 0.0;  //!< sup |b|
  double c1 = 0.0;  //!< sup |b| + sup |b'|
};

ProfileNorms sample_profile_norms(const TimeProfile& b, int samples = 20000);

//! C^1 bound 2 |b|_C0 + eps0 |b|_C1 for h = a_eps(x) b(t).
inline double perturbation_c1_bound(double b_c0, double b_c1, double eps0) {
  return 2.0 * b_c0 + eps0 * b_c1;
}

//! h(t, x) = a_eps(x) b(t) rho(t,0)/rho(t,x) inside the tube, 0 outside.
//! The density ratio makes every fiber integral of h dA vanish; it is 1 for
//! flat straight tubes.
class PerturbationField {
 public:
  PerturbationField(std::shared_ptr<const TubeCoordinates> tube,
                    std::shared_ptr<const TimeProfile> profile, double eps0);

  FieldValue eval(const ChartPoint& p) const;
  //! h and its partials in tube coordinates; nullopt outside the tube.
  struct TubeValue {
    double h, h_t, h_x;
  };
  std::optional<TubeValue> eval_tube(const ChartPoint& p) const;

  const TubeCoordinates& tube() const { return *tube_; }
  const TimeProfile& profile() const { return *profile_; }
  double eps0() const { return eps0_; }
  //! Bound 2 |b|_C0 + eps0 |b|_C1 on the C^1 norm of h.
  double c1_bound() const;
  ProfileNorms profile_norms() const { return norms_; }

 private:
  std::shared_ptr<const TubeCoordinates> tube_;
  std::shared_ptr<const TimeProfile> profile_;
  double eps0_;
  ProfileNorms norms_;
};

//---------------------------------------------------------------------------//
// Base fields
//---------------------------------------------------------------------------//

//! One Fourier mode A sin(2 pi (kx x / Lx + ky y / Ly) + phase) on the torus.
struct FourierMode {
  double amplitude = 1.0;
  int kx = 1;
  int ky = 0;
  double phase = 0.0;
};

//! Monomial coef x^px y^py.
struct PolyTerm {
  double coef = 0.0;
  int px = 0;
  int py = 0;
};

class MagneticField {
 public:
  static MagneticField constant(double value);
  static MagneticField sinusoidal(std::vector<FourierMode> modes, double offset = 0.0);
  //! f = sum_k coeffs[k] h^k with h = Z/R the cosine of the polar angle.
  static MagneticField zonal(std::vector<double> coeffs);
  static MagneticField polynomial(std::vector<PolyTerm> terms);

  //! Base plus all perturbations. Throws DomainError outside the surface.
  FieldValue eval(const Surface& surface, const ChartPoint& p) const;
  FieldValue eval_base(const Surface& surface, const ChartPoint& p) const;

  //! Check that the base field is defined on this surface.
  void validate_for(const Surface& surface) const;

  //! Modes and offset of a sinusoidal base; a constant base is reported with
  //! no modes. nullopt for the other kinds.
  std::optional<std::pair<std::vector<FourierMode>, double>> fourier_data() const;

  const std::vector<std::shared_ptr<const PerturbationField>>& perturbations() const {
    return perturbations_;
  }
  MagneticField without_perturbations() const;

  friend MagneticField add_perturbation_impl(const MagneticField&,
                                             std::shared_ptr<const PerturbationField>);

 private:
  struct Constant {
    double value;
  };
  struct Sinusoidal {
    std::vector<FourierMode> modes;
    double offset;
  };
  struct Zonal {
    std::vector<double> coeffs;
  };
  struct Polynomial {
    std::vector<PolyTerm> terms;
  };
  using Base = std::variant<Constant, Sinusoidal, Zonal, Polynomial>;

  explicit MagneticField(Base b) : base_(std::move(b)) {}

  Base base_;
  std::vector<std::shared_ptr<const PerturbationField>> perturbations_;
};

//! (f, grad f) at a point.
FieldValue eval_field(const MagneticField& field, const Surface& surface, const ChartPoint& p);

struct ExactnessResult {
  double integral = 0.0;
  bool exact = false;
};

//! Integral of f dA over a compact surface by composite Gauss-Legendre
//! quadrature (panels x panels, 4 nodes each). PlanarChart is unsupported.
ExactnessResult is_exact(const MagneticField& field, const Surface& surface, double tol = 1e-9,
                         int panels = 64);

struct PerturbedField {
  MagneticField field;
  double c1_bound = 0.0;
};

PerturbedField add_perturbation(const MagneticField& field, const Surface& surface,
                                std::shared_ptr<const PerturbationField> perturbation);

}  // namespace maglab
