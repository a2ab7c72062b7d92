//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file field.cpp
//---------------------------------------------------------------------------//
#include "maglab/field.hpp"

#include <cmath>

#include "maglab/errors.hpp"
#include "maglab/kernels.hpp"
#include "maglab/quadrature.hpp"

namespace maglab {

double BumpTemplate::value(double x) {
  if (std::abs(x) >= half_support) return 0.0;
  const double w = 1.0 - 4.0 * x * x;
  return x * w * w * w;
}

double BumpTemplate::derivative(double x) {
  if (std::abs(x) >= half_support) return 0.0;
  const double w = 1.0 - 4.0 * x * x;
  return w * w * (1.0 - 28.0 * x * x);
}

ProfileNorms sample_profile_norms(const TimeProfile& b, int samples) {
  auto [t0, t1] = b.support();
  ProfileNorms n;
  double d1 = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double t = t0 + (t1 - t0) * i / samples;
    n.c0 = std::max(n.c0, std::abs(b.value(t)));
    d1 = std::max(d1, std::abs(b.derivative(t)));
  }
  n.c1 = n.c0 + d1;
  return n;
}

PerturbationField::PerturbationField(std::shared_ptr<const TubeCoordinates> tube,
                                     std::shared_ptr<const TimeProfile> profile, double eps0)
    : tube_(std::move(tube)), profile_(std::move(profile)), eps0_(eps0) {
  if (!tube_ || !profile_) throw ValidationError("perturbation needs a tube and a profile");
  if (!(eps0_ > 0)) throw ValidationError("perturbation width must be positive");
  if (eps0_ > 2.0 * tube_->width() * (1.0 + 1e-12))
    throw ValidationError("bump support exceeds the tube width");
  norms_ = sample_profile_norms(*profile_);
}

std::optional<PerturbationField::TubeValue> PerturbationField::eval_tube(
    const ChartPoint& p) const {
  auto tp = tube_->locate(p);
  if (!tp) return std::nullopt;
  auto [s0, s1] = profile_->support();
  if (tp->t < s0 || tp->t > s1 || std::abs(tp->x) >= 0.5 * eps0_) return TubeValue{0, 0, 0};
  const double b = profile_->value(tp->t);
  const double db = profile_->derivative(tp->t);
  const double a = scaled_bump(eps0_, tp->x);
  const double da = scaled_bump_derivative(eps0_, tp->x);
  const double r = tp->density_ratio;
  TubeValue v;
  v.h = a * b * r;
  v.h_t = a * (db * r + b * tp->density_ratio_grad.x);
  v.h_x = da * b * r + a * b * tp->density_ratio_grad.y;
  return v;
}

FieldValue PerturbationField::eval(const ChartPoint& p) const {
  auto tp = tube_->locate(p);
  if (!tp) return {};
  auto [s0, s1] = profile_->support();
  if (tp->t < s0 || tp->t > s1 || std::abs(tp->x) >= 0.5 * eps0_) return {};
  const double b = profile_->value(tp->t);
  const double db = profile_->derivative(tp->t);
  const double a = scaled_bump(eps0_, tp->x);
  const double da = scaled_bump_derivative(eps0_, tp->x);
  const double r = tp->density_ratio;
  const double h_t = a * (db * r + b * tp->density_ratio_grad.x);
  const double h_x = da * b * r + a * b * tp->density_ratio_grad.y;
  // (h_t, h_x) = J^T grad h
  const Vec2 grad = tp->jacobian.transpose().inverse() * Vec2{h_t, h_x};
  return {a * b * r, grad};
}

double PerturbationField::c1_bound() const {
  return perturbation_c1_bound(norms_.c0, norms_.c1, eps0_);
}

MagneticField MagneticField::constant(double value) {
  if (!std::isfinite(value)) throw ValidationError("field value must be finite");
  return MagneticField(Constant{value});
}

MagneticField MagneticField::sinusoidal(std::vector<FourierMode> modes, double offset) {
  if (modes.empty()) throw ValidationError("sinusoidal field needs at least one mode");
  return MagneticField(Sinusoidal{std::move(modes), offset});
}

MagneticField MagneticField::zonal(std::vector<double> coeffs) {
  if (coeffs.empty()) throw ValidationError("zonal field needs coefficients");
  return MagneticField(Zonal{std::move(coeffs)});
}

MagneticField MagneticField::polynomial(std::vector<PolyTerm> terms) {
  for (const auto& t : terms)
    if (t.px < 0 || t.py < 0) throw ValidationError("polynomial exponents must be >= 0");
  return MagneticField(Polynomial{std::move(terms)});
}

std::optional<std::pair<std::vector<FourierMode>, double>> MagneticField::fourier_data() const {
  if (const auto* s = std::get_if<Sinusoidal>(&base_)) return std::make_pair(s->modes, s->offset);
  if (const auto* c = std::get_if<Constant>(&base_))
    return std::make_pair(std::vector<FourierMode>{}, c->value);
  return std::nullopt;
}

void MagneticField::validate_for(const Surface& surface) const {
  const auto topo = surface.topology();
  if (std::holds_alternative<Sinusoidal>(base_) && topo != Topology::Torus)
    throw UnsupportedError("sinusoidal fields are defined on the torus only");
  if (std::holds_alternative<Zonal>(base_) && topo != Topology::Sphere)
    throw UnsupportedError("zonal fields are defined on the sphere only");
  if (std::holds_alternative<Polynomial>(base_) && topo != Topology::PlanarChart)
    throw UnsupportedError("polynomial fields are defined on the planar chart only");
  for (const auto& p : perturbations_)
    if (p->tube().topology() != topo)
      throw ValidationError("perturbation tube belongs to a different surface");
}

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

FieldValue MagneticField::eval_base(const Surface& surface, const ChartPoint& p) const {
  if (!surface.contains(p)) throw DomainError("field evaluated outside the chart domain");
  return std::visit(
      [&](const auto& b) -> FieldValue {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return {b.value, {}};
        } else if constexpr (std::is_same_v<T, Sinusoidal>) {
          const Vec2 per = surface.periods();
          FieldValue v{b.offset, {}};
          for (const auto& m : b.modes) {
            const double kx = two_pi * m.kx / per.x, ky = two_pi * m.ky / per.y;
            const double arg = kx * p.pos.x + ky * p.pos.y + m.phase;
            v.f += m.amplitude * std::sin(arg);
            const double c = m.amplitude * std::cos(arg);
            v.grad += Vec2{c * kx, c * ky};
          }
          return v;
        } else if constexpr (std::is_same_v<T, Zonal>) {
          auto [h, dh] = surface.sphere_height(p);
          double f = 0.0, df = 0.0;
          for (std::size_t k = b.coeffs.size(); k-- > 0;) {
            df = df * h + f;
            f = f * h + b.coeffs[k];
          }
          return {f, df * dh};
        } else {
          FieldValue v;
          for (const auto& t : b.terms) {
            v.f += t.coef * ipow(p.pos.x, t.px) * ipow(p.pos.y, t.py);
            if (t.px > 0) v.grad.x += t.coef * t.px * ipow(p.pos.x, t.px - 1) * ipow(p.pos.y, t.py);
            if (t.py > 0) v.grad.y += t.coef * t.py * ipow(p.pos.x, t.px) * ipow(p.pos.y, t.py - 1);
          }
          return v;
        }
      },
      base_);
}

FieldValue MagneticField::eval(const Surface& surface, const ChartPoint& p) const {
  FieldValue v = eval_base(surface, p);
  for (const auto& pert : perturbations_) {
    const FieldValue h = pert->eval(p);
    v.f += h.f;
    v.grad += h.grad;
  }
  return v;
}

MagneticField MagneticField::without_perturbations() const { return MagneticField(base_); }

MagneticField add_perturbation_impl(const MagneticField& field,
                                    std::shared_ptr<const PerturbationField> perturbation) {
  MagneticField out = field;
  out.perturbations_.push_back(std::move(perturbation));
  return out;
}

FieldValue eval_field(const MagneticField& field, const Surface& surface, const ChartPoint& p) {
  return field.eval(surface, p);
}

ExactnessResult is_exact(const MagneticField& field, const Surface& surface, double tol,
                         int panels) {
  if (surface.topology() == Topology::PlanarChart)
    throw UnsupportedError("exactness needs a compact surface");
  if (panels < 1) throw ValidationError("quadrature needs at least one panel");
  field.validate_for(surface);

  std::vector<double> values, weights;
  double total = 0.0;
  if (surface.topology() == Topology::Torus) {
    const Vec2 per = surface.periods();
    const auto rx = composite_gl4(0.0, per.x, panels);
    const auto ry = composite_gl4(0.0, per.y, panels);
    values.reserve(rx.nodes.size() * ry.nodes.size());
    weights.reserve(values.capacity());
    for (std::size_t i = 0; i < rx.nodes.size(); ++i) {
      for (std::size_t j = 0; j < ry.nodes.size(); ++j) {
        const ChartPoint p{0, {rx.nodes[i], ry.nodes[j]}};
        const double l = surface.conformal_factor(p);
        values.push_back(field.eval(surface, p).f * l * l);
        weights.push_back(rx.weights[i] * ry.weights[j]);
      }
    }
    total = kernels::weighted_sum(values, weights);
  } else {
    // Each stereographic chart covers one hemisphere as the unit disk.
    const auto rr = composite_gl4(0.0, 1.0, panels);
    const auto rt = composite_gl4(0.0, two_pi, panels);
    for (int chart = 0; chart < 2; ++chart) {
      values.clear();
      weights.clear();
      for (std::size_t i = 0; i < rr.nodes.size(); ++i) {
        const double r = rr.nodes[i];
        for (std::size_t j = 0; j < rt.nodes.size(); ++j) {
          const ChartPoint p{chart, {r * std::cos(rt.nodes[j]), r * std::sin(rt.nodes[j])}};
          const double l = surface.conformal_factor(p);
          values.push_back(field.eval(surface, p).f * l * l * r);
          weights.push_back(rr.weights[i] * rt.weights[j]);
        }
      }
      total += kernels::weighted_sum(values, weights);
    }
  }
  return {total, std::abs(total) <= tol};
}

PerturbedField add_perturbation(const MagneticField& field, const Surface& surface,
                                std::shared_ptr<const PerturbationField> perturbation) {
  if (!perturbation) throw ValidationError("null perturbation");
  if (perturbation->tube().topology() != surface.topology())
    throw ValidationError("perturbation tube belongs to a different surface");
  const double bound = perturbation->c1_bound();
  return {add_perturbation_impl(field, std::move(perturbation)), bound};
}

}  // namespace maglab
