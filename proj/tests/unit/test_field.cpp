//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
#include <random>

#include "doctest.h"
#include "maglab/errors.hpp"
#include "maglab/field.hpp"

using namespace maglab;

namespace {

// Straight tube psi(t, x) = p0 + t u + x perp(u) on the flat torus.
class StraightTube : public TubeCoordinates {
 public:
  StraightTube(Vec2 p0, Vec2 u, double length, double width)
      : p0_(p0), u_(u), len_(length), w_(width) {}
  std::optional<TubePoint> locate(const ChartPoint& p) const override {
    const Vec2 d = p.pos - p0_;
    const double uu = dot(u_, u_);
    TubePoint tp;
    tp.t = dot(d, u_) / uu;
    tp.x = dot(d, perp(u_)) / uu;
    if (tp.t <= 0 || tp.t >= len_ || std::abs(tp.x) >= w_) return std::nullopt;
    tp.jacobian = Mat2::from_columns(u_, perp(u_));
    return tp;
  }
  Topology topology() const override { return Topology::Torus; }
  double width() const override { return w_; }
  double length() const override { return len_; }

 private:
  Vec2 p0_, u_;
  double len_, w_;
};

class SineProfile : public TimeProfile {
 public:
  SineProfile(double amp, double freq, double t0, double t1)
      : a_(amp), w_(freq), t0_(t0), t1_(t1) {}
  double value(double t) const override {
    return (t < t0_ || t > t1_) ? 0.0 : a_ * std::sin(w_ * (t - t0_));
  }
  double derivative(double t) const override {
    return (t < t0_ || t > t1_) ? 0.0 : a_ * w_ * std::cos(w_ * (t - t0_));
  }
  std::pair<double, double> support() const override { return {t0_, t1_}; }

 private:
  double a_, w_, t0_, t1_;
};

}  // namespace

TEST_CASE("bump template satisfies its defining conditions") {
  CHECK(BumpTemplate::value(0.0) == 0.0);
  CHECK(BumpTemplate::derivative(0.0) == 1.0);
  CHECK(BumpTemplate::value(0.5) == 0.0);
  CHECK(BumpTemplate::value(-0.7) == 0.0);
  double integral = 0.0, sup_a = 0.0, sup_da = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = -0.5 + (i + 0.5) / n;
    integral += BumpTemplate::value(x) / n;
    sup_a = std::max(sup_a, std::abs(BumpTemplate::value(x)));
    sup_da = std::max(sup_da, std::abs(BumpTemplate::derivative(x)));
    const double h = 1e-6;
    const double fd = (BumpTemplate::value(x + h) - BumpTemplate::value(x - h)) / (2 * h);
    if (i % 997 == 0) CHECK(BumpTemplate::derivative(x) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK(std::abs(integral) < 1e-14);
  CHECK(sup_a <= 1.0);
  CHECK(sup_da <= 1.0 + 1e-15);
}

TEST_CASE("constant and zero fields") {
  const auto plane = Surface::planar(std::sqrt(5.0), pi);
  const auto v = eval_field(MagneticField::constant(-1.0), plane, {0, {0.3, -1.2}});
  CHECK(v.f == -1.0);
  CHECK(v.grad == Vec2{0, 0});
  const auto z = eval_field(MagneticField::constant(0.0), plane, {0, {0.0, 0.0}});
  CHECK(z.f == 0.0);
}

TEST_CASE("sinusoidal torus field") {
  const auto t = Surface::torus();
  const auto f = MagneticField::sinusoidal({{1.0, 1, 0, 0.0}});
  const auto v = eval_field(f, t, {0, {0.25, 0.0}});
  CHECK(v.f == doctest::Approx(1.0));
  CHECK(std::abs(v.grad.x) < 1e-14);
  CHECK(v.grad.y == 0.0);
}

TEST_CASE("analytic gradients match finite differences") {
  const double h = 1e-6;
  auto check = [&](const MagneticField& f, const Surface& s, ChartPoint p) {
    const auto v = f.eval(s, p);
    const double fx = (f.eval(s, {p.chart, {p.pos.x + h, p.pos.y}}).f -
                       f.eval(s, {p.chart, {p.pos.x - h, p.pos.y}}).f) / (2 * h);
    const double fy = (f.eval(s, {p.chart, {p.pos.x, p.pos.y + h}}).f -
                       f.eval(s, {p.chart, {p.pos.x, p.pos.y - h}}).f) / (2 * h);
    CHECK(v.grad.x == doctest::Approx(fx).epsilon(1e-7).scale(1.0));
    CHECK(v.grad.y == doctest::Approx(fy).epsilon(1e-7).scale(1.0));
  };
  check(MagneticField::sinusoidal({{0.7, 2, 1, 0.3}, {-0.2, 0, 3, 1.0}}, 0.1),
        Surface::torus(1.0, 1.5), {0, {0.13, 0.77}});
  check(MagneticField::zonal({0.4, 1.0, -0.3, 0.2}), Surface::sphere(1.0), {0, {0.3, -0.6}});
  check(MagneticField::zonal({0.4, 1.0, -0.3, 0.2}), Surface::sphere(2.0), {1, {-0.2, 0.9}});
  check(MagneticField::polynomial({{1.0, 2, 1}, {-0.5, 0, 3}, {2.0, 0, 0}}),
        Surface::planar(3.0, 1.0), {0, {0.4, -0.8}});
}

TEST_CASE("zonal field agrees across sphere charts") {
  const auto s = Surface::sphere(1.0);
  const auto f = MagneticField::zonal({0.1, 0.8, 0.5});
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> r(0.5, 2.0), th(0, two_pi);
  for (int i = 0; i < 100; ++i) {
    const double rad = r(rng), a = th(rng);
    const ChartPoint p{0, {rad * std::cos(a), rad * std::sin(a)}};
    const auto q = *s.to_chart(p, 1);
    CHECK(std::abs(f.eval(s, p).f - f.eval(s, q).f) <= 1e-8);
    // Gradients agree as covectors: df(v) invariant under the chart change.
    const Vec2 v{0.3, -0.4};
    const auto pq = *s.to_chart(PhasePoint{0, p.pos, v}, 1);
    CHECK(dot(f.eval(s, p).grad, v) == doctest::Approx(dot(f.eval(s, q).grad, pq.vel)));
  }
}

TEST_CASE("field kinds are restricted to their surfaces") {
  CHECK_THROWS_AS(MagneticField::zonal({1.0}).validate_for(Surface::torus()), UnsupportedError);
  CHECK_THROWS_AS(MagneticField::sinusoidal({{}}).validate_for(Surface::sphere()),
                  UnsupportedError);
  CHECK_THROWS_AS(MagneticField::constant(0).eval(Surface::planar(1, 1), {0, {3, 0}}),
                  DomainError);
}

TEST_CASE("exactness by quadrature") {
  const auto t = Surface::torus();
  auto r0 = is_exact(MagneticField::constant(0.0), t);
  CHECK(r0.integral == 0.0);
  CHECK(r0.exact);
  auto r1 = is_exact(MagneticField::constant(1.0), t);
  CHECK(r1.integral == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_FALSE(r1.exact);
  auto rs = is_exact(MagneticField::sinusoidal({{1.0, 1, 0, 0.0}}), t);
  CHECK(std::abs(rs.integral) < 1e-12);
  CHECK(rs.exact);
  // Bumped torus: integral of 1 is the area, integral of lambda^2 over the cell.
  const auto tb = Surface::torus(1.0, 1.0, 0.5);
  CHECK(is_exact(MagneticField::constant(1.0), tb).integral ==
        doctest::Approx(1.0 + 0.25 * 0.25).epsilon(1e-12));
  // Sphere area and an odd zonal field.
  const auto s = Surface::sphere(1.5);
  CHECK(is_exact(MagneticField::constant(1.0), s).integral ==
        doctest::Approx(4 * pi * 2.25).epsilon(1e-10));
  CHECK(is_exact(MagneticField::zonal({0.0, 1.0, 0.0, 0.7}), s).exact);
  CHECK_THROWS_AS(is_exact(MagneticField::constant(1.0), Surface::planar(2, 1)),
                  UnsupportedError);
}

TEST_CASE("perturbations: zero profile, core vanishing, C1 bound, exactness") {
  const auto t = Surface::torus();
  const auto base = MagneticField::sinusoidal({{1.0, 1, 0, 0.0}});
  auto tube = std::make_shared<StraightTube>(Vec2{0.1, 0.5}, Vec2{1.0, 0.0}, 0.8, 0.2);

  SUBCASE("b = 0 leaves the field unchanged") {
    auto h = std::make_shared<PerturbationField>(tube, std::make_shared<SineProfile>(0, 1, 0, 1),
                                                 0.1);
    const auto pf = add_perturbation(base, t, h);
    for (double x : {0.2, 0.4, 0.6})
      for (double y : {0.45, 0.5, 0.53}) {
        CHECK(pf.field.eval(t, {0, {x, y}}).f == base.eval(t, {0, {x, y}}).f);
      }
  }

  SUBCASE("reported C1 bound from profile norms") {
    // |b|_C0 = 1 and |b'| = 9, so |b|_C1 = 10.
    auto prof = std::make_shared<SineProfile>(1.0, 9.0, 0.0, 0.8);
    auto h = std::make_shared<PerturbationField>(tube, prof, 0.01);
    CHECK(perturbation_c1_bound(1.0, 10.0, 0.01) == doctest::Approx(2.1));
    const auto n = h->profile_norms();
    CHECK(n.c0 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(n.c1 == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(add_perturbation(base, t, h).c1_bound == doctest::Approx(2.1).epsilon(1e-6));
  }

  SUBCASE("h vanishes on the core and obeys the C1 bound") {
    auto prof = std::make_shared<SineProfile>(1.5, 7.0, 0.1, 0.7);
    const double eps0 = 0.05;
    auto h = std::make_shared<PerturbationField>(tube, prof, eps0);
    const auto pf = add_perturbation(base, t, h);
    double sup = 0.0;
    for (int i = 0; i < 200; ++i)
      for (int j = 0; j < 200; ++j) {
        const double tt = 0.8 * (i + 0.5) / 200, xx = -0.5 * eps0 + eps0 * (j + 0.5) / 200;
        const ChartPoint p{0, {0.1 + tt, 0.5 + xx}};
        const auto v = h->eval_tube(p);
        REQUIRE(v.has_value());
        sup = std::max({sup, std::abs(v->h), std::abs(v->h_x), std::abs(v->h_t)});
      }
    CHECK(sup <= pf.c1_bound);
    for (int i = 1; i < 50; ++i) {
      const ChartPoint p{0, {0.1 + 0.8 * i / 50.0, 0.5}};
      CHECK(pf.field.eval(t, p).f == base.eval(t, p).f);
    }
  }

  SUBCASE("perturbations keep the field exact") {
    auto prof = std::make_shared<SineProfile>(2.0, 5.0, 0.0, 0.8);
    auto h = std::make_shared<PerturbationField>(tube, prof, 0.2);
    const auto pf = add_perturbation(base, t, h);
    const auto before = is_exact(base, t);
    const auto after = is_exact(pf.field, t, 1e-9, 128);
    CHECK(after.exact);
    CHECK(std::abs(after.integral - before.integral) <= 1e-9);
  }

  SUBCASE("tube from another surface is rejected") {
    auto h = std::make_shared<PerturbationField>(tube, std::make_shared<SineProfile>(1, 1, 0, 1),
                                                 0.1);
    CHECK_THROWS_AS(add_perturbation(MagneticField::constant(1.0), Surface::sphere(), h),
                    ValidationError);
  }
}
