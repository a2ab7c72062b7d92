//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
#include <cmath>
#include <random>

#include "doctest.h"
#include "maglab/errors.hpp"
#include "maglab/franks.hpp"
#include "maglab/quadrature.hpp"

using namespace maglab;

namespace {

const Surface flat = Surface::torus();
const MagneticField zero = MagneticField::constant(0.0);
const MagneticField sine = MagneticField::sinusoidal({{1.0, 1, 0, 0.0}});
const OrbitSegment straight{{0, {0.1, 0.5}, {1, 0}}, 0.5};
// x = 1/2 is an orbit of sine with K_mag = -2 pi.
const OrbitSegment vertical{{0, {0.5, 0.0}, {0, 1}}, 1.0};
const double kv = std::sqrt(2.0 * pi);

Mat2 cosh_X(double t) {
  return {std::cosh(kv * t), std::sinh(kv * t) / kv, kv * std::sinh(kv * t), std::cosh(kv * t)};
}
Mat2 shear(double t) { return {1, t, 0, 1}; }
double shear_norm(double t) { return 0.5 * (t + std::sqrt(t * t + 4.0)); }

const std::shared_ptr<const FranksConstants>& flat_constants() {
  static const auto k =
      std::make_shared<const FranksConstants>(compute_constants(flat, zero, 0.5, straight));
  return k;
}
const std::shared_ptr<const FranksConstants>& vertical_constants() {
  static const auto k =
      std::make_shared<const FranksConstants>(compute_constants(flat, sine, 0.5, vertical));
  return k;
}

// s times a bump profile, for perturbations that are not in the G(A) family.
class ScaledProfile : public TimeProfile {
 public:
  ScaledProfile(std::shared_ptr<const TimeProfile> p, double s) : p_(std::move(p)), s_(s) {}
  double value(double t) const override { return s_ * p_->value(t); }
  double derivative(double t) const override { return s_ * p_->derivative(t); }
  std::pair<double, double> support() const override { return p_->support(); }

 private:
  std::shared_ptr<const TimeProfile> p_;
  double s_;
};

// Z(T) with the exact fundamental matrix and a fixed fine rule.
Mat2 exact_response(const std::function<Mat2(double)>& X, const std::function<double(double)>& b,
                    double lo, double hi, double T) {
  const CompositeRule r = composite_gl4(lo, hi, 4096);
  Mat2 acc{0, 0, 0, 0};
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const Mat2 x = X(r.nodes[i]);
    acc = acc + (r.weights[i] * b(r.nodes[i])) * (x.inverse() * Mat2{0, 0, 1, 0} * x);
  }
  return X(T) * acc;
}

double window_lo(const FranksConstants& k) { return k.delta_profile->support().first; }
double window_hi(const FranksConstants& k) { return k.Delta_profile->support().second; }

}  // namespace

TEST_CASE("bump profile") {
  const BumpProfile b(0.3, 0.05);
  CHECK(b.support() == std::pair{0.25, 0.35});
  CHECK(b.value(0.25) == 0.0);
  CHECK(b.value(0.36) == 0.0);
  CHECK(BumpProfile::template_integral() == doctest::Approx(512.0 / 693.0).epsilon(1e-15));
  CHECK(BumpProfile::template_cdf(-1.0) == 0.0);
  CHECK(BumpProfile::template_cdf(1.0) == 1.0);
  CHECK(BumpProfile::template_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  // Moments: int b = 1, int t b = center, int (t - c)^2 b = w^2 / 13.
  const CompositeRule r = composite_gl4(0.25, 0.35, 64);
  double m0 = 0, m1 = 0, m2 = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double t = r.nodes[i], w = r.weights[i] * b.value(t);
    m0 += w;
    m1 += w * t;
    m2 += w * (t - 0.3) * (t - 0.3);
  }
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m1 == doctest::Approx(0.3).epsilon(1e-13));
  CHECK(m2 == doctest::Approx(0.05 * 0.05 / 13.0).epsilon(1e-12));
  // Derivatives against central differences.
  for (double t : {0.27, 0.31, 0.345}) {
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-6;
      const double fd = (b.eval(t + h, k) - b.eval(t - h, k)) / (2 * h);
      CHECK(b.eval(t, k + 1) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
  CHECK(b.sup_norm(0) == doctest::Approx(b.value(0.3)).epsilon(1e-12));
  CHECK_THROWS_AS(BumpProfile(0.0, 0.0), ValidationError);
}

TEST_CASE("cutoff profile") {
  const CutoffProfile a(1.0, {0.4}, 0.01, 0.05);
  CHECK(a.value(0.0) == 0.0);
  CHECK(a.value(0.4) == 0.0);
  CHECK(a.value(0.405) == 0.0);
  CHECK(a.value(0.2) == 1.0);
  CHECK(a.value(0.7) == 1.0);
  // Defect integral against a dense midpoint sum over [0, T].
  const int n = 400000;
  double sum = 0;
  for (int i = 0; i < n; ++i) sum += 1.0 - a.value((i + 0.5) / n);
  CHECK(a.defect_integral() == doctest::Approx(sum / n).epsilon(1e-8));
  // Each zone loses core + ramp/2 on each side: ends count once, the notch twice.
  CHECK(a.defect_integral() == doctest::Approx(4 * (0.01 + 0.025)).epsilon(1e-10));
  for (double t : {0.03, 0.37, 0.43, 0.98}) {
    const double h = 1e-7;
    CHECK(a.derivative(t) == doctest::Approx((a.value(t + h) - a.value(t - h)) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("tubular chart") {
  SUBCASE("disk half circle: psi = (1 + x) (cos(pi - t), sin(pi - t))") {
    const Surface disk = Surface::planar(3.0, pi);
    const OrbitSegment half{{0, {-1, 0}, {0, 1}}, pi};
    const auto tc = TubularChart::build(disk, MagneticField::constant(-1.0), half, 0.1);
    CHECK_FALSE(tc->shrunk());
    CHECK(tc->width() == 0.1);
    for (double t : {0.1, 1.0, 2.0, 3.0}) {
      for (double x : {-0.09, 0.0, 0.05}) {
        const Vec2 expect = (1.0 + x) * Vec2{std::cos(pi - t), std::sin(pi - t)};
        CHECK(norm(tc->psi(t, x).pos - expect) <= 1e-9);
      }
    }
    // locate inverts psi and reports the Jacobian {gamma', i gamma'} scaled in t.
    const auto tp = tc->locate(tc->psi(1.2, 0.04));
    REQUIRE(tp.has_value());
    CHECK(tp->t == doctest::Approx(1.2).epsilon(1e-10));
    CHECK(tp->x == doctest::Approx(0.04).epsilon(1e-9));
    // Area density of psi is (1 + x); the ratio is 1/(1 + x).
    CHECK(tp->density_ratio == doctest::Approx(1.0 / 1.04).epsilon(1e-9));
    CHECK(tp->density_ratio_grad.y == doctest::Approx(-1.0 / (1.04 * 1.04)).epsilon(1e-5));
    CHECK_FALSE(tc->locate({0, {0.0, 0.0}}).has_value());
  }
  SUBCASE("flat straight segment") {
    const auto tc = TubularChart::build(flat, zero, straight, 0.05);
    for (double t : {0.0, 0.2, 0.5}) {
      for (double x : {-0.04, 0.03}) {
        const Vec2 expect = Vec2{0.1, 0.5} + t * Vec2{1, 0} + x * Vec2{0, 1};
        CHECK(norm(tc->psi(t, x).pos - expect) <= 1e-12);
      }
    }
    const auto tp = tc->locate({0, {0.35, 0.52}});
    REQUIRE(tp.has_value());
    CHECK(tp->t == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(tp->x == doctest::Approx(0.02).epsilon(1e-10));
    CHECK(tp->density_ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("core reproduces the trajectory") {
    const auto tc = TubularChart::build(flat, sine, vertical, 0.05);
    for (double t : {0.0, 0.3, 0.77}) {
      const auto p = tc->psi(t, 0.0);
      CHECK(norm(p.pos - tc->trajectory().state(t).pos) <= 1e-9);
    }
  }
  SUBCASE("width above the focal distance shrinks") {
    // x = -1 is the centre of the circle, where psi degenerates.
    const Surface disk = Surface::planar(3.0, pi);
    const OrbitSegment half{{0, {-1, 0}, {0, 1}}, pi};
    const auto tc = TubularChart::build(disk, MagneticField::constant(-1.0), half, 1.5);
    CHECK(tc->shrunk());
    CHECK(tc->shrink_steps() == 1);
    CHECK(tc->width() == 0.75);
    CHECK(tc->requested_width() == 1.5);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(TubularChart::build(flat, zero, straight, 0.0), ValidationError);
    TubularOptions o;
    o.min_width = 0.9;
    const Surface disk = Surface::planar(3.0, pi);
    const OrbitSegment half{{0, {-1, 0}, {0, 1}}, pi};
    CHECK_THROWS_AS(TubularChart::build(disk, MagneticField::constant(-1.0), half, 1.5, o),
                    DomainError);
  }
}

TEST_CASE("constants on the flat torus") {
  const auto& k = *flat_constants();
  CHECK(k.k0 == doctest::Approx(0.5).epsilon(1e-12));
  // X is the shear [[1, t], [0, 1]], its norm is increasing in t.
  CHECK(k.k1 == doctest::Approx(1.01 * shear_norm(k.k0)).epsilon(1e-9));
  for (double t : {0.0, 0.1, 0.37}) CHECK(max_abs(k.base->variation.X(t) - shear(t)) <= 1e-10);
  // k2 is the shear modulus of continuity: |X(t) - X(m)| = |t - m|.
  CHECK(k.k2 == doctest::Approx(1.01 * k.lambda).epsilon(1e-9));
  CHECK(k.kmag_c0 == 0.0);
  std::vector<std::string> failures;
  CHECK(k.check(&failures));
  CHECK(failures.empty());
  CHECK(0 < k.k2);
  CHECK(k.k2 < 1.0 / (16 * std::pow(k.k1, 3)));
  CHECK(1.0 / (16 * std::pow(k.k1, 3)) < 1.0);
  CHECK(1.0 < k.k1);
  CHECK(k.rho < 1.0 / (4 * k.k1 * k.k1 * k.k3));
  CHECK(1.0 / (k.k1 * k.k1) - k.k3 * k.rho - 4 * k.k1 * k.k2 > 1.0 / (2 * k.k1 * k.k1));
  CHECK(k.alpha_defect <= k.rho);
  // Transition widths were chosen for about half of the allowance.
  CHECK(k.alpha_defect == doctest::Approx(0.5 * k.rho).epsilon(0.05));
  // k3 from the displayed norms; sup |Delta''| of the template at s = 0 is 10.
  const double w = 0.5 * k.lambda, I = BumpProfile::template_integral();
  CHECK(k.Delta_d2 == doctest::Approx(10.0 / (I * w * w * w)).epsilon(1e-9));
  CHECK(k.delta_c0 == doctest::Approx(1.0 / (I * w)).epsilon(1e-9));
  CHECK(k.k3 == doctest::Approx(k.k1 * k.k1 * (k.delta_c0 + k.delta_d1 + 0.5 * k.Delta_d2)));
  // Supports sit on either side of k0/2.
  CHECK(k.delta_profile->support().second == doctest::Approx(0.25));
  CHECK(k.Delta_profile->support().first == doctest::Approx(0.25));
  CHECK(k.delta_profile->support().first >= 0.25 - k.lambda - 1e-15);
}

TEST_CASE("constants on a hyperbolic orbit") {
  const auto& k = *vertical_constants();
  std::vector<std::string> failures;
  CHECK(k.check(&failures));
  for (const auto& f : failures) MESSAGE(f);
  CHECK(k.kmag(0.3) == doctest::Approx(-2.0 * pi).epsilon(1e-9));
  CHECK(k.kmag_c0 == doctest::Approx(1.01 * 2.0 * pi).epsilon(1e-9));
  CHECK(std::abs(k.kmag_derivative(0.3)) < 1e-5);
  CHECK(k.lambda_halvings > 0);
  CHECK(k.delta > 0);
  CHECK(k.delta == doctest::Approx(k.delta1 / (2 * std::pow(k.k1, 3))));
  CHECK(2 * k.k5 * k.delta1 < 0.5 * k.epsilon);
  CHECK(k.eps0 < k.epsilon / (2 * k.k6));
}

TEST_CASE("beta_A") {
  const auto k = vertical_constants();
  SUBCASE("A = 0") {
    const BetaProfile b({0, 0, 0}, k);
    for (double t : {0.0, window_lo(*k) + 1e-5, k->window_center(), 0.9}) {
      CHECK(b.value(t) == 0.0);
      CHECK(b.derivative(t) == 0.0);
    }
    CHECK(build_GA({0, 0, 0}, k, TubularChart::build(flat, sine, vertical, k->eps0))->c1_bound() == 0.0);
  }
  SUBCASE("a only: alpha delta a") {
    const PerturbA A{0.5 * k->delta1, 0, 0};
    const BetaProfile b(A, k);
    for (int i = 0; i <= 20; ++i) {
      const double t = window_lo(*k) + (window_hi(*k) - window_lo(*k)) * i / 20.0;
      CHECK(b.value(t) == doctest::Approx(k->alpha->value(t) * k->delta_profile->value(t) * A.a));
    }
  }
  SUBCASE("c only: support inside supp Delta") {
    const PerturbA A{0, 0, 0.5 * k->delta1};
    const BetaProfile b(A, k);
    const auto [lo, hi] = k->Delta_profile->support();
    for (int i = 0; i <= 200; ++i) {
      const double t = window_lo(*k) + (window_hi(*k) - window_lo(*k)) * i / 200.0;
      if (t < lo || t > hi) CHECK(b.value(t) == 0.0);
    }
    CHECK(b.value(0.5 * (lo + hi)) != 0.0);
  }
  SUBCASE("derivative") {
    const PerturbA A{0.3 * k->delta1, -0.2 * k->delta1, 0.4 * k->delta1};
    const BetaProfile b(A, k);
    const double lo = window_lo(*k), hi = window_hi(*k);
    for (double s : {0.13, 0.4, 0.61, 0.87}) {
      const double t = lo + s * (hi - lo), h = 1e-4 * (hi - lo);
      CHECK(b.derivative(t) ==
            doctest::Approx((b.value(t + h) - b.value(t - h)) / (2 * h)).epsilon(1e-5));
    }
  }
  SUBCASE("direction is the derivative of beta_{sA} at s = 0") {
    const PerturbA A{0.3, -0.2, 0.4};
    const double s = 1e-6 * k->delta1;
    const double t = window_lo(*k) + 0.8 * (window_hi(*k) - window_lo(*k));
    CHECK(BetaProfile(A * s, k).value(t) / s == doctest::Approx(direction_b(*k, A, t)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(build_GA({k->delta1, 0, 0}, k, TubularChart::build(flat, sine, vertical, 0.01)),
                  ValidationError);
}

TEST_CASE("variational response") {
  SUBCASE("b = 0") {
    const auto r = variational_response(flat_constants()->base->variation,
                                        [](double) { return 0.0; }, 0.1, 0.2, 0.5);
    CHECK(r.Z == Mat2{0, 0, 0, 0});
  }
  SUBCASE("flat torus: shear conjugation moments") {
    // X^-1 E21 X = [[-t, -t^2], [1, t]], so Z = X(T) [[-m1, -m2], [m0, m1]].
    const auto& k = *flat_constants();
    const BumpProfile& d = *k.delta_profile;
    const double m = d.center(), w = d.half_width(), T = k.duration;
    const auto r = variational_response(k.base->variation, [&](double t) { return d.value(t); },
                                        d.support().first, d.support().second, T);
    const Mat2 expect = shear(T) * Mat2{-m, -(m * m + w * w / 13.0), 1.0, m};
    CHECK(max_abs(r.Z - expect) <= 1e-6 * frobenius(expect));
    CHECK(r.quadrature_error <= 1e-8);
  }
  SUBCASE("hyperbolic orbit: closed-form fundamental matrix") {
    const auto& k = *vertical_constants();
    for (const PerturbA dir : {PerturbA{1, 0, 0}, PerturbA{0, 1, 0}, PerturbA{0, 0, 1}}) {
      auto b = [&](double t) { return direction_b(k, dir, t); };
      const auto r = variational_response(k.base->variation, b, window_lo(k), window_hi(k), 1.0);
      const Mat2 expect = exact_response(cosh_X, b, window_lo(k), window_hi(k), 1.0);
      CHECK(frobenius(r.Z - expect) <= 1e-6 * frobenius(expect));
    }
  }
  SUBCASE("additivity") {
    const auto& k = *vertical_constants();
    const PerturbA A{0.3, 0, 0}, B{0, -0.7, 0.2};
    auto Z = [&](const std::function<double(double)>& b) {
      return variational_response(k.base->variation, b, window_lo(k), window_hi(k), 1.0).Z;
    };
    const Mat2 za = Z([&](double t) { return direction_b(k, A, t); });
    const Mat2 zb = Z([&](double t) { return direction_b(k, B, t); });
    const Mat2 zab = Z([&](double t) { return direction_b(k, A, t) + direction_b(k, B, t); });
    CHECK(frobenius(zab - za - zb) <= 1e-9 * frobenius(zab));
  }
}

TEST_CASE("franks response") {
  SUBCASE("zero perturbation equals X(T)") {
    const auto fw = flow_with_variation(flat, sine, vertical.start, 1.0);
    CHECK(max_abs(franks_response(flat, sine, vertical) - fw.variation.final_X()) == 0.0);
    CHECK(max_abs(franks_response(flat, sine, vertical) - cosh_X(1.0)) <= 1e-8);
  }
  SUBCASE("disk, T = 2 pi: identity") {
    const Surface disk = Surface::planar(3.0, pi);
    const OrbitSegment full{{0, {-1, 0}, {1, 0}}, 2 * pi};
    CHECK(max_abs(franks_response(disk, MagneticField::constant(-1.0), full) - Mat2::identity()) <=
          1e-8);
  }
  SUBCASE("finite differences match Z") {
    // Bump direction on the hyperbolic orbit; s h with s = 1e-4.
    const auto& k = *vertical_constants();
    const auto tube = TubularChart::build(flat, sine, vertical, k.eps0);
    const double s = 1e-4;
    auto pert = std::make_shared<PerturbationField>(
        tube, std::make_shared<ScaledProfile>(k.delta_profile, s), tube->width());
    const auto g = add_perturbation(sine, flat, pert);
    FlowOptions fo;
    fo.rel_tol = 1e-12;
    fo.abs_tol = 1e-13;
    const Mat2 S0 = franks_response(flat, sine, vertical, fo);
    const Mat2 S1 = franks_response(flat, g.field, vertical, fo);
    const auto Z = variational_response(k.base->variation,
                                        [&](double t) { return k.delta_profile->value(t); },
                                        window_lo(k), k.window_center(), 1.0)
                       .Z;
    CHECK(max_abs((S1 - S0) * (1.0 / s) - Z) <= 1e-3 * max_abs(Z));
  }
  SUBCASE("K_mag shift along the core is -b") {
    const auto tube = TubularChart::build(flat, zero, straight, 0.05);
    auto bump = std::make_shared<BumpProfile>(0.25, 0.1);
    auto pert = std::make_shared<PerturbationField>(tube, std::make_shared<ScaledProfile>(bump, 0.3),
                                                    0.05);
    const auto g = add_perturbation(zero, flat, pert);
    const Trajectory tr = flow(flat, zero, straight.start, 0.5);
    for (double t : {0.16, 0.2, 0.25, 0.31, 0.34, 0.45}) {
      const double dk = magnetic_curvature(flat, g.field, tr, t) - magnetic_curvature(flat, zero, tr, t);
      CHECK(std::abs(dk + 0.3 * bump->value(t)) <= 1e-8);
    }
  }
}

TEST_CASE("response bound") {
  const auto& k = *vertical_constants();
  SUBCASE("20 random directions") {
    const auto rep = verify_cota(k, 20, 2024, 1);
    CHECK(rep.passed);
    CHECK(rep.samples.size() == 20);
    CHECK(rep.min_margin >= 1.0);
    CHECK(rep.linearity_error <= 1e-6);
    for (const auto& s : rep.samples) CHECK(s.A.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("A = 0 is trivially satisfied") {
    const auto s = cota_sample(k, {0, 0, 0});
    CHECK(s.z_norm == 0.0);
    CHECK(s.margin >= 1.0);
  }
  SUBCASE("deterministic across worker counts") {
    const auto a = verify_cota(k, 6, 5, 1), b = verify_cota(k, 6, 5, 3);
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].margin == b.samples[i].margin);
  }
  SUBCASE("a violated bound throws") {
    FranksConstants weak = k;
    weak.k1 = 0.01;
    CHECK_THROWS_AS(verify_cota(weak, 3, 1), CotaViolation);
    CHECK_FALSE(verify_cota(weak, 3, 1, 1, false).passed);
  }
}

TEST_CASE("ball surjectivity") {
  const auto& k = *vertical_constants();
  const Mat2 S0 = k.base->variation.X(1.0);
  SUBCASE("targets on the delta/2 sphere") {
    const auto targets = sphere_targets(S0, 0.5 * k.delta, 8);
    for (const auto& t : targets) CHECK(frobenius(t) == doctest::Approx(0.5 * k.delta).epsilon(1e-10));
    const auto rep = verify_ball_surjectivity(k, targets);
    CHECK(rep.passed);
    CHECK(rep.max_relative_residual <= 1e-6);
    CHECK(rep.max_A_norm <= k.delta1);
    for (const auto& t : rep.targets) CHECK(t.within_gene_bound);
  }
  SUBCASE("the base point itself") {
    const auto r = solve_target(k, Mat2{0, 0, 0, 0});
    CHECK(r.converged);
    CHECK(r.A_norm == 0.0);
    CHECK(r.iterations == 0);
  }
  SUBCASE("forward-generated target") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    const PerturbA A0 = normalized({nd(rng), nd(rng), nd(rng)}) * (0.01 * k.delta1);
    const Mat2 offset = response_offset(k, A0);
    const auto r = solve_target(k, offset);
    CHECK(r.converged);
    CHECK(std::hypot(r.A.a - A0.a, r.A.b - A0.b, r.A.c - A0.c) <= 1e-5 * A0.norm());
    // Offsets agree with the first-variation response to first order.
    CHECK(spectral_norm(offset) == doctest::Approx(cota_sample(k, A0).z_norm).epsilon(1e-4));
  }
}

TEST_CASE("segment count") {
  CHECK(segment_count(2 * pi, 4.0) == 2);
  CHECK(segment_count(4.0, 4.0) == 1);
  CHECK(segment_count(2.5, 4.0) == 1);
  CHECK(segment_count(8.01, 4.0) == 3);
  for (double P : {1.0, 2.3, 7.7, 19.0}) {
    const int n = segment_count(P, 1.1);
    CHECK(P / n > 0.55);
    CHECK(P / n <= 1.1);
  }
  CHECK_THROWS_AS(segment_count(2.0, 4.0), ValidationError);
}

TEST_CASE("segment split of a hyperbolic orbit") {
  const ClosedOrbit o = find_closed_orbit(flat, sine, 0.5, vertical.start, 1e-11);
  SplitOptions so;
  const auto split = segment_split(flat, o, sine, 0.5, so);
  const double K = injectivity_time(flat, sine, 0.5);
  REQUIRE(split.size() == static_cast<std::size_t>(segment_count(o.period, K)));
  const double t0 = o.period / split.size();
  CHECK(t0 > 0.5 * K);
  CHECK(t0 <= K);
  for (const auto& s : split) CHECK(s.segment.crossings.empty());

  SUBCASE("composition of segment responses is the monodromy") {
    Mat2 prod = Mat2::identity();
    for (const auto& s : split) prod = franks_response(flat, sine, s.segment) * prod;
    CHECK(max_abs(prod - o.monodromy) <= 1e-6);
  }
  SUBCASE("supports stay away from the other cores") {
    for (std::size_t i = 0; i < split.size(); ++i) {
      const auto k = compute_constants(flat, sine, 0.5, split[i].segment);
      const double d = min_core_distance(flat, split, i, window_lo(k), window_hi(k),
                                         0.5 * std::min(k.eps0, split[i].chart->width()), 50);
      CHECK(d > 0.0);
    }
  }
  SUBCASE("G(A) preserves the core and exactness") {
    auto k = std::make_shared<const FranksConstants>(compute_constants(flat, sine, 0.5, split[0].segment));
    const PerturbA A = normalized({0.4, -0.3, 0.8}) * (0.5 * k->delta1);
    const auto g = field_GA(A, k, split[0].chart);
    CHECK(g.c1_bound <= k->epsilon);
    const Trajectory base = flow(flat, sine, o.initial_state, o.period);
    const Trajectory pert = flow(flat, g.field, o.initial_state, o.period);
    CHECK(std::abs(phase_distance(flat, pert.final_state(), o.initial_state) -
                   phase_distance(flat, base.final_state(), o.initial_state)) <= 1e-9);
    const auto e0 = is_exact(sine, flat);
    const auto e1 = is_exact(g.field, flat);
    CHECK(std::abs(e1.integral - e0.integral) <= 1e-9);
  }
}

TEST_CASE("perturbations integrate to zero") {
  // A wide tube so the quadrature resolves h; the odd x-profile cancels.
  const auto tube = TubularChart::build(flat, zero, straight, 0.1);
  auto pert = std::make_shared<PerturbationField>(
      tube, std::make_shared<ScaledProfile>(std::make_shared<BumpProfile>(0.25, 0.2), 0.5), 0.1);
  const auto g = add_perturbation(zero, flat, pert);
  CHECK(std::abs(is_exact(g.field, flat, 1e-9, 128).integral) <= 1e-9);
}
