//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file franks.cpp
//---------------------------------------------------------------------------//
#include "maglab/franks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "maglab/errors.hpp"
#include "maglab/parallel.hpp"
#include "maglab/quadrature.hpp"

namespace maglab {
namespace {

constexpr Mat2 kE21{0.0, 0.0, 1.0, 0.0};

// (1 - s^2)^5 expanded in powers of s.
constexpr double kBumpPoly[11] = {1, 0, -5, 0, 10, 0, -10, 0, 5, 0, -1};
constexpr double kBumpIntegral = 512.0 / 693.0;

double poly_derivative(double s, int k) {
  double acc = 0.0;
  for (int j = 10; j >= k; --j) {
    double c = kBumpPoly[j];
    for (int m = 0; m < k; ++m) c *= (j - m);
    acc = acc * s + c;
  }
  return acc;
}

double poly_antiderivative(double s) {
  double acc = 0.0;
  for (int j = 10; j >= 0; --j) acc = acc * s + kBumpPoly[j] / (j + 1);
  return acc * s;
}

// exp(M) - I for traceless M without cancellation.
Mat2 expm1_traceless(const Mat2& m) {
  const double q = -m.det();  // M^2 = q I
  double c1, s1;              // exp(M) - I = c1 I + s1 M
  if (q > 0) {
    const double mu = std::sqrt(q);
    const double sh = std::sinh(0.5 * mu);
    c1 = 2.0 * sh * sh;
    s1 = std::sinh(mu) / mu;
  } else if (q < 0) {
    const double nu = std::sqrt(-q);
    const double sn = std::sin(0.5 * nu);
    c1 = -2.0 * sn * sn;
    s1 = std::sin(nu) / nu;
  } else {
    c1 = 0.0;
    s1 = 1.0;
  }
  return Mat2{c1, 0.0, 0.0, c1} + s1 * m;
}

double sup_over(double lo, double hi, int samples, const std::function<double(double)>& fn) {
  double best = 0.0;
  for (int i = 0; i <= samples; ++i) best = std::max(best, fn(lo + (hi - lo) * i / samples));
  return best;
}

struct BetaParts {
  double value = 0.0, derivative = 0.0;
};

// beta_A and its t-derivative. The K + Delta''/(2 Delta) factor is combined
// with expm1 so that it stays finite where Delta vanishes.
BetaParts beta_eval(const FranksConstants& k, const PerturbA& A, double t) {
  const BumpProfile& dl = *k.delta_profile;
  const BumpProfile& Dl = *k.Delta_profile;
  const double lo = dl.support().first, hi = Dl.support().second;
  if (t <= lo || t >= hi) return {};
  const double al = k.alpha->value(t), ald = k.alpha->derivative(t);
  const double d0 = dl.eval(t, 0), d1 = dl.eval(t, 1), d2 = dl.eval(t, 2);
  const double D0 = Dl.eval(t, 0), D1 = Dl.eval(t, 1), D2 = Dl.eval(t, 2), D3 = Dl.eval(t, 3);
  BetaParts out;
  out.value = al * (d0 * A.a + d1 * A.b);
  out.derivative = ald * (d0 * A.a + d1 * A.b) + al * (d1 * A.a + d2 * A.b);
  if (D0 == 0.0 && D2 == 0.0 && D3 == 0.0) return out;
  const double K = k.kmag(t), Kd = k.kmag_derivative(t);
  const double u = -al * D0 * A.c;
  const double ud = -A.c * (ald * D0 + al * D1);
  const double em1 = std::expm1(u);
  double phi, phid;  // expm1(u)/u and its derivative
  if (std::abs(u) < 1e-4) {
    phi = 1.0 + u / 2.0 + u * u / 6.0;
    phid = 0.5 + u / 3.0 + u * u / 8.0;
  } else {
    phi = em1 / u;
    phid = (std::exp(u) * u - em1) / (u * u);
  }
  out.value += K * em1 + 0.5 * D2 * (-al * A.c) * phi;
  out.derivative += Kd * em1 + K * std::exp(u) * ud + 0.5 * D3 * (-al * A.c) * phi +
                    0.5 * D2 * (-ald * A.c) * phi + 0.5 * D2 * (-al * A.c) * phid * ud;
  return out;
}

// Intersection parameter of chords p0p1 and q0q1, if they cross.
std::optional<double> chord_crossing(const Vec2& p0, const Vec2& p1, const Vec2& q0,
                                     const Vec2& q1) {
  const Vec2 r = p1 - p0, s = q1 - q0;
  const double den = cross(r, s);
  if (den == 0.0) return std::nullopt;
  const double u = cross(q0 - p0, s) / den;
  const double v = cross(q0 - p0, r) / den;
  if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) return std::nullopt;
  return u;
}

}  // namespace

//---------------------------------------------------------------------------//
// TubularChart
//---------------------------------------------------------------------------//

std::shared_ptr<TubularChart> TubularChart::build(const Surface& surface, const MagneticField& f0,
                                                  const OrbitSegment& segment, double eps0,
                                                  const TubularOptions& opts) {
  if (!(segment.duration > 0)) throw ValidationError("segment duration must be positive");
  if (!(eps0 > 0)) throw ValidationError("tube width must be positive");
  std::shared_ptr<TubularChart> tc(new TubularChart());
  tc->surface_ = surface;
  tc->field_ = f0;
  tc->duration_ = segment.duration;
  tc->requested_ = eps0;
  tc->traj_ = std::make_shared<Trajectory>(flow(surface, f0, segment.start, segment.duration, opts.flow));
  if (tc->traj_->exited()) throw DomainError("orbit segment leaves the chart domain");

  // One chart for the whole tube: the one where the core stays farthest from
  // the chart boundary.
  const int n = std::max(opts.core_samples, 16);
  int best_chart = -1;
  double best_radius = std::numeric_limits<double>::infinity();
  for (int ch = 0; ch < surface.chart_count(); ++ch) {
    double worst = 0.0;
    bool ok = true;
    for (int i = 0; i <= n && ok; ++i) {
      const auto q = surface.to_chart(tc->traj_->state(segment.duration * i / n).base(), ch);
      if (!q) ok = false;
      else worst = std::max(worst, norm(q->pos));
    }
    if (ok && (surface.topology() != Topology::Sphere || worst < best_radius)) {
      if (best_chart < 0 || worst < best_radius) {
        best_chart = ch;
        best_radius = worst;
      }
    }
  }
  if (best_chart < 0) throw UnsupportedError("orbit segment does not fit in a single chart");
  tc->chart_ = best_chart;

  for (int i = 0; i <= n; ++i) {
    const double t = segment.duration * i / n;
    const CoreFrame f = tc->frame(t);
    tc->sample_t_.push_back(t);
    tc->sample_pos_.push_back(f.pos);
    tc->sample_speed_.push_back(norm(f.vel));
  }

  double w = eps0;
  while (!tc->injective_at_width(w, opts)) {
    w *= 0.5;
    ++tc->shrink_steps_;
    if (w < opts.min_width)
      throw DomainError("tubular chart is not injective above the minimal width");
  }
  tc->width_ = w;
  if (tc->shrunk())
    spdlog::info("tubular chart width reduced from {:.3e} to {:.3e}", eps0, w);
  return tc;
}

TubularChart::CoreFrame TubularChart::frame(double t) const {
  const auto s = surface_.to_chart(traj_->state(t), chart_);
  if (!s) throw DomainError("core point outside the tube chart");
  const auto [vel, acc] = magnetic_acceleration(surface_, field_, *s);
  return {s->pos, vel, acc};
}

PhasePoint TubularChart::core(double t) const {
  const CoreFrame f = frame(t);
  return {chart_, f.pos, f.vel};
}

ChartPoint TubularChart::psi(double t, double x) const {
  const CoreFrame f = frame(t);
  return {chart_, f.pos + x * perp(f.vel)};
}

double TubularChart::density(double t, double x) const {
  const CoreFrame f = frame(t);
  const Vec2 pos = f.pos + x * perp(f.vel);
  const Vec2 ct = f.vel + x * perp(f.acc);
  const double det = cross(ct, perp(f.vel));
  const double l = surface_.conformal_factor({chart_, pos});
  return l * l * det;
}

std::vector<std::pair<double, double>> TubularChart::preimages(const Vec2& p, double limit) const {
  std::vector<std::pair<double, double>> out;
  const std::size_t n = sample_t_.size();
  const double spacing = duration_ / static_cast<double>(n - 1);
  std::vector<std::size_t> seeds;
  std::size_t run_best = n;
  double run_dist = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 q = surface_.reduce_near(p, sample_pos_[i]);
    const double d = norm(q - sample_pos_[i]);
    const bool cand = d < 1.5 * sample_speed_[i] * (limit + spacing);
    if (cand) {
      if (run_best == n || d < run_dist) {
        run_best = i;
        run_dist = d;
      }
    }
    if ((!cand || i + 1 == n) && run_best != n) {
      seeds.push_back(run_best);
      run_best = n;
    }
  }
  for (std::size_t s : seeds) {
    double t = sample_t_[s];
    bool ok = false;
    CoreFrame f;
    Vec2 q;
    for (int it = 0; it < 40; ++it) {
      f = frame(t);
      q = surface_.reduce_near(p, f.pos);
      const Vec2 d = q - f.pos;
      const double g = dot(d, f.vel);
      const double gp = -dot(f.vel, f.vel) + dot(d, f.acc);
      if (gp == 0.0) break;
      const double step = -g / gp;
      t += std::clamp(step, -4 * spacing, 4 * spacing);
      if (t < -spacing || t > duration_ + spacing) break;
      if (std::abs(step) < 1e-15 * (1.0 + duration_)) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      // Accept a stalled iteration if the normal condition holds.
      f = frame(t);
      q = surface_.reduce_near(p, f.pos);
      ok = std::abs(dot(q - f.pos, f.vel)) <= 1e-12 * (1.0 + dot(f.vel, f.vel));
    }
    if (!ok || t <= 0.0 || t >= duration_) continue;
    f = frame(t);
    q = surface_.reduce_near(p, f.pos);
    const double x = dot(q - f.pos, perp(f.vel)) / dot(f.vel, f.vel);
    if (std::abs(x) >= limit) continue;
    const bool dup = std::any_of(out.begin(), out.end(),
                                 [&](const auto& e) { return std::abs(e.first - t) < 1e-9; });
    if (!dup) out.emplace_back(t, x);
  }
  return out;
}

bool TubularChart::injective_at_width(double w, const TubularOptions& opts) const {
  for (int i = 1; i <= opts.check_t; ++i) {
    const double t = duration_ * i / (opts.check_t + 1);
    for (int j = 0; j < opts.check_x; ++j) {
      const double x = -w + 2.0 * w * (j + 0.5) / opts.check_x;
      if (!(density(t, x) > 0)) return false;
      const ChartPoint p = psi(t, x);
      if (!surface_.contains(p)) return false;
      const auto pre = preimages(p.pos, w);
      if (pre.size() != 1 || std::abs(pre[0].first - t) > 1e-6) return false;
    }
  }
  return true;
}

std::optional<TubePoint> TubularChart::locate(const ChartPoint& p) const {
  const auto q = surface_.to_chart(p, chart_);
  if (!q) return std::nullopt;
  const auto pre = preimages(q->pos, width_);
  if (pre.empty()) return std::nullopt;
  const auto best = *std::min_element(pre.begin(), pre.end(), [](const auto& a, const auto& b) {
    return std::abs(a.second) < std::abs(b.second);
  });
  TubePoint tp;
  tp.t = best.first;
  tp.x = best.second;
  const CoreFrame f = frame(tp.t);
  const Vec2 pos = f.pos + tp.x * perp(f.vel);
  Vec2 ct = f.vel + tp.x * perp(f.acc), cx = perp(f.vel);
  if (p.chart != chart_) {
    ct = surface_.to_chart(PhasePoint{chart_, pos, ct}, p.chart)->vel;
    cx = surface_.to_chart(PhasePoint{chart_, pos, cx}, p.chart)->vel;
  }
  tp.jacobian = Mat2::from_columns(ct, cx);
  const double r0 = density(tp.t, 0.0);
  auto ratio = [&](double t, double x) { return density(t, 0.0) / density(t, x); };
  tp.density_ratio = r0 / density(tp.t, tp.x);
  const double ht = 1e-6 * std::max(1.0, duration_);
  const double hx = 1e-6 * std::max(width_, 1e-3);
  const double t_lo = std::max(tp.t - ht, 0.0), t_hi = std::min(tp.t + ht, duration_);
  tp.density_ratio_grad = {(ratio(t_hi, tp.x) - ratio(t_lo, tp.x)) / (t_hi - t_lo),
                           (ratio(tp.t, tp.x + hx) - ratio(tp.t, tp.x - hx)) / (2 * hx)};
  return tp;
}

//---------------------------------------------------------------------------//
// Profiles
//---------------------------------------------------------------------------//

BumpProfile::BumpProfile(double center, double half_width) : center_(center), half_width_(half_width) {
  if (!(half_width > 0)) throw ValidationError("bump half-width must be positive");
}

std::pair<double, double> BumpProfile::support() const {
  return {center_ - half_width_, center_ + half_width_};
}

double BumpProfile::eval(double t, int k) const {
  if (!(t > center_ - half_width_ && t < center_ + half_width_)) return 0.0;
  const double s = std::clamp((t - center_) / half_width_, -1.0, 1.0);
  return poly_derivative(s, k) / (kBumpIntegral * std::pow(half_width_, k + 1));
}

double BumpProfile::sup_norm(int k) const {
  // Polynomial on [-1, 1]; a fine grid plus the endpoints is accurate to
  // rounding for these low degrees.
  double m = 0.0;
  const int n = 200000;
  for (int i = 0; i <= n; ++i) m = std::max(m, std::abs(poly_derivative(-1.0 + 2.0 * i / n, k)));
  return m / (kBumpIntegral * std::pow(half_width_, k + 1));
}

double BumpProfile::template_integral() { return kBumpIntegral; }

double BumpProfile::template_cdf(double s) {
  if (s <= -1.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return (poly_antiderivative(s) - poly_antiderivative(-1.0)) / kBumpIntegral;
}

CutoffProfile::CutoffProfile(double duration, std::vector<double> notches, double core, double ramp)
    : duration_(duration), notches_(std::move(notches)), core_(core), ramp_(ramp) {
  if (!(ramp > 0) || core < 0) throw ValidationError("cutoff ramp must be positive");
  std::sort(notches_.begin(), notches_.end());
}

double CutoffProfile::factor(double d, int k) const {
  const double u = (d - core_) / ramp_;
  if (k == 0) return BumpProfile::template_cdf(2.0 * u - 1.0);
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 2.0 * poly_derivative(2.0 * u - 1.0, 0) / (kBumpIntegral * ramp_);
}

double CutoffProfile::value(double t) const {
  if (t <= 0.0 || t >= duration_) return 0.0;
  double v = factor(t, 0) * factor(duration_ - t, 0);
  for (double p : notches_) v *= factor(std::abs(t - p), 0);
  return v;
}

double CutoffProfile::derivative(double t) const {
  if (t <= 0.0 || t >= duration_) return 0.0;
  std::vector<double> f, df;
  f.push_back(factor(t, 0));
  df.push_back(factor(t, 1));
  f.push_back(factor(duration_ - t, 0));
  df.push_back(-factor(duration_ - t, 1));
  for (double p : notches_) {
    f.push_back(factor(std::abs(t - p), 0));
    df.push_back((t >= p ? 1.0 : -1.0) * factor(std::abs(t - p), 1));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double term = df[i];
    for (std::size_t j = 0; j < f.size() && term != 0.0; ++j)
      if (j != i) term *= f[j];
    total += term;
  }
  return total;
}

double CutoffProfile::defect_integral() const {
  const double reach = core_ + ramp_;
  std::vector<std::pair<double, double>> zones{{0.0, std::min(reach, duration_)},
                                               {std::max(duration_ - reach, 0.0), duration_}};
  for (double p : notches_)
    zones.emplace_back(std::max(p - reach, 0.0), std::min(p + reach, duration_));
  std::sort(zones.begin(), zones.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& z : zones) {
    if (z.second <= z.first) continue;
    if (!merged.empty() && z.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, z.second);
    else
      merged.push_back(z);
  }
  double total = 0.0;
  for (const auto& [lo, hi] : merged) {
    // Kinks sit at the notch edges; panels fine enough to resolve them.
    const int panels = std::max(64, static_cast<int>(std::ceil(16.0 * (hi - lo) / ramp_)));
    const CompositeRule r = composite_gl4(lo, hi, std::min(panels, 1 << 16));
    for (std::size_t i = 0; i < r.nodes.size(); ++i) total += r.weights[i] * (1.0 - value(r.nodes[i]));
  }
  return total;
}

//---------------------------------------------------------------------------//
// Constants
//---------------------------------------------------------------------------//

double FranksConstants::kmag(double t) const {
  return magnetic_curvature(surface, field, base->trajectory, t);
}

double FranksConstants::kmag_derivative(double t) const {
  const double h = 1e-6 * std::max(1.0, k0);
  return (kmag(t + h) - kmag(t - h)) / (2 * h);
}

std::vector<Inequality> FranksConstants::ledger() const {
  const double m = window_center();
  const double k1_3 = k1 * k1 * k1;
  return {
      {"0 < k2", 0.0, k2},
      {"k2 < 1/(16 k1^3)", k2, 1.0 / (16.0 * k1_3)},
      {"1/(16 k1^3) < 1", 1.0 / (16.0 * k1_3), 1.0},
      {"1 < k1", 1.0, k1},
      {"0 < rho", 0.0, rho},
      {"rho < 1/(4 k1^2 k3)", rho, 1.0 / (4.0 * k1 * k1 * k3)},
      {"1/(2 k1^2) < 1/k1^2 - k3 rho - 4 k1 k2", 1.0 / (2.0 * k1 * k1),
       1.0 / (k1 * k1) - k3 * rho - 4.0 * k1 * k2},
      {"int |alpha - 1| <= rho", alpha_defect, rho, false},
      {"0 < delta1", 0.0, delta1},
      {"delta1 < 1", delta1, 1.0},
      {"2 k5 delta1 < epsilon/2", 2.0 * k5 * delta1, 0.5 * epsilon},
      {"0 < eps0", 0.0, eps0},
      {"eps0 < epsilon/(2 k6)", eps0, epsilon / (2.0 * k6)},
      {"0 < k0/2 - lambda", 0.0, m - lambda},
      {"k0/2 + lambda < T", m + lambda, duration},
  };
}

bool FranksConstants::check(std::vector<std::string>* failures) const {
  std::vector<std::string> f;
  auto need = [&](bool ok, const char* what) {
    if (!ok) f.emplace_back(what);
  };
  const double m = window_center();
  need(delta_profile && Delta_profile && alpha, "profiles present");
  if (!f.empty()) {
    if (failures) *failures = f;
    return false;
  }
  need(delta_profile->support().first >= m - lambda * (1 + 1e-12) &&
           delta_profile->support().second <= m * (1 + 1e-15) && delta_profile->value(m) == 0.0,
       "supp delta_lambda in [k0/2 - lambda, k0/2)");
  need(Delta_profile->support().first >= m * (1 - 1e-15) &&
           Delta_profile->support().second <= (m + lambda) * (1 + 1e-12) &&
           Delta_profile->value(m) == 0.0,
       "supp Delta_lambda in (k0/2, k0/2 + lambda]");
  for (const BumpProfile* p : {delta_profile.get(), Delta_profile.get()}) {
    const auto [lo, hi] = p->support();
    const CompositeRule r = composite_gl4(lo, hi, 64);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * p->value(r.nodes[i]);
    need(std::abs(s - 1.0) <= 1e-12, "unit integral of the delta approximations");
  }
  for (const auto& q : ledger())
    if (!q.holds()) f.push_back(q.name);
  if (failures) *failures = f;
  return f.empty();
}

FranksConstants compute_constants(const Surface& surface, const MagneticField& f0, double c,
                                  const OrbitSegment& segment, const ConstantsOptions& opts) {
  FranksConstants k;
  k.c = c;
  k.surface = surface;
  k.field = f0;
  k.duration = segment.duration;
  const double T = segment.duration;
  k.k0 = injectivity_time(surface, f0, c, opts.injectivity);
  if (!(T > 0.5 * k.k0))
    throw ValidationError("segment is not longer than K/2; the window at K/2 does not fit");
  const double m = k.window_center();
  const PhasePoint start = on_energy_level(surface, segment.start, c);
  k.base = std::make_shared<FlowWithVariation>(
      flow_with_variation(surface, f0, start, std::max(T, k.k0), opts.flow));
  const VariationalPath& X = k.base->variation;
  const double inflate = opts.inflation;

  k.k1 = inflate * sup_over(0.0, k.k0, opts.samples, [&](double t) {
           const Mat2 x = X.X(t);
           return std::max(spectral_norm(x), spectral_norm(x.inverse()));
         });

  double lambda = opts.lambda > 0 ? opts.lambda : 0.25 * k.k0;
  const Mat2 Xm = X.X(m), Xmi = Xm.inverse();
  auto k2_of = [&](double lam) {
    return inflate * sup_over(m - lam, m + lam, opts.samples, [&](double t) {
             const Mat2 x = X.X(t);
             return std::max(spectral_norm(x - Xm), spectral_norm(x.inverse() - Xmi));
           });
  };
  const double k2_cap = 1.0 / (16.0 * k.k1 * k.k1 * k.k1);
  for (;;) {
    if (lambda < opts.min_lambda) throw NumericalError("window half-width lambda underflow");
    if (m + lambda < T && m - lambda > 0) {
      k.k2 = k2_of(lambda);
      if (k.k2 > 0 && k.k2 < k2_cap) break;
    }
    lambda *= 0.5;
    ++k.lambda_halvings;
  }
  k.lambda = lambda;

  auto dl = std::make_shared<BumpProfile>(m - 0.5 * lambda, 0.5 * lambda);
  auto Dl = std::make_shared<BumpProfile>(m + 0.5 * lambda, 0.5 * lambda);
  k.delta_profile = dl;
  k.Delta_profile = Dl;
  k.delta_c0 = dl->sup_norm(0);
  k.delta_d1 = dl->sup_norm(1);
  k.Delta_c0 = Dl->sup_norm(0);
  k.Delta_d2 = Dl->sup_norm(2);
  k.kmag_c0 = inflate * sup_over(0.0, T, opts.samples, [&](double t) { return std::abs(k.kmag(t)); });

  const double k1sq = k.k1 * k.k1;
  k.k3 = k1sq * (k.delta_c0 + k.delta_d1 + k.Delta_c0 * k.kmag_c0 + 0.5 * k.Delta_d2);
  k.rho = 1.0 / (8.0 * k1sq * k.k3);

  std::vector<double> notches = segment.crossings;
  notches.push_back(m);
  notches.push_back(m + lambda);
  const double ramp = k.rho / (3.0 * static_cast<double>(notches.size() + 1));
  k.alpha = std::make_shared<CutoffProfile>(T, notches, 0.25 * ramp, ramp);
  k.alpha_defect = k.alpha->defect_integral();

  // The exponential factor of k5 is taken on the ball |A| <= delta1 that is
  // actually used, with delta1 <= 1/|Delta|.
  k.epsilon = opts.c1_radius;
  double d1 = std::min(0.5, 1.0 / k.Delta_c0);
  auto k5_of = [&](double r) {
    return k.delta_c0 + k.delta_d1 +
           (k.kmag_c0 * k.Delta_c0 + 0.5 * k.Delta_d2) * std::exp(k.Delta_c0 * r);
  };
  for (int it = 0; it < 3; ++it) d1 = std::min(d1, k.epsilon / (8.0 * k5_of(d1)));
  k.delta1 = d1;
  k.k5 = k5_of(d1);

  // k6 = max over the same ball of |beta_A|_C1, sampled on the window.
  const auto [wlo, whi] = std::pair{dl->support().first, Dl->support().second};
  double k6 = 0.0;
  const int dirs = std::max(opts.direction_samples, 8);
  for (int i = 0; i < dirs; ++i) {
    // Fibonacci directions in (a, b, c).
    const double z = 1.0 - 2.0 * (i + 0.5) / dirs;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = i * pi * (3.0 - std::sqrt(5.0));
    const PerturbA A = normalized({r * std::cos(phi), r * std::sin(phi), z}) * d1;
    double s0 = 0.0, s1 = 0.0;
    const int n = opts.samples;
    for (int j = 0; j <= n; ++j) {
      const BetaParts b = beta_eval(k, A, wlo + (whi - wlo) * j / n);
      s0 = std::max(s0, std::abs(b.value));
      s1 = std::max(s1, std::abs(b.derivative));
    }
    k6 = std::max(k6, s0 + s1);
  }
  k.k6 = inflate * k6;
  k.eps0 = std::min(opts.chart_width, k.epsilon / (4.0 * k.k6));
  k.delta = k.delta1 / (2.0 * k.k1 * k.k1 * k.k1);
  return k;
}

//---------------------------------------------------------------------------//
// G(A)
//---------------------------------------------------------------------------//

PerturbA normalized(const PerturbA& A) {
  const double n = A.norm();
  if (!(n > 0)) throw ValidationError("cannot normalize A = 0");
  return A * (1.0 / n);
}

BetaProfile::BetaProfile(const PerturbA& A, std::shared_ptr<const FranksConstants> constants)
    : A_(A), k_(std::move(constants)) {}

double BetaProfile::value(double t) const { return beta_eval(*k_, A_, t).value; }
double BetaProfile::derivative(double t) const { return beta_eval(*k_, A_, t).derivative; }
std::pair<double, double> BetaProfile::support() const {
  return {k_->delta_profile->support().first, k_->Delta_profile->support().second};
}

double direction_b(const FranksConstants& k, const PerturbA& A, double t) {
  const BumpProfile& dl = *k.delta_profile;
  const BumpProfile& Dl = *k.Delta_profile;
  if (t <= dl.support().first || t >= Dl.support().second) return 0.0;
  const double al = k.alpha->value(t);
  if (al == 0.0) return 0.0;
  double v = dl.eval(t, 0) * A.a + dl.eval(t, 1) * A.b;
  const double D0 = Dl.eval(t, 0), D2 = Dl.eval(t, 2);
  if (A.c != 0.0 && (D0 != 0.0 || D2 != 0.0)) v -= (D0 * k.kmag(t) + 0.5 * D2) * A.c;
  return al * v;
}

std::shared_ptr<PerturbationField> build_GA(const PerturbA& A,
                                            std::shared_ptr<const FranksConstants> constants,
                                            std::shared_ptr<const TubularChart> chart) {
  if (!(A.norm() < constants->delta1))
    throw ValidationError("|A| must be below delta1 for G(A) to stay in the neighbourhood");
  const double eps0 = std::min(constants->eps0, chart->width());
  auto profile = std::make_shared<BetaProfile>(A, constants);
  return std::make_shared<PerturbationField>(std::move(chart), std::move(profile), eps0);
}

PerturbedField field_GA(const PerturbA& A, std::shared_ptr<const FranksConstants> constants,
                        std::shared_ptr<const TubularChart> chart) {
  auto pert = build_GA(A, constants, std::move(chart));
  return add_perturbation(constants->field, constants->surface, pert);
}

//---------------------------------------------------------------------------//
// Responses
//---------------------------------------------------------------------------//

ResponseResult variational_response(const VariationalPath& base,
                                    const std::function<double(double)>& b, double lo, double hi,
                                    double T, double rel_tol) {
  auto integrate = [&](int panels) {
    const CompositeRule r = composite_gl4(lo, hi, panels);
    Mat2 acc{0, 0, 0, 0};
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const double bv = b(r.nodes[i]);
      if (bv == 0.0) continue;
      const Mat2 x = base.X(r.nodes[i]);
      acc = acc + (r.weights[i] * bv) * (x.inverse() * kE21 * x);
    }
    return base.X(T) * acc;
  };
  ResponseResult out;
  if (!(hi > lo)) {
    out.Z = Mat2{0, 0, 0, 0};
    return out;
  }
  int panels = 64;
  Mat2 prev = integrate(panels);
  for (;;) {
    panels *= 2;
    const Mat2 cur = integrate(panels);
    const double scale = frobenius(cur);
    const double err = scale > 0 ? frobenius(cur - prev) / scale : 0.0;
    out.Z = cur;
    out.quadrature_error = err;
    if (err <= rel_tol || panels >= (1 << 16)) break;
    prev = cur;
  }
  return out;
}

ResponseResult variational_response(const Surface& surface, const MagneticField& field,
                                    const OrbitSegment& segment,
                                    const std::function<double(double)>& b, double lo, double hi,
                                    const FlowOptions& flow) {
  const auto fw = flow_with_variation(surface, field, segment.start, segment.duration, flow);
  return variational_response(fw.variation, b, lo, hi, segment.duration);
}

Mat2 franks_response(const Surface& surface, const MagneticField& field, const OrbitSegment& segment,
                     const FlowOptions& flow, double drift_tol) {
  const auto fw = flow_with_variation(surface, field, segment.start, segment.duration, flow);
  if (fw.trajectory.max_energy_drift() > drift_tol)
    throw EnergyDriftError("energy drift above tolerance along the segment");
  return fw.variation.final_X();
}

Mat2 response_offset(const FranksConstants& k, const PerturbA& A, int steps) {
  const VariationalPath& X = k.base->variation;
  const double lo = k.delta_profile->support().first, hi = k.Delta_profile->support().second;
  // W = X0^-1 X_A = I + V with V' = P (I + V), P = X0^-1 [[0, 0], [beta, 0]] X0.
  // Fixed nodes keep V a smooth function of A; the c terms cancel to about
  // 1e-7 of their size, which adaptive step selection turns into noise.
  auto P = [&](double t) {
    const double beta = beta_eval(k, A, t).value;
    if (beta == 0.0) return Mat2{0, 0, 0, 0};
    const Mat2 x = X.X(t);
    return beta * (x.inverse() * kE21 * x);
  };
  const Mat2 I = Mat2::identity();
  const double h = (hi - lo) / steps;
  Mat2 V{0, 0, 0, 0};
  Mat2 p0 = P(lo);
  for (int i = 0; i < steps; ++i) {
    const double t = lo + i * h;
    const Mat2 pm = P(t + 0.5 * h), p1 = P(i + 1 == steps ? hi : t + h);
    const Mat2 k1 = p0 * (I + V);
    const Mat2 k2 = pm * (I + V + (0.5 * h) * k1);
    const Mat2 k3 = pm * (I + V + (0.5 * h) * k2);
    const Mat2 k4 = p1 * (I + V + h * k3);
    V = V + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    p0 = p1;
  }
  return X.X(k.duration) * V;
}

//---------------------------------------------------------------------------//
// Verification
//---------------------------------------------------------------------------//

CotaSample cota_sample(const FranksConstants& k, const PerturbA& A) {
  CotaSample s;
  s.A = A;
  const double an = A.norm();
  const double lo = k.delta_profile->support().first, hi = k.Delta_profile->support().second;
  const auto r = variational_response(k.base->variation,
                                      [&](double t) { return direction_b(k, A, t); }, lo, hi,
                                      k.duration);
  s.z_norm = spectral_norm(r.Z);
  s.margin = an > 0 ? s.z_norm * 2.0 * k.k1 * k.k1 * k.k1 / an
                    : std::numeric_limits<double>::infinity();
  return s;
}

CotaReport verify_cota(const FranksConstants& k, int sample_count, std::uint64_t seed, int workers,
                       bool throw_on_violation) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<PerturbA> dirs;
  for (int i = 0; i < sample_count; ++i) {
    PerturbA A{normal(rng), normal(rng), normal(rng)};
    dirs.push_back(normalized(A));
  }
  struct Pair {
    CotaSample one, two;
  };
  const auto results = parallel_map<Pair>(dirs.size(), workers, [&](std::size_t i) {
    return Pair{cota_sample(k, dirs[i]), cota_sample(k, dirs[i] * 2.0)};
  });
  CotaReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  rep.max_margin = 0.0;
  for (const auto& p : results) {
    rep.samples.push_back(p.one);
    rep.min_margin = std::min(rep.min_margin, p.one.margin);
    rep.max_margin = std::max(rep.max_margin, p.one.margin);
    if (p.one.z_norm > 0)
      rep.linearity_error =
          std::max(rep.linearity_error, std::abs(p.two.z_norm / (2.0 * p.one.z_norm) - 1.0));
  }
  if (results.empty()) rep.min_margin = rep.max_margin = 0.0;
  rep.passed = rep.min_margin >= 1.0 || results.empty();
  if (!rep.passed && throw_on_violation) {
    for (const auto& s : rep.samples)
      if (s.margin < 1.0)
        throw CotaViolation("response bound violated for A = (" + std::to_string(s.A.a) + ", " +
                            std::to_string(s.A.b) + ", " + std::to_string(s.A.c) +
                            "), margin " + std::to_string(s.margin));
  }
  return rep;
}

std::vector<Mat2> sphere_targets(const Mat2& base, double radius, int count) {
  std::vector<Mat2> out;
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = i * pi * (3.0 - std::sqrt(5.0));
    const PerturbA d{r * std::cos(phi), r * std::sin(phi), z};
    const Mat2 D = d.matrix() * (1.0 / frobenius(d.matrix()));
    // Scale s with |base (exp(sD) - I)|_F = radius; secant from the linear guess.
    auto dist = [&](double s) { return frobenius(base * expm1_traceless(s * D)); };
    double s0 = radius / frobenius(base * D), s1 = s0 * radius / dist(s0);
    for (int it = 0; it < 30 && std::abs(dist(s1) - radius) > 1e-15 * radius; ++it) {
      const double g0 = dist(s0) - radius, g1 = dist(s1) - radius;
      if (g1 == g0) break;
      const double s2 = s1 - g1 * (s1 - s0) / (g1 - g0);
      s0 = s1;
      s1 = s2;
    }
    out.push_back(base * expm1_traceless(s1 * D));
  }
  return out;
}

TargetResult solve_target(const FranksConstants& k, const Mat2& offset,
                          const SurjectivityOptions& opts) {
  TargetResult res;
  res.target_offset = offset;
  res.distance = frobenius(offset);
  if (res.distance > k.delta * (1.0 + 1e-9)) res.message = "target outside the response ball";
  auto residual = [&](const PerturbA& A) { return response_offset(k, A) - offset; };
  auto flat = [](const Mat2& m) { return Eigen::Vector4d(m.a, m.b, m.c, m.d); };
  PerturbA A{0, 0, 0};
  Mat2 R = residual(A);
  const double h = opts.fd_scale * k.delta1;
  for (int it = 0; it <= opts.max_iters; ++it) {
    res.iterations = it;
    res.residual = frobenius(R);
    if (res.residual <= opts.rel_residual * std::max(res.distance, 1e-300) || res.residual == 0.0) {
      res.converged = true;
      break;
    }
    if (it == opts.max_iters) break;
    Eigen::Matrix<double, 4, 3> J;
    for (int j = 0; j < 3; ++j) {
      PerturbA e{j == 0 ? h : 0.0, j == 1 ? h : 0.0, j == 2 ? h : 0.0};
      const PerturbA ap{A.a + e.a, A.b + e.b, A.c + e.c}, am{A.a - e.a, A.b - e.b, A.c - e.c};
      J.col(j) = (flat(response_offset(k, ap)) - flat(response_offset(k, am))) / (2.0 * h);
    }
    const Eigen::Vector3d step = J.colPivHouseholderQr().solve(-flat(R));
    A = {A.a + step(0), A.b + step(1), A.c + step(2)};
    R = residual(A);
  }
  res.A = A;
  res.A_norm = A.norm();
  res.relative_residual = res.distance > 0 ? res.residual / res.distance : res.residual;
  res.within_gene_bound =
      res.A_norm <= 2.0 * k.k1 * k.k1 * k.k1 * res.distance * (1.0 + 1e-9) + 1e-300;
  if (!res.converged && res.message.empty()) res.message = "Newton did not converge";
  return res;
}

SurjectivityReport verify_ball_surjectivity(const FranksConstants& k,
                                            const std::vector<Mat2>& target_offsets,
                                            const SurjectivityOptions& opts) {
  SurjectivityReport rep;
  rep.targets = parallel_map<TargetResult>(target_offsets.size(), opts.workers, [&](std::size_t i) {
    return solve_target(k, target_offsets[i], opts);
  });
  rep.passed = true;
  for (const auto& t : rep.targets) {
    rep.radius = std::max(rep.radius, t.distance);
    rep.max_residual = std::max(rep.max_residual, t.residual);
    rep.max_relative_residual = std::max(rep.max_relative_residual, t.relative_residual);
    rep.max_A_norm = std::max(rep.max_A_norm, t.A_norm);
    rep.passed = rep.passed && t.converged && t.within_gene_bound && t.A_norm <= k.delta1;
  }
  return rep;
}

//---------------------------------------------------------------------------//
// Segment decomposition
//---------------------------------------------------------------------------//

int segment_count(double period, double K) {
  if (!(K > 0)) throw ValidationError("K must be positive");
  if (!(period > 0.5 * K))
    throw ValidationError("period not above K/2: inconsistent with the injectivity bound");
  int n = static_cast<int>(std::ceil(period / K - 1e-12));
  n = std::max(n, 1);
  if (period / n > K) ++n;
  if (period / n <= 0.5 * K && n > 1) --n;
  return n;
}

std::vector<SplitSegment> segment_split(const Surface& surface, const ClosedOrbit& orbit,
                                        const MagneticField& field, double c,
                                        const SplitOptions& opts) {
  const double K = opts.K > 0 ? opts.K : injectivity_time(surface, field, c, opts.injectivity);
  const double P = orbit.period;
  const int n = segment_count(P, K);
  const double t0 = P / n;
  const PhasePoint start = on_energy_level(surface, orbit.initial_state, c);
  const Trajectory traj = flow(surface, field, start, P, opts.tube.flow);

  const int per = 400;
  const int total = per * n;
  std::vector<PhasePoint> pts(total + 1);
  for (int j = 0; j <= total; ++j) pts[j] = traj.state(P * j / total);
  auto time_of = [&](int j) { return P * j / total; };

  std::vector<SplitSegment> out;
  for (int i = 0; i < n; ++i) {
    SplitSegment s;
    s.segment.start = i == 0 ? start : traj.state(i * t0);
    s.segment.duration = t0;
    s.segment.offset = i * t0;
    s.segment.period = P;
    const int a0 = i * per, a1 = (i + 1) * per;
    const double sigma = 0.1 * t0;

    // Crossings of this arc with the rest of the orbit, from chord intersections.
    double clearance = std::numeric_limits<double>::infinity();
    for (int j = a0; j < a1; ++j) {
      const ChartPoint ref = pts[j].base();
      for (int q = 0; q < total; ++q) {
        if (q >= a0 - 1 && q <= a1) continue;  // own arc and its neighbours
        const auto b0 = surface.express_near(pts[q].base(), ref);
        const auto b1 = surface.express_near(pts[q + 1].base(), ref);
        const auto p1 = surface.express_near(pts[j + 1].base(), ref);
        if (!b0 || !b1 || !p1) continue;
        if (auto u = chord_crossing(ref.pos, p1->pos, b0->pos, b1->pos)) {
          const double tc = time_of(j) + *u * (time_of(j + 1) - time_of(j)) - i * t0;
          if (tc > 0 && tc < t0 &&
              std::none_of(s.segment.crossings.begin(), s.segment.crossings.end(),
                           [&](double x) { return std::abs(x - tc) < 1e-9; }))
            s.segment.crossings.push_back(tc);
        }
        // Clearance away from crossings and from the joints with the neighbours.
        const double tj = time_of(j) - i * t0;
        const double sep = std::min(std::abs(time_of(q) - i * t0), std::abs(time_of(q) - (i + 1) * t0));
        const double sep_wrap = std::min(sep, std::abs(time_of(q) - P - i * t0));
        if (tj > sigma && tj < t0 - sigma && sep_wrap > sigma) {
          const double d = norm(b0->pos - ref.pos) / std::max(norm(pts[j].vel), 1e-300);
          clearance = std::min(clearance, d);
        }
      }
    }
    std::sort(s.segment.crossings.begin(), s.segment.crossings.end());
    const double width = std::min(opts.width, 0.25 * clearance);
    s.chart = TubularChart::build(surface, field, s.segment, width, opts.tube);
    out.push_back(std::move(s));
  }
  return out;
}

double min_core_distance(const Surface& surface, const std::vector<SplitSegment>& split,
                         std::size_t i, double t_lo, double t_hi, double x_half, int samples) {
  double best = std::numeric_limits<double>::infinity();
  const auto& chart = *split.at(i).chart;
  for (int a = 0; a <= samples; ++a) {
    const double t = t_lo + (t_hi - t_lo) * a / samples;
    for (double x : {-x_half, 0.0, x_half}) {
      const ChartPoint p = chart.psi(t, x);
      for (std::size_t j = 0; j < split.size(); ++j) {
        if (j == i) continue;
        const auto& other = *split[j].chart;
        for (int b = 0; b <= samples; ++b) {
          const PhasePoint q = other.core(other.length() * b / samples);
          const auto qq = surface.express_near(q.base(), p);
          if (qq) best = std::min(best, norm(qq->pos - p.pos));
        }
      }
    }
  }
  return best;
}

}  // namespace maglab
