//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file normalform.cpp
//---------------------------------------------------------------------------//
#include "maglab/normalform.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "maglab/errors.hpp"

namespace maglab {
namespace {

using cplx = std::complex<double>;

// Polynomial in (w, conj w) truncated at total degree 3; a[j][k] multiplies
// w^j conj(w)^k.
struct CPoly {
  cplx a[4][4] = {};

  static CPoly constant(cplx c) {
    CPoly p;
    p.a[0][0] = c;
    return p;
  }
};

CPoly operator+(const CPoly& p, const CPoly& q) {
  CPoly r;
  for (int j = 0; j < 4; ++j)
    for (int k = 0; j + k < 4; ++k) r.a[j][k] = p.a[j][k] + q.a[j][k];
  return r;
}

CPoly operator-(const CPoly& p, const CPoly& q) {
  CPoly r;
  for (int j = 0; j < 4; ++j)
    for (int k = 0; j + k < 4; ++k) r.a[j][k] = p.a[j][k] - q.a[j][k];
  return r;
}

CPoly operator*(cplx s, const CPoly& p) {
  CPoly r;
  for (int j = 0; j < 4; ++j)
    for (int k = 0; j + k < 4; ++k) r.a[j][k] = s * p.a[j][k];
  return r;
}

CPoly operator*(const CPoly& p, const CPoly& q) {
  CPoly r;
  for (int j1 = 0; j1 < 4; ++j1)
    for (int k1 = 0; j1 + k1 < 4; ++k1) {
      if (p.a[j1][k1] == cplx{}) continue;
      for (int j2 = 0; j1 + k1 + j2 < 4; ++j2)
        for (int k2 = 0; j1 + k1 + j2 + k2 < 4; ++k2)
          r.a[j1 + j2][k1 + k2] += p.a[j1][k1] * q.a[j2][k2];
    }
  return r;
}

CPoly conjugate(const CPoly& p) {
  CPoly r;
  for (int j = 0; j < 4; ++j)
    for (int k = 0; j + k < 4; ++k) r.a[j][k] = std::conj(p.a[k][j]);
  return r;
}

// p(q, conj q)
CPoly compose(const CPoly& p, const CPoly& q) {
  CPoly pw[4], pc[4];
  pw[0] = pc[0] = CPoly::constant(1.0);
  const CPoly qc = conjugate(q);
  for (int n = 1; n < 4; ++n) {
    pw[n] = pw[n - 1] * q;
    pc[n] = pc[n - 1] * qc;
  }
  CPoly r;
  for (int j = 0; j < 4; ++j)
    for (int k = 0; j + k < 4; ++k)
      if (p.a[j][k] != cplx{}) r = r + p.a[j][k] * (pw[j] * pc[k]);
  return r;
}

// Real jet component evaluated on polynomial arguments; constant term dropped.
CPoly eval_real(const std::array<double, kJetTerms>& coef, const CPoly& X, const CPoly& Y) {
  CPoly xp[4], yp[4];
  xp[0] = yp[0] = CPoly::constant(1.0);
  for (int n = 1; n < 4; ++n) {
    xp[n] = xp[n - 1] * X;
    yp[n] = yp[n - 1] * Y;
  }
  CPoly r;
  for (int idx = 1; idx < kJetTerms; ++idx) {
    const auto [i, j] = monomial_powers(idx);
    if (coef[idx] != 0.0) r = r + cplx(coef[idx]) * (xp[i] * yp[j]);
  }
  return r;
}

struct BirkhoffCore {
  double omega = 0.0;
  cplx lambda;
  cplx c21;
  double quadratic_leftover = 0.0;
};

BirkhoffCore birkhoff_core(const std::array<std::array<double, kJetTerms>, 2>& coef) {
  const Mat2 m{coef[0][1], coef[0][2], coef[1][1], coef[1][2]};
  const EllipticFrame fr = elliptic_frame(m);
  const Mat2& L = fr.L;
  const Mat2 Li = L.inverse();
  const cplx I(0.0, 1.0);

  CPoly U, V;
  U.a[1][0] = 0.5;
  U.a[0][1] = 0.5;
  V.a[1][0] = -0.5 * I;
  V.a[0][1] = 0.5 * I;
  const CPoly X = cplx(L.a) * U + cplx(L.b) * V;
  const CPoly Y = cplx(L.c) * U + cplx(L.d) * V;
  const CPoly P1 = eval_real(coef[0], X, Y);
  const CPoly P2 = eval_real(coef[1], X, Y);
  const CPoly Q1 = cplx(Li.a) * P1 + cplx(Li.b) * P2;
  const CPoly Q2 = cplx(Li.c) * P1 + cplx(Li.d) * P2;
  const CPoly F = Q1 + I * Q2;

  const cplx lam = std::polar(1.0, fr.omega);
  CPoly h2;
  for (int j = 0; j <= 2; ++j) {
    const int k = 2 - j;
    h2.a[j][k] = F.a[j][k] / (std::pow(lam, j) * std::pow(std::conj(lam), k) - lam);
  }
  CPoly id;
  id.a[1][0] = 1.0;
  const CPoly H = id + h2;
  CPoly Hinv = id;
  for (int it = 0; it < 2; ++it) Hinv = id - compose(h2, Hinv);
  const CPoly G = compose(Hinv, compose(F, H));

  BirkhoffCore out;
  out.omega = fr.omega;
  out.lambda = lam;
  out.c21 = G.a[2][1];
  out.quadratic_leftover =
      std::max({std::abs(G.a[2][0]), std::abs(G.a[1][1]), std::abs(G.a[0][2])});
  return out;
}

double beta_of(const BirkhoffCore& b) {
  return std::imag(b.c21 * std::conj(b.lambda)) / two_pi;
}

// Five-point central stencils on offsets -2h..2h; derivative orders 0..3.
constexpr double kStencil[4][5] = {
    {0, 0, 1, 0, 0},
    {1.0 / 12, -8.0 / 12, 0, 8.0 / 12, -1.0 / 12},
    {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12},
    {-0.5, 1.0, 0, -1.0, 0.5},
};
constexpr int kStencilOrder[4] = {99, 4, 4, 2};
constexpr double kFactorial[4] = {1, 1, 2, 6};

std::array<std::array<double, kJetTerms>, 2> stencil_coefficients(const MapOracle& map,
                                                                  const Vec2& center, double h) {
  Vec2 val[5][5];
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      const Vec2 p = center + Vec2{(a - 2) * h, (b - 2) * h};
      val[a][b] = map.reduce_near(map.eval(p), center) - center;
    }
  std::array<std::array<double, kJetTerms>, 2> coef{};
  for (int idx = 1; idx < kJetTerms; ++idx) {
    const auto [i, j] = monomial_powers(idx);
    const double scale = std::pow(h, i + j) * kFactorial[i] * kFactorial[j];
    Vec2 acc{0, 0};
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) {
        const double w = kStencil[i][a] * kStencil[j][b];
        if (w != 0.0) acc = acc + w * val[a][b];
      }
    coef[0][idx] = acc.x / scale;
    coef[1][idx] = acc.y / scale;
  }
  return coef;
}

}  // namespace

int monomial_index(int i, int j) {
  const int d = i + j;
  if (i < 0 || j < 0 || d > 3) throw ValidationError("monomial degree out of range");
  static constexpr int offset[4] = {0, 1, 3, 6};
  return offset[d] + j;
}

std::array<int, 2> monomial_powers(int index) {
  static constexpr int table[kJetTerms][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1},
                                              {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}};
  if (index < 0 || index >= kJetTerms) throw ValidationError("monomial index out of range");
  return {table[index][0], table[index][1]};
}

Vec2 Jet3::eval(const Vec2& d) const {
  Vec2 r{0, 0};
  for (int idx = 0; idx < kJetTerms; ++idx) {
    const auto [i, j] = monomial_powers(idx);
    const double m = std::pow(d.x, i) * std::pow(d.y, j);
    r.x += coef[0][idx] * m;
    r.y += coef[1][idx] * m;
  }
  return r;
}

double Jet3::max_error() const {
  double e = 0.0;
  for (const auto& comp : error)
    for (double v : comp) e = std::max(e, v);
  return e;
}

Jet3 jet3(const MapOracle& map, const Vec2& center, double fd_scale) {
  if (!(fd_scale > 0)) throw ValidationError("fd_scale must be positive");
  Jet3 jet;
  jet.center = center;
  jet.fd_scale = fd_scale;
  const Vec2 p0 = map.reduce_near(map.eval(center), center) - center;
  const double h = 0.5 * fd_scale;
  const auto coarse = stencil_coefficients(map, center, h);
  const auto fine = stencil_coefficients(map, center, 0.5 * h);
  jet.coef[0][0] = p0.x;
  jet.coef[1][0] = p0.y;
  for (int idx = 1; idx < kJetTerms; ++idx) {
    const auto [i, j] = monomial_powers(idx);
    const int order = std::min(kStencilOrder[i], kStencilOrder[j]);
    const double denom = std::pow(2.0, order) - 1.0;
    for (int m = 0; m < 2; ++m) {
      const double diff = (fine[m][idx] - coarse[m][idx]) / denom;
      jet.coef[m][idx] = fine[m][idx] + diff;
      jet.error[m][idx] = std::abs(diff);
    }
  }
  return jet;
}

JetOptions::JetOptions() {
  ret.flow.rel_tol = 1e-12;
  ret.flow.abs_tol = 1e-13;
}

Jet3 jet3(const Section& section, const ClosedOrbit& orbit, const MagneticField& field,
          const JetOptions& opts) {
  const SectionReturnMap map(section, field, opts.ret);
  const double fd_scale =
      opts.fd_scale > 0 ? opts.fd_scale : opts.fd_fraction * section.half_width_y;
  auto start = section.coords(orbit.initial_state);
  if (!start) throw ValidationError("orbit state is not representable on the section");
  Vec2 p = *start;
  Vec2 r = map.eval(p) - p;
  for (int it = 0; it < opts.polish_iters && norm(r) > 1e-14; ++it) {
    const Mat2 dp = map.differential(p);
    const Mat2 a{dp.a - 1.0, dp.b, dp.c, dp.d - 1.0};
    const Vec2 q = p - a.inverse() * r;
    const Vec2 rq = map.eval(q) - q;
    if (norm(rq) >= norm(r)) break;
    p = q;
    r = rq;
  }
  if (norm(r) > 1e-6) throw ValidationError("jet base point is not a fixed point of the return map");
  if (norm(r) > 1e-10 * fd_scale)
    spdlog::warn("jet3: fixed-point residual {:.3e} exceeds 1e-10 * fd_scale", norm(r));
  return jet3(map, p, fd_scale);
}

std::array<bool, 4> resonance_flags(double alpha, double tol) {
  std::array<bool, 4> flags{};
  for (int n = 1; n <= 4; ++n) {
    const cplx ln = std::polar(1.0, two_pi * n * alpha);
    flags[n - 1] = std::abs(ln - 1.0) >= tol;
  }
  return flags;
}

EllipticFrame elliptic_frame(const Mat2& m) {
  const double tr = m.a + m.d;
  if (!(std::abs(tr) < 2.0)) throw DomainError("linear part is not elliptic");
  const double omega = std::acos(0.5 * tr);
  const cplx lam = std::polar(1.0, omega);
  cplx v0, v1;
  if (std::abs(m.b) >= std::abs(m.c)) {
    v0 = m.b;
    v1 = lam - m.a;
  } else {
    v0 = lam - m.d;
    v1 = m.c;
  }
  Vec2 re{v0.real(), v1.real()}, im{v0.imag(), v1.imag()};
  double det = cross(re, im);
  EllipticFrame fr;
  if (det > 0) {
    fr.omega = two_pi - omega;
  } else {
    im = -1.0 * im;
    det = -det;
    fr.omega = omega;
  }
  const double s = 1.0 / std::sqrt(det);
  fr.L = {s * re.x, s * im.x, s * re.y, s * im.y};
  return fr;
}

TwistData birkhoff_beta(const Jet3& jet, double beta_tol) {
  const BirkhoffCore core = birkhoff_core(jet.coef);
  TwistData td;
  td.alpha = core.omega / two_pi;
  td.nonresonant = resonance_flags(td.alpha);
  for (int n = 0; n < 4; ++n)
    if (!td.nonresonant[n])
      throw ResonantJet("rotation number " + std::to_string(td.alpha) + " is resonant of order " +
                        std::to_string(n + 1));
  td.beta = beta_of(core);
  td.radial_coefficient = std::real(core.c21 * std::conj(core.lambda));

  double err = 0.0;
  for (int m = 0; m < 2; ++m)
    for (int idx = 1; idx < kJetTerms; ++idx) {
      if (jet.error[m][idx] == 0.0) continue;
      auto coef = jet.coef;
      coef[m][idx] += jet.error[m][idx];
      err += std::abs(beta_of(birkhoff_core(coef)) - td.beta);
    }
  td.beta_error = err;
  td.beta_tol = beta_tol > 0 ? beta_tol : std::max(3.0 * err, 1e-10);
  td.twist = std::abs(td.beta) > td.beta_tol;
  return td;
}

TwistFit twist_by_rotation_number(const MapOracle& map, const Vec2& center, const Mat2& linear,
                                  const std::vector<double>& radii, const RotationOptions& opts) {
  if (radii.size() < 2) throw ValidationError("need at least two radii for the fit");
  if (opts.iterates < 1) throw ValidationError("iterates must be positive");
  const EllipticFrame fr = elliptic_frame(linear);
  const Mat2 Li = fr.L.inverse();
  TwistFit fit;
  fit.radii = radii;

  // Smooth-window (weighted Birkhoff) averages of the angle increments.
  std::vector<double> weight(opts.iterates);
  double wsum = 0.0;
  for (int n = 0; n < opts.iterates; ++n) {
    const double t = (n + 0.5) / opts.iterates;
    weight[n] = std::exp(-1.0 / (t * (1.0 - t)));
    wsum += weight[n];
  }

  for (double r : radii) {
    double rho = 0.0;
    for (double sgn : {1.0, -1.0}) {
      Vec2 w{sgn * r, 0.0};
      Vec2 p = center + fr.L * w;
      double acc = 0.0;
      for (int n = 0; n < opts.iterates; ++n) {
        const Vec2 q = map.reduce_near(map.eval(p), center);
        if (norm(q - center) > opts.escape_radius)
          throw DomainError("rotation-number iterates escape the section");
        const Vec2 wq = Li * (q - center);
        const double d = std::atan2(wq.y, wq.x) - std::atan2(w.y, w.x);
        acc += weight[n] * (fr.omega + std::remainder(d - fr.omega, two_pi));
        p = q;
        w = wq;
      }
      rho += 0.5 * acc / wsum / two_pi;
    }
    fit.rho.push_back(rho);
  }

  const double n = static_cast<double>(radii.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    sx += radii[i] * radii[i];
    sy += fit.rho[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double dx = radii[i] * radii[i] - mx;
    sxx += dx * dx;
    sxy += dx * (fit.rho[i] - my);
  }
  if (!(sxx > 0)) throw ValidationError("radii must be distinct");
  fit.beta = sxy / sxx;
  fit.alpha = my - fit.beta * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double e = fit.rho[i] - fit.alpha - fit.beta * radii[i] * radii[i];
    ssr += e * e;
  }
  fit.residual = std::sqrt(ssr / n);
  const double s2 = radii.size() > 2 ? ssr / (n - 2.0) : 0.0;
  fit.beta_error = std::sqrt(s2 / sxx);
  fit.alpha_error = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  return fit;
}

TwistFit twist_by_rotation_number(const Section& section, const ClosedOrbit& orbit,
                                  const MagneticField& field, const std::vector<double>& radii,
                                  const RotationOptions& opts, const ReturnOptions& ret) {
  if (classify(orbit).cls != FloquetClass::Elliptic)
    throw DomainError("rotation-number fit needs an elliptic orbit");
  const SectionReturnMap map(section, field, ret);
  auto center = section.coords(orbit.initial_state);
  if (!center) throw ValidationError("orbit state is not representable on the section");
  RotationOptions o = opts;
  o.escape_radius = std::min(o.escape_radius, section.half_width_y);
  return twist_by_rotation_number(map, *center, orbit.monodromy, radii, o);
}

FunctionMap twist_map(double alpha, double beta) {
  auto rotate = [alpha, beta](const Vec2& p, double sgn) {
    const double th = sgn * two_pi * (alpha + beta * dot(p, p));
    const double c = std::cos(th), s = std::sin(th);
    return Vec2{c * p.x - s * p.y, s * p.x + c * p.y};
  };
  return FunctionMap([rotate](const Vec2& p) { return rotate(p, 1.0); },
                     [rotate](const Vec2& p) { return rotate(p, -1.0); });
}

}  // namespace maglab
