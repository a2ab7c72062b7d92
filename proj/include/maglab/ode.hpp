//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file ode.hpp
//! Dormand-Prince 5(4) with PI step control and 4th-order dense output.
//---------------------------------------------------------------------------//
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "maglab/errors.hpp"

namespace maglab {

template <std::size_t N>
using State = std::array<double, N>;

//! Dense output over one accepted step. t0 and h carry the sign of time.
template <std::size_t N>
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  int chart = 0;
  std::array<State<N>, 5> rc{};

  double t1() const { return t0 + h; }

  State<N> at(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    State<N> y;
    for (std::size_t i = 0; i < N; ++i)
      y[i] = rc[0][i] +
             th * (rc[1][i] + th1 * (rc[2][i] + th * (rc[3][i] + th1 * rc[4][i])));
    return y;
  }

  //! Time derivative of the interpolant.
  State<N> derivative(double t) const {
    const double th = (t - t0) / h;
    State<N> d;
    for (std::size_t i = 0; i < N; ++i) {
      // p(th) = r1 + th r2 + th(1-th) r3 + th^2(1-th) r4 + th^2(1-th)^2 r5
      const double dp = rc[1][i] + (1.0 - 2.0 * th) * rc[2][i] +
                        (2.0 * th - 3.0 * th * th) * rc[3][i] +
                        (2.0 * th - 6.0 * th * th + 4.0 * th * th * th) * rc[4][i];
      d[i] = dp / h;
    }
    return d;
  }
};

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  //!< 0 selects automatically
  double min_step = 1e-13;
  long max_steps = 20'000'000;
};

struct IntegratorStats {
  long steps = 0;
  long rejected = 0;
  long evaluations = 0;
};

//! Outcome of the per-step hook.
enum class StepAction {
  Continue,  //!< keep going with the state unchanged
  Modified,  //!< the hook changed the state; derivative must be recomputed
  Stop,      //!< end the integration after this step
};

//! Integrate dy/dt = rhs(y) from t0 to t1 (either direction). rhs is
//! autonomous. After every accepted step the hook receives the dense
//! segment and the end state, which it may modify (projection, chart change).
//! Returns the time actually reached.
template <std::size_t N, class Rhs, class Hook>
double dopri5(Rhs&& rhs, State<N>& y, double t0, double t1, const IntegratorOptions& opt,
              IntegratorStats& stats, Hook&& hook) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
  (void)c2; (void)c3; (void)c4; (void)c5;

  const double span = t1 - t0;
  if (span == 0.0) return t0;
  const double dir = span > 0 ? 1.0 : -1.0;
  // Integrate in s = dir * t so that steps are positive.
  auto f = [&](const State<N>& u, State<N>& out) {
    rhs(u, out);
    if (dir < 0)
      for (auto& v : out) v = -v;
    ++stats.evaluations;
  };

  const double s_end = std::abs(span);
  double s = 0.0;
  State<N> k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
  f(y, k1);

  auto err_norm = [&](const State<N>& a, const State<N>& b, const State<N>& e) {
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(a[i]), std::abs(b[i]));
      const double r = e[i] / sc;
      sum += r * r;
    }
    return std::sqrt(sum / N);
  };

  double h = opt.initial_step;
  if (!(h > 0)) {
    // Hairer's starting step heuristic.
    double d0 = 0, d1n = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt.abs_tol + opt.rel_tol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1n += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1n = std::sqrt(d1n / N);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, s_end);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h0 * k1[i];
    f(ytmp, k2);
    double d2 = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt.abs_tol + opt.rel_tol * std::abs(y[i]);
      d2 += ((k2[i] - k1[i]) / sc) * ((k2[i] - k1[i]) / sc);
    }
    d2 = std::sqrt(d2 / N) / h0;
    const double dm = std::max(d1n, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min(100 * h0, h1);
  }
  h = std::min(h, opt.max_step);

  double err_old = 1e-4;
  bool last_rejected = false;
  while (s < s_end) {
    if (stats.steps + stats.rejected >= opt.max_steps)
      throw StiffnessError("integrator exceeded the step budget");
    bool last = false;
    if (s + h >= s_end * (1.0 - 1e-15) || s + 1.01 * h >= s_end) {
      h = s_end - s;
      last = true;
    }
    if (h < opt.min_step * std::max(1.0, std::abs(s)) && !last)
      throw StiffnessError("step size underflow");

    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    f(ytmp, k2);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(ytmp, k3);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(ytmp, k4);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(ytmp, k5);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] =
          y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(ytmp, k6);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] =
          y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    f(ynew, k7);

    State<N> e;
    for (std::size_t i = 0; i < N; ++i)
      e[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    double err = err_norm(y, ynew, e);
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      DenseSegment<N> seg;
      seg.t0 = t0 + dir * s;
      seg.h = dir * h;
      for (std::size_t i = 0; i < N; ++i) {
        const double r2 = ynew[i] - y[i];
        const double r3 = h * k1[i] - r2;
        seg.rc[0][i] = y[i];
        seg.rc[1][i] = r2;
        seg.rc[2][i] = r3;
        seg.rc[3][i] = r2 - h * k7[i] - r3;
        seg.rc[4][i] =
            h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      s = last ? s_end : s + h;
      y = ynew;
      k1 = k7;
      ++stats.steps;
      const StepAction act = hook(seg, y);
      if (act == StepAction::Stop) return t0 + dir * s;
      if (act == StepAction::Modified) f(y, k1);

      // PI controller (beta = 0.04).
      double fac = 0.9 * std::pow(err, -0.7 / 5) * std::pow(err_old, 0.04);
      fac = std::clamp(fac, 0.2, 10.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h = std::min(h * fac, opt.max_step);
      err_old = std::max(err, 1e-4);
      last_rejected = false;
    } else {
      ++stats.rejected;
      const double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
      h *= fac;
      last_rejected = true;
    }
  }
  return t0 + dir * s;
}

}  // namespace maglab
