//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
#include "maglab/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace maglab::kernels::scalar {

double max_spectral_norm(const Mat2Batch& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.a.size(); ++i) {
    const double a = m.a[i], b = m.b[i], c = m.c[i], d = m.d[i];
    const double s = a * a + b * b + c * c + d * d;
    const double det = a * d - b * c;
    const double disc = std::sqrt(std::max(0.0, s * s - 4.0 * det * det));
    best = std::max(best, std::sqrt(0.5 * (s + disc)));
  }
  return best;
}

double weighted_sum(std::span<const double> values, std::span<const double> weights) {
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += values[i] * weights[i];
  return acc;
}

double max_abs(std::span<const double> values) {
  double best = 0.0;
  for (double v : values) best = std::max(best, std::abs(v));
  return best;
}

}  // namespace maglab::kernels::scalar
