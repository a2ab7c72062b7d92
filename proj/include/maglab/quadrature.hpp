//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file quadrature.hpp
//---------------------------------------------------------------------------//
#pragma once

#include <array>
#include <vector>

namespace maglab {

//! 4-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 4> gl4_nodes = {
    -0.861136311594052575224, -0.339981043584856264803, 0.339981043584856264803,
    0.861136311594052575224};
inline constexpr std::array<double, 4> gl4_weights = {
    0.347854845137453857373, 0.652145154862546142627, 0.652145154862546142627,
    0.347854845137453857373};

//! Nodes and weights of the composite 4-point rule on [a, b] with n panels.
struct CompositeRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline CompositeRule composite_gl4(double a, double b, int panels) {
  CompositeRule r;
  r.nodes.reserve(4 * panels);
  r.weights.reserve(4 * panels);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int k = 0; k < 4; ++k) {
      r.nodes.push_back(mid + 0.5 * h * gl4_nodes[k]);
      r.weights.push_back(0.5 * h * gl4_weights[k]);
    }
  }
  return r;
}

}  // namespace maglab
