//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file mane.hpp
//! Magnetic Lagrangians on the torus, loop actions, a bracket for the strict
//! critical value c_0 and rotation vectors of closed orbits.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maglab/field.hpp"
#include "maglab/orbits.hpp"

namespace maglab {

//! eta += coeff cos(2 pi (kx x / Lx + ky y / Ly) + phase).
struct OneFormTerm {
  Vec2 coeff;
  int kx = 0, ky = 0;
  double phase = 0.0;
};

//! L(x, v) = 1/2 g(v, v) - eta(v) on a torus, eta = closed + sum of terms.
class Lagrangian {
 public:
  Lagrangian(Surface torus, Vec2 closed = {}, std::vector<OneFormTerm> terms = {});
  //! Primitive of a sinusoidal field on a flat torus plus a closed part.
  //! Throws DomainError when f has nonzero mean and UnsupportedError for
  //! other field kinds, perturbed fields or bumped metrics.
  static Lagrangian for_field(const Surface& torus, const MagneticField& field, Vec2 closed = {});

  Vec2 eta(const Vec2& x) const;
  //! [[d eta_x/dx, d eta_x/dy], [d eta_y/dx, d eta_y/dy]]
  Mat2 deta(const Vec2& x) const;
  //! f with d eta = f dA.
  double field(const Vec2& x) const;
  double eval(const Vec2& x, const Vec2& v) const;

  const Surface& surface() const { return surface_; }
  Vec2 closed_part() const { return closed_; }
  const std::vector<OneFormTerm>& terms() const { return terms_; }

 private:
  Surface surface_;
  Vec2 closed_;
  std::vector<OneFormTerm> terms_;
};

//! gamma(t) = center + sum_j a_j cos(2 pi j t / T) + b_j sin(2 pi j t / T).
//! Null-homologous by construction.
struct FourierLoop {
  Vec2 center;
  std::vector<Vec2> a, b;
  double period = 1.0;

  static FourierLoop circle(const Vec2& center, double radius, double speed);
  Vec2 position(double t) const;
  Vec2 velocity(double t) const;
};

//! Pieces of the action of the unit-period shape: A_{L+k} over period T is
//! kinetic / T - flux + k T.
struct LoopEnergies {
  double kinetic = 0.0;  //!< 1/2 int_0^1 g(G', G') ds
  double flux = 0.0;     //!< int_0^1 eta(G') ds
  int nodes = 0;
};

//! Periodic trapezoid rule, doubled until the change is below tol.
LoopEnergies loop_energies(const Lagrangian& L, const FourierLoop& loop, double tol = 1e-11);

//! int_0^T L(gamma, gamma') + k dt.
double loop_action(const Lagrangian& L, const FourierLoop& loop, double k, double tol = 1e-11);

struct LoopSearch {
  int modes = 8;
  int restarts = 50;
  int max_evals = 3000;  //!< per restart
  int nodes = 128;       //!< quadrature nodes inside the descent
  double step = 0.05;    //!< initial simplex size
  //! Accepted witnesses have action below -margin.
  double margin = 1e-8;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct CriticalBracket {
  double c_lo = 0.0, c_hi = 0.0;
  bool has_witness = false;
  FourierLoop witness;          //!< negative (L + c_lo)-action
  double witness_action = 0.0;  //!< A_{L+c_lo}(witness)
  int bisection_steps = 0;
  long evaluations = 0;
  int restarts = 0;  //!< per tested k
  std::string c_hi_label;
};

//! Result of minimizing A_{L+k} over the loop family at one k.
struct LoopMinimum {
  bool negative = false;
  FourierLoop loop;
  double action = 0.0;
  long evaluations = 0;
};

LoopMinimum minimize_loop_action(const Lagrangian& L, double k, const LoopSearch& search,
                                 const std::vector<FourierLoop>& hints = {});

//! Bisection on k in [k_lo, k_hi]. Throws ValidationError when no negative
//! loop is found at k_lo or one is found at k_hi.
CriticalBracket estimate_critical_value(const Lagrangian& L, double k_lo, double k_hi,
                                        const LoopSearch& search = {},
                                        double bisection_tol = 1e-4);

struct RotationVector {
  int p = 0, q = 0;
  double period = 0.0;
  Vec2 rho;
  int multiplicity = 1;  //!< covers removed by the minimal-period check
};

//! Winding numbers over one period from the unwrapped lift. A closed orbit
//! that already closes at period / n is reported with its minimal period.
//! Throws UnsupportedError off the torus.
RotationVector rotation_vector(const Surface& surface, const MagneticField& field,
                               const ClosedOrbit& orbit, int max_cover = 6,
                               double close_tol = 1e-6);

}  // namespace maglab
