//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file map_oracle.hpp
//! Planar area-preserving maps seen through evaluate / inverse / differential,
//! so that flow return maps and synthetic maps share the analysis code.
//---------------------------------------------------------------------------//
#pragma once

#include <functional>
#include <memory>

#include "maglab/orbits.hpp"

namespace maglab {

class MapOracle {
 public:
  virtual ~MapOracle() = default;
  virtual Vec2 eval(const Vec2& p) const = 0;
  virtual Vec2 inverse(const Vec2& p) const = 0;
  //! Jacobian; the default uses central differences.
  virtual Mat2 differential(const Vec2& p) const;
  //! Canonical representative of p near ref (for maps on a cylinder or torus).
  virtual Vec2 reduce_near(const Vec2& p, const Vec2&) const { return p; }
  //! Time between p and its image (1 for abstract maps).
  virtual double return_time(const Vec2&) const { return 1.0; }

  double fd_step = 1e-6;
};

//! Map given by a pair of callables.
class FunctionMap : public MapOracle {
 public:
  using Fn = std::function<Vec2(const Vec2&)>;
  FunctionMap(Fn f, Fn finv) : f_(std::move(f)), finv_(std::move(finv)) {}
  Vec2 eval(const Vec2& p) const override { return f_(p); }
  Vec2 inverse(const Vec2& p) const override { return finv_(p); }

 private:
  Fn f_, finv_;
};

//! First-return map of a magnetic flow on a section.
class SectionReturnMap : public MapOracle {
 public:
  SectionReturnMap(Section section, MagneticField field, ReturnOptions opts = {});
  Vec2 eval(const Vec2& p) const override;
  Vec2 inverse(const Vec2& p) const override;
  double return_time(const Vec2& p) const override;
  const Section& section() const { return section_; }

 private:
  Section section_;
  MagneticField field_;
  ReturnOptions opts_;
};

}  // namespace maglab
