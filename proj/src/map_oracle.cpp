//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file map_oracle.cpp
//---------------------------------------------------------------------------//
#include "maglab/map_oracle.hpp"

namespace maglab {

Mat2 MapOracle::differential(const Vec2& p) const {
  const double h = fd_step;
  const Vec2 fx = reduce_near(eval(p + Vec2{h, 0}), eval(p)) - reduce_near(eval(p - Vec2{h, 0}), eval(p));
  const Vec2 fy = reduce_near(eval(p + Vec2{0, h}), eval(p)) - reduce_near(eval(p - Vec2{0, h}), eval(p));
  return {fx.x / (2 * h), fy.x / (2 * h), fx.y / (2 * h), fy.y / (2 * h)};
}

SectionReturnMap::SectionReturnMap(Section section, MagneticField field, ReturnOptions opts)
    : section_(std::move(section)), field_(std::move(field)), opts_(opts) {}

Vec2 SectionReturnMap::eval(const Vec2& p) const {
  ReturnOptions o = opts_;
  o.direction = 1;
  return first_return(section_, p, field_, o).coords;
}

Vec2 SectionReturnMap::inverse(const Vec2& p) const {
  ReturnOptions o = opts_;
  o.direction = -1;
  return first_return(section_, p, field_, o).coords;
}

double SectionReturnMap::return_time(const Vec2& p) const {
  ReturnOptions o = opts_;
  o.direction = 1;
  return first_return(section_, p, field_, o).time;
}

}  // namespace maglab
