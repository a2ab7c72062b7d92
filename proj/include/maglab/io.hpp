//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file io.hpp
//! JSON specs and reports, CSV plot data.
//---------------------------------------------------------------------------//
#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "json.hpp"
#include "maglab/chaos.hpp"
#include "maglab/errors.hpp"
#include "maglab/franks.hpp"
#include "maglab/mane.hpp"
#include "maglab/normalform.hpp"

namespace maglab {

using Json = nlohmann::ordered_json;

//! Throws ValidationError naming the first key of `j` not in `allowed`.
void expect_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where);

//! j[key] converted to T; ValidationError when missing or of the wrong type.
template <class T>
T get_required(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(where + ": key '" + key + "' has the wrong type");
  }
}
//! As get_required, with a fallback when the key is absent.
template <class T>
T get_or(const Json& j, const char* key, const T& fallback, const std::string& where) {
  return j.contains(key) ? get_required<T>(j, key, where) : fallback;
}

Surface surface_from_json(const Json& j);
MagneticField field_from_json(const Json& j);
PhasePoint phase_point_from_json(const Json& j);
Vec2 vec2_from_json(const Json& j, const std::string& where);
Mat2 mat2_from_json(const Json& j, const std::string& where);

Json to_json(const Vec2& v);
Json to_json(const Mat2& m);
Json to_json(const PhasePoint& p);
Json to_json(const ClosedOrbit& o);
Json to_json(const RotationVector& r);
Json to_json(const TwistData& t);
Json to_json(const TwistFit& f);
Json to_json(const FranksConstants& k);
Json to_json(const CotaReport& r);
Json to_json(const SurjectivityReport& r);
Json to_json(const EntropyReport& r);
Json to_json(const SplittingReport& r);
Json to_json(const FourierLoop& l);
Json to_json(const CriticalBracket& b);

//! Pretty-printed with a trailing newline. Doubles use shortest round-trip form.
void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

//! t,x,y,vx,vy,E sampled every dt (and at the end).
void write_trajectory_csv(const std::string& path, const Surface& surface,
                          const std::vector<const Trajectory*>& trajectories, double dt);
//! s,y,ydot,side with s the arclength along each branch.
void write_manifold_csv(const std::string& path, const std::vector<const ManifoldBranch*>& branches);
//! r,rho.
void write_fit_csv(const std::string& path, const TwistFit& fit);

}  // namespace maglab
