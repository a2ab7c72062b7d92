//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file chaos.cpp
//---------------------------------------------------------------------------//
#include "maglab/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "maglab/dynamics.hpp"
#include "maglab/errors.hpp"

namespace maglab {
namespace {

double wrap_near(double x, double ref) {
  return x - two_pi * std::round((x - ref) / two_pi);
}

double segment_distance(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 d = b - a;
  const double len2 = dot(d, d);
  const double u = len2 > 0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
  return norm(p - (a + u * d));
}

// Iterated map used to parameterize a branch.
struct BranchMap {
  const MapOracle& map;
  bool forward;
  int power;
  Vec2 apply(Vec2 z, int times) const {
    for (int i = 0; i < times * power; ++i) z = forward ? map.eval(z) : map.inverse(z);
    return z;
  }
};

}  // namespace

//---------------------------------------------------------------------------//
// Synthetic maps
//---------------------------------------------------------------------------//

Vec2 StandardMap::eval(const Vec2& z) const {
  const double p = z.y + (k_ / m_) * std::sin(m_ * z.x);
  return {z.x + p, p};
}

Vec2 StandardMap::inverse(const Vec2& z) const {
  const double th = z.x - z.y;
  return {th, z.y - (k_ / m_) * std::sin(m_ * th)};
}

Mat2 StandardMap::differential(const Vec2& z) const {
  const double c = k_ * std::cos(m_ * z.x);
  return {1.0 + c, 1.0, c, 1.0};
}

Vec2 StandardMap::reduce_near(const Vec2& z, const Vec2& ref) const {
  return {wrap_near(z.x, ref.x), wrap_near(z.y, ref.y)};
}

Vec2 LinearHorseshoe::eval(const Vec2& z) const {
  if (z.y < 0.5) return {z.x / 3.0, 3.0 * z.y};
  return {1.0 - z.x / 3.0, 3.0 - 3.0 * z.y};
}

Vec2 LinearHorseshoe::inverse(const Vec2& z) const {
  if (z.x < 0.5) return {3.0 * z.x, z.y / 3.0};
  return {3.0 * (1.0 - z.x), 1.0 - z.y / 3.0};
}

Mat2 LinearHorseshoe::differential(const Vec2& z) const {
  if (z.y < 0.5) return {1.0 / 3.0, 0.0, 0.0, 3.0};
  return {-1.0 / 3.0, 0.0, 0.0, -3.0};
}

FunctionMap linear_map(const Mat2& m) {
  const Mat2 mi = m.inverse();
  return FunctionMap([m](const Vec2& z) { return m * z; }, [mi](const Vec2& z) { return mi * z; });
}

//---------------------------------------------------------------------------//
// Manifolds
//---------------------------------------------------------------------------//

Vec2 FixedPoint::frame_coords(const Vec2& z) const {
  return Mat2::from_columns(e_u, e_s).inverse() * (z - point);
}

Vec2 FixedPoint::from_frame(const Vec2& us) const { return point + us.x * e_u + us.y * e_s; }

FixedPoint hyperbolic_fixed_point(const MapOracle& map, const Vec2& p, double class_tol) {
  FixedPoint fp;
  fp.point = p;
  fp.jacobian = map.differential(p);
  const double tr = fp.jacobian.trace();
  if (!(std::abs(tr) > 2.0 + class_tol))
    throw DomainError("fixed point is not hyperbolic (|tr| = " + std::to_string(std::abs(tr)) + ")");
  const Classification cls = classify_trace(tr, class_tol);
  const Eigendata e = eigendata(fp.jacobian, cls.cls);
  fp.lambda_u = e.lambda_u;
  fp.lambda_s = e.lambda_s;
  fp.e_u = e.e_u;
  fp.e_s = e.e_s;
  return fp;
}

std::string to_string(Side s) { return s == Side::Stable ? "stable" : "unstable"; }

ManifoldBranch grow_manifold(const MapOracle& map, const FixedPoint& base, Side side, int sign,
                             const GrowOptions& opts) {
  if (sign != 1 && sign != -1) throw ValidationError("branch sign must be +1 or -1");
  if (!(opts.tol > 0) || !(opts.max_segment > 0) || !(opts.initial_offset > 0))
    throw ValidationError("manifold tolerances must be positive");
  ManifoldBranch br;
  br.base = base;
  br.side = side;
  br.sign = sign;
  const bool unstable = side == Side::Unstable;
  const double lam = unstable ? base.lambda_u : base.lambda_s;
  const Vec2 e = (unstable ? base.e_u : base.e_s) * static_cast<double>(sign);
  const BranchMap G{map, unstable, lam < 0 ? 2 : 1};
  // Growth factor of the parameter per application of G.
  const double growth = std::pow(unstable ? std::abs(lam) : 1.0 / std::abs(lam), G.power);
  const double s0 = opts.initial_offset, s1 = s0 * growth;
  const double min_ds = (s1 - s0) * 1e-12;

  br.points.push_back(base.point);
  br.level.push_back(-1);
  br.param.push_back(0.0);

  std::vector<double> params;
  for (int i = 0; i <= 8; ++i) params.push_back(s0 + (s1 - s0) * i / 8.0);
  try {
    for (int n = 0; n < opts.max_levels; ++n) {
      auto point = [&](double s) { return G.apply(base.point + s * e, n); };
      std::vector<double> refined{params.front()};
      std::vector<Vec2> pts{point(params.front())};
      // Depth-first refinement between consecutive parameters.
      for (std::size_t i = 1; i < params.size(); ++i) {
        std::vector<std::pair<double, Vec2>> stack{{params[i], point(params[i])}};
        while (!stack.empty()) {
          const double sa = refined.back();
          const Vec2 pa = pts.back();
          const auto [sb, pb] = stack.back();
          const double sm = 0.5 * (sa + sb);
          const Vec2 pm = point(sm);
          const double dev = segment_distance(pa, pb, pm);
          if ((dev > opts.tol || norm(pb - pa) > opts.max_segment) && sb - sa > min_ds) {
            stack.emplace_back(sm, pm);
            continue;
          }
          br.max_deviation = std::max(br.max_deviation, dev);
          refined.push_back(sb);
          pts.push_back(pb);
          stack.pop_back();
        }
      }
      // Append this level, skipping the first point after level 0 (it
      // duplicates the previous level's last point up to O(s0^2)).
      for (std::size_t i = (n == 0 ? 0 : 1); i < pts.size(); ++i) {
        const double step = norm(pts[i] - br.points.back());
        br.points.push_back(pts[i]);
        br.level.push_back(n);
        br.param.push_back(refined[i]);
        br.arclength += step;
        if (br.arclength >= opts.max_arclength || br.points.size() >= opts.max_points) break;
      }
      if (br.arclength >= opts.max_arclength || br.points.size() >= opts.max_points) break;
      params = refined;
    }
  } catch (const Error& ex) {
    br.truncated = true;
    br.message = ex.what();
    spdlog::warn("manifold branch truncated: {}", ex.what());
  }
  if (br.points.size() >= 2) {
    const Vec2 d = br.points[1] - br.points[0];
    br.first_angle = std::acos(std::clamp(std::abs(dot(d, e)) / norm(d), 0.0, 1.0));
  }
  return br;
}

double polyline_distance(const std::vector<Vec2>& poly, const Vec2& p) {
  if (poly.empty()) return std::numeric_limits<double>::infinity();
  double best = norm(p - poly.front());
  for (std::size_t i = 1; i < poly.size(); ++i)
    best = std::min(best, segment_distance(poly[i - 1], poly[i], p));
  return best;
}

double invariance_error(const MapOracle& map, const ManifoldBranch& br) {
  if (br.points.size() < 3) return 0.0;
  const bool unstable = br.side == Side::Unstable;
  const double lam = unstable ? br.base.lambda_u : br.base.lambda_s;
  const Vec2 e = (unstable ? br.base.e_u : br.base.e_s) * static_cast<double>(br.sign);
  const BranchMap G{map, unstable, lam < 0 ? 2 : 1};
  const int last_level = br.level.back();
  // Vertices map onto vertices by construction, so test the true midpoints
  // between them: G(midpoint) must stay within tol of the polyline.
  double worst = 0.0;
  for (std::size_t i = 2; i < br.points.size(); ++i) {
    if (br.level[i] != br.level[i - 1] || br.level[i] + 1 >= last_level) continue;
    const double s = 0.5 * (br.param[i - 1] + br.param[i]);
    const Vec2 img = G.apply(br.base.point + s * e, br.level[i] + 1);
    const auto lo = std::lower_bound(br.level.begin(), br.level.end(), br.level[i] + 1);
    const auto hi = std::upper_bound(br.level.begin(), br.level.end(), br.level[i] + 1);
    const std::size_t j0 = lo - br.level.begin() - (lo == br.level.begin() ? 0 : 1);
    const std::vector<Vec2> next(br.points.begin() + j0, br.points.begin() + (hi - br.level.begin()));
    worst = std::max(worst, polyline_distance(next, img));
  }
  return worst;
}

//---------------------------------------------------------------------------//
// Crossings
//---------------------------------------------------------------------------//

std::vector<Intersection> detect_homoclinic(const ManifoldBranch& st, const ManifoldBranch& un,
                                            double angle_tol) {
  std::vector<Intersection> out;
  const auto& P = st.points;
  const auto& Q = un.points;
  if (P.size() < 2 || Q.size() < 2) return out;
  const bool shared = norm(st.base.point - un.base.point) <= 1e-12;

  std::vector<double> arc_p(P.size(), 0.0), arc_q(Q.size(), 0.0);
  for (std::size_t i = 1; i < P.size(); ++i) arc_p[i] = arc_p[i - 1] + norm(P[i] - P[i - 1]);
  for (std::size_t j = 1; j < Q.size(); ++j) arc_q[j] = arc_q[j - 1] + norm(Q[j] - Q[j - 1]);

  // Bounding boxes of blocks of unstable segments for pruning.
  const std::size_t block = 64;
  struct Box {
    double x0, x1, y0, y1;
  };
  std::vector<Box> boxes;
  for (std::size_t b = 0; b + 1 < Q.size(); b += block) {
    Box bx{Q[b].x, Q[b].x, Q[b].y, Q[b].y};
    for (std::size_t j = b; j <= std::min(b + block, Q.size() - 1); ++j) {
      bx.x0 = std::min(bx.x0, Q[j].x);
      bx.x1 = std::max(bx.x1, Q[j].x);
      bx.y0 = std::min(bx.y0, Q[j].y);
      bx.y1 = std::max(bx.y1, Q[j].y);
    }
    boxes.push_back(bx);
  }

  for (std::size_t i = 0; i + 1 < P.size(); ++i) {
    const Vec2 a = P[i], b = P[i + 1], r = b - a;
    const double x0 = std::min(a.x, b.x), x1 = std::max(a.x, b.x);
    const double y0 = std::min(a.y, b.y), y1 = std::max(a.y, b.y);
    for (std::size_t bi = 0; bi < boxes.size(); ++bi) {
      const Box& bx = boxes[bi];
      if (bx.x1 < x0 || bx.x0 > x1 || bx.y1 < y0 || bx.y0 > y1) continue;
      const std::size_t j0 = bi * block, j1 = std::min(j0 + block, Q.size() - 1);
      for (std::size_t j = j0; j < j1; ++j) {
        if (shared && i == 0 && j == 0) continue;
        const Vec2 c = Q[j], s = Q[j + 1] - Q[j];
        const double den = cross(r, s);
        if (den == 0.0) continue;
        const double u = cross(c - a, s) / den, v = cross(c - a, r) / den;
        if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) continue;
        Intersection x;
        x.point = a + u * r;
        if (shared && norm(x.point - st.base.point) <= 1e-12) continue;
        x.angle = std::acos(std::clamp(std::abs(dot(r, s)) / (norm(r) * norm(s)), 0.0, 1.0));
        x.transversal = x.angle >= angle_tol;
        x.segment_s = i;
        x.segment_u = j;
        x.arc_s = arc_p[i] + u * norm(r);
        x.arc_u = arc_q[j] + v * norm(s);
        const bool dup = std::any_of(out.begin(), out.end(), [&](const Intersection& o) {
          return norm(o.point - x.point) <= 1e-12;
        });
        if (!dup) out.push_back(x);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Intersection& a, const Intersection& b) {
    return a.arc_s + a.arc_u < b.arc_s + b.arc_u;
  });
  return out;
}

//---------------------------------------------------------------------------//
// Horseshoes
//---------------------------------------------------------------------------//

bool covers(const MapOracle& map, const FixedPoint& base, const EigenBox& from, const EigenBox& to,
            int k, int edge_samples, int grid) {
  auto image = [&](double u, double s) {
    Vec2 z = base.from_frame({u, s});
    for (int i = 0; i < k; ++i) z = map.eval(z);
    return base.frame_coords(map.reduce_near(z, base.point));
  };
  auto inside_band = [&](const Vec2& us) {
    return us.x < to.u0 || us.x > to.u1 || (us.y > to.s0 && us.y < to.s1);
  };
  // Vertical edges land on opposite sides of the target's u-range.
  int left_side = 0;
  for (int e = 0; e < 2; ++e) {
    const double u = e == 0 ? from.u0 : from.u1;
    int side = 0;
    for (int i = 0; i <= edge_samples; ++i) {
      const Vec2 us = image(u, from.s0 + (from.s1 - from.s0) * i / edge_samples);
      const int here = us.x < to.u0 ? -1 : (us.x > to.u1 ? 1 : 0);
      if (here == 0 || (side != 0 && here != side)) return false;
      side = here;
    }
    if (e == 0) left_side = side;
    else if (side == left_side) return false;
  }
  // Nothing enters through the target's horizontal edges.
  for (int e = 0; e < 2; ++e) {
    const double s = e == 0 ? from.s0 : from.s1;
    for (int i = 0; i <= edge_samples; ++i)
      if (!inside_band(image(from.u0 + (from.u1 - from.u0) * i / edge_samples, s))) return false;
  }
  for (int i = 0; i <= grid; ++i)
    for (int j = 0; j <= grid; ++j) {
      const Vec2 us = image(from.u0 + (from.u1 - from.u0) * i / grid,
                            from.s0 + (from.s1 - from.s0) * j / grid);
      if (!inside_band(us)) return false;
    }
  return true;
}

namespace {

bool full_shift(const MapOracle& map, const FixedPoint& base, const std::vector<EigenBox>& boxes,
                int k, const HorseshoeParams& p) {
  for (const auto& a : boxes)
    for (const auto& b : boxes)
      if (!covers(map, base, a, b, k, p.edge_samples, p.grid)) return false;
  return true;
}

double mean_return_time(const MapOracle& map, const FixedPoint& base,
                        const std::vector<EigenBox>& boxes, int k) {
  double total = 0.0;
  int count = 0;
  for (const auto& b : boxes)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Vec2 z = base.from_frame({b.u0 + (b.u1 - b.u0) * (i + 0.5) / 3.0,
                                  b.s0 + (b.s1 - b.s0) * (j + 0.5) / 3.0});
        double t = 0.0;
        for (int n = 0; n < k; ++n) {
          t += map.return_time(z);
          z = map.eval(z);
        }
        total += t / k;
        ++count;
      }
  return total / count;
}

}  // namespace

EntropyReport certify_horseshoe(const MapOracle& map, const FixedPoint& base,
                                const std::vector<Intersection>& intersections,
                                const HorseshoeParams& params) {
  EntropyReport rep;
  rep.intersections = intersections;
  auto accept = [&](std::vector<EigenBox> boxes, int k) {
    rep.symbols = static_cast<int>(boxes.size());
    rep.iterate = k;
    rep.boxes = std::move(boxes);
    rep.per_iterate = std::log(static_cast<double>(rep.symbols)) / k;
    rep.return_time = mean_return_time(map, base, rep.boxes, k);
    rep.h_top_lower = rep.per_iterate / rep.return_time;
    rep.status = "certified";
    return rep;
  };

  if (params.k > 0 && params.boxes.size() >= 2 && params.k <= params.k_max) {
    try {
      if (full_shift(map, base, params.boxes, params.k, params)) return accept(params.boxes, params.k);
    } catch (const Error&) {
    }
  }
  if (intersections.empty()) {
    rep.status = params.boxes.empty() ? "no crossing" : "not certified";
    return rep;
  }
  std::vector<Intersection> trans;
  for (const auto& x : intersections)
    if (x.transversal && trans.size() < params.max_intersections) trans.push_back(x);
  if (trans.empty()) {
    rep.status = "no transversal crossing";
    return rep;
  }

  const double lam = std::abs(base.lambda_u);
  for (int k = 2; k <= params.k_max; ++k) {
    const double stretch = std::pow(lam, k);
    for (const auto& x : trans) {
      for (int m = 1; m < k; ++m) {
        const int n = k - m;
        std::vector<EigenBox> found;
        try {
          Vec2 back = x.point, fwd = x.point;
          for (int i = 0; i < m; ++i) back = map.inverse(back);
          for (int i = 0; i < n; ++i) fwd = map.eval(fwd);
          const Vec2 qm = base.frame_coords(map.reduce_near(back, base.point));
          const Vec2 qn = base.frame_coords(map.reduce_near(fwd, base.point));
          // Homoclinic only: both ends must approach the same fixed point,
          // q_{-m} along E^u and q_n along E^s.
          if (std::abs(qm.y) >= std::abs(qm.x) || std::abs(qn.x) >= std::abs(qn.y)) continue;
          if (norm(qm) > params.neighbourhood || norm(qn) > params.neighbourhood) continue;
          for (double w = 2.0; w < 0.5 * stretch && found.empty(); w *= 2.0) {
            const double a = w * std::abs(qm.x) / stretch;
            for (double h : params.height_factors) {
              const double b0 = h * std::abs(qn.y);
              for (double g : params.gap_slack) {
                const double b1 = std::abs(qn.y - qm.y) + g * std::abs(qn.y);
                std::vector<EigenBox> boxes{{-a, a, -b0, b0},
                                            {qm.x - a, qm.x + a, qm.y - b1, qm.y + b1}};
                if (full_shift(map, base, boxes, k, params)) {
                  found = boxes;
                  break;
                }
              }
              if (!found.empty()) break;
            }
          }
        } catch (const Error&) {
          continue;
        }
        if (!found.empty()) return accept(found, k);
      }
    }
  }
  rep.status = "not certified";
  return rep;
}

//---------------------------------------------------------------------------//
// Dominated splitting
//---------------------------------------------------------------------------//

double dominated_product(const Mat2& X, const Vec2& e_s, const Vec2& e_u) {
  return norm(X * e_s) / norm(e_s) * norm(e_u) / norm(X * e_u);
}

SplittingReport dominated_splitting_check(const std::vector<ClosedOrbit>& orbits,
                                          const OrbitPropagator& X, double T,
                                          double lambda_target, int m_max) {
  if (!(T > 0)) throw ValidationError("T must be positive");
  for (const auto& o : orbits)
    if (o.cls != FloquetClass::Hyperbolic)
      throw DomainError("dominated splitting needs hyperbolic orbits; got " + to_string(o.cls));
  SplittingReport rep;
  rep.T = T;
  rep.lambda_target = lambda_target;
  auto product = [&](std::size_t i, double t) {
    return dominated_product(X(i, t), orbits[i].eigen.e_s, orbits[i].eigen.e_u);
  };
  for (std::size_t i = 0; i < orbits.size(); ++i) {
    OrbitSplitting s;
    s.period = orbits[i].period;
    s.product = product(i, T);
    for (int N = 2; N <= 3; ++N)
      s.power_error[N - 2] = std::abs(product(i, N * T) / std::pow(s.product, N) - 1.0);
    rep.max_product = std::max(rep.max_product, s.product);
    rep.orbits.push_back(s);
  }
  rep.certified = !orbits.empty() && rep.max_product <= lambda_target && rep.max_product < 1.0;
  rep.m = 0;
  for (int m = 1; m <= m_max && !orbits.empty(); ++m) {
    double worst = 0.0;
    for (std::size_t i = 0; i < orbits.size(); ++i) worst = std::max(worst, product(i, m * T));
    if (worst <= lambda_target && worst < 1.0) {
      rep.m = m;
      break;
    }
  }
  return rep;
}

SplittingReport dominated_splitting_check(const std::vector<ClosedOrbit>& orbits,
                                          const Surface& surface, const MagneticField& field,
                                          double T, double lambda_target, int m_max) {
  std::vector<std::shared_ptr<FlowWithVariation>> flows(orbits.size());
  const double horizon = 3.0 * std::max(1, m_max) * T;
  auto X = [&](std::size_t i, double t) {
    if (!flows[i])
      flows[i] = std::make_shared<FlowWithVariation>(
          flow_with_variation(surface, field, orbits[i].initial_state, horizon));
    return flows[i]->variation.X(t);
  };
  return dominated_splitting_check(orbits, X, T, lambda_target, m_max);
}

SplittingReport dominated_splitting_check(const std::vector<ClosedOrbit>& orbits, double T,
                                          double lambda_target, int m_max) {
  auto X = [&](std::size_t i, double t) {
    const double n = t / orbits[i].period;
    const long k = std::lround(n);
    if (k < 0 || std::abs(n - k) > 1e-9)
      throw ValidationError("time is not a multiple of the orbit period");
    Mat2 out = Mat2::identity();
    for (long j = 0; j < k; ++j) out = orbits[i].monodromy * out;
    return out;
  };
  return dominated_splitting_check(orbits, X, T, lambda_target, m_max);
}

}  // namespace maglab
