//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file franks.hpp
//! Local perturbations supported in a tube around an orbit segment and the
//! response of the linearized return map to them.
//!
//! A segment is an orbit arc gamma on [0, T]. Tube coordinates (t, x) are
//! psi(t, x) = gamma(t) + x i gamma'(t) in a fixed chart; a perturbation
//! h = a_eps0(x) b(t) shifts the magnetic curvature along the arc by -b(t), so
//! the fundamental matrix X of y'' = -K_mag y responds through
//! Z(T) = X(T) int X^-1 [[0, 0], [b, 0]] X dt.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "maglab/orbits.hpp"

namespace maglab {

//---------------------------------------------------------------------------//
// Segments and tubular charts
//---------------------------------------------------------------------------//

struct OrbitSegment {
  PhasePoint start;
  double duration = 0.0;   //!< T
  double offset = 0.0;     //!< start time along the closed orbit
  double period = 0.0;     //!< period of the closed orbit, 0 for a free arc
  //! Times in (0, T) where the rest of the closed orbit meets this arc.
  std::vector<double> crossings;
};

struct TubularOptions {
  FlowOptions flow;
  int core_samples = 400;  //!< samples of gamma used to seed the inversion
  int check_t = 100;       //!< injectivity grid
  int check_x = 20;
  double min_width = 1e-6;
};

class TubularChart : public TubeCoordinates {
 public:
  //! Flows f0 from the segment start and verifies injectivity on a sample
  //! grid, halving the width until it holds. Throws DomainError below
  //! min_width.
  static std::shared_ptr<TubularChart> build(const Surface& surface, const MagneticField& f0,
                                             const OrbitSegment& segment, double eps0,
                                             const TubularOptions& opts = {});

  std::optional<TubePoint> locate(const ChartPoint& p) const override;
  Topology topology() const override { return surface_.topology(); }
  double width() const override { return width_; }
  double length() const override { return duration_; }

  //! psi(t, x) in the chart of the tube.
  ChartPoint psi(double t, double x) const;
  //! Core state at time t in the chart of the tube.
  PhasePoint core(double t) const;
  int chart() const { return chart_; }
  double requested_width() const { return requested_; }
  bool shrunk() const { return width_ < requested_; }
  int shrink_steps() const { return shrink_steps_; }
  const Trajectory& trajectory() const { return *traj_; }

 private:
  TubularChart() = default;
  struct CoreFrame {
    Vec2 pos, vel, acc;
  };
  CoreFrame frame(double t) const;
  //! All tube preimages of p (chart of the tube) with |x| < limit.
  std::vector<std::pair<double, double>> preimages(const Vec2& p, double limit) const;
  double density(double t, double x) const;
  bool injective_at_width(double w, const TubularOptions& opts) const;

  Surface surface_ = Surface::torus();
  MagneticField field_ = MagneticField::constant(0.0);
  std::shared_ptr<Trajectory> traj_;
  int chart_ = 0;
  double duration_ = 0.0;
  double width_ = 0.0, requested_ = 0.0;
  int shrink_steps_ = 0;
  std::vector<double> sample_t_;
  std::vector<Vec2> sample_pos_;
  std::vector<double> sample_speed_;
};

//---------------------------------------------------------------------------//
// Profiles
//---------------------------------------------------------------------------//

//! c (1 - s^2)^5 with s = (t - center) / half_width, normalized to unit integral.
class BumpProfile : public TimeProfile {
 public:
  BumpProfile(double center, double half_width);
  double value(double t) const override { return eval(t, 0); }
  double derivative(double t) const override { return eval(t, 1); }
  std::pair<double, double> support() const override;
  //! k-th derivative, k <= 3.
  double eval(double t, int k) const;
  //! sup |k-th derivative|.
  double sup_norm(int k) const;
  double center() const { return center_; }
  double half_width() const { return half_width_; }

  //! Integral of the unit bump template over [-1, 1].
  static double template_integral();
  //! Normalized antiderivative: 0 at s = -1, 1 at s = 1.
  static double template_cdf(double s);

 private:
  double center_, half_width_;
};

//! Smoothed indicator of [0, T] with zero notches at given times.
class CutoffProfile : public TimeProfile {
 public:
  //! Each notch vanishes on [p - core, p + core] and recovers over `ramp`.
  CutoffProfile(double duration, std::vector<double> notches, double core, double ramp);
  double value(double t) const override;
  double derivative(double t) const override;
  std::pair<double, double> support() const override { return {0.0, duration_}; }
  //! Integral of |alpha - 1| over [0, T], by quadrature over the transition zones.
  double defect_integral() const;
  const std::vector<double>& notches() const { return notches_; }
  double ramp() const { return ramp_; }

 private:
  double factor(double d, int k) const;  // k-th derivative of the ramp in distance d
  double duration_;
  std::vector<double> notches_;
  double core_, ramp_;
};

//---------------------------------------------------------------------------//
// Constants
//---------------------------------------------------------------------------//

struct ConstantsOptions {
  double lambda = -1.0;       //!< initial window half-width; <= 0 means k0/4
  double c1_radius = 0.1;     //!< radius of the C^1 ball around f0 (epsilon)
  double chart_width = 0.05;  //!< requested tube width before the epsilon0 bound
  int samples = 10000;        //!< sup-norm sampling
  double inflation = 1.01;
  int direction_samples = 64; //!< unit directions for k6
  double min_lambda = 1e-9;
  FlowOptions flow;
  InjectivityOptions injectivity;
};

//! One inequality lhs < rhs (or <=) with slack rhs - lhs.
struct Inequality {
  std::string name;
  double lhs = 0.0, rhs = 0.0;
  bool strict = true;
  double slack() const { return rhs - lhs; }
  bool holds() const { return strict ? lhs < rhs : lhs <= rhs; }
};

struct FranksConstants {
  double c = 0.5;
  double duration = 0.0;  //!< T of the segment
  double k0 = 0.0, k1 = 0.0, lambda = 0.0, k2 = 0.0, k3 = 0.0, rho = 0.0;
  double k5 = 0.0, k6 = 0.0, delta1 = 0.0, delta = 0.0;
  double epsilon = 0.0, eps0 = 0.0;
  int lambda_halvings = 0;
  double delta_c0 = 0.0, delta_d1 = 0.0, Delta_c0 = 0.0, Delta_d2 = 0.0;
  double kmag_c0 = 0.0;
  double alpha_defect = 0.0;  //!< int |alpha - 1|
  std::shared_ptr<const BumpProfile> delta_profile;  //!< delta_lambda
  std::shared_ptr<const BumpProfile> Delta_profile;  //!< Delta_lambda
  std::shared_ptr<const CutoffProfile> alpha;
  //! Base flow over [0, max(T, k0)] with its fundamental matrix.
  std::shared_ptr<const FlowWithVariation> base;
  Surface surface = Surface::torus();
  MagneticField field = MagneticField::constant(0.0);

  double window_center() const { return 0.5 * k0; }
  double kmag(double t) const;
  double kmag_derivative(double t) const;
  //! The numeric inequalities between the constants.
  std::vector<Inequality> ledger() const;
  //! Ledger plus the support and normalization conditions of the profiles;
  //! names of failing ones in `failures`.
  bool check(std::vector<std::string>* failures = nullptr) const;
};

FranksConstants compute_constants(const Surface& surface, const MagneticField& f0, double c,
                                  const OrbitSegment& segment,
                                  const ConstantsOptions& opts = {});

//---------------------------------------------------------------------------//
// The family G(A)
//---------------------------------------------------------------------------//

//! A = [[b, c], [a, -b]].
struct PerturbA {
  double a = 0.0, b = 0.0, c = 0.0;
  Mat2 matrix() const { return {b, c, a, -b}; }
  double norm() const { return spectral_norm(matrix()); }
  PerturbA operator*(double s) const { return {a * s, b * s, c * s}; }
};

//! Unit-norm A from a direction in (a, b, c) space.
PerturbA normalized(const PerturbA& A);

//! beta_A(t) along the segment.
class BetaProfile : public TimeProfile {
 public:
  BetaProfile(const PerturbA& A, std::shared_ptr<const FranksConstants> constants);
  double value(double t) const override;
  double derivative(double t) const override;
  std::pair<double, double> support() const override;

 private:
  PerturbA A_;
  std::shared_ptr<const FranksConstants> k_;
};

//! Derivative of beta_{sA} at s = 0: alpha {delta a + delta' b - (Delta K + Delta''/2) c}.
double direction_b(const FranksConstants& k, const PerturbA& A, double t);

//! h = a_eps0(x) beta_A(t) on the chart. Throws ValidationError if |A| >= delta1.
std::shared_ptr<PerturbationField> build_GA(const PerturbA& A,
                                            std::shared_ptr<const FranksConstants> constants,
                                            std::shared_ptr<const TubularChart> chart);

//! G(A) as a field: f0 plus the perturbation, with its C^1 bound.
PerturbedField field_GA(const PerturbA& A, std::shared_ptr<const FranksConstants> constants,
                        std::shared_ptr<const TubularChart> chart);

//---------------------------------------------------------------------------//
// Responses
//---------------------------------------------------------------------------//

struct ResponseResult {
  Mat2 Z;
  double quadrature_error = 0.0;  //!< relative
};

//! Z(T) for a direction b supported in [lo, hi], by composite Gauss-Legendre
//! quadrature on the dense fundamental matrix, refined until the relative
//! change is below rel_tol.
ResponseResult variational_response(const VariationalPath& base, const std::function<double(double)>& b,
                                    double lo, double hi, double T, double rel_tol = 1e-10);

//! Convenience overload that integrates the variational flow first.
ResponseResult variational_response(const Surface& surface, const MagneticField& field,
                                    const OrbitSegment& segment,
                                    const std::function<double(double)>& b, double lo, double hi,
                                    const FlowOptions& flow = {});

//! Monodromy of the variational system over [0, T] of the given field.
Mat2 franks_response(const Surface& surface, const MagneticField& field,
                     const OrbitSegment& segment, const FlowOptions& flow = {},
                     double drift_tol = 1e-8);

//! S(G(A)) - S(f0) through the reduced equation along the core, in
//! difference form so that tiny offsets keep their relative accuracy.
//! Fixed-step RK4 over the window.
Mat2 response_offset(const FranksConstants& k, const PerturbA& A, int steps = 8192);

//---------------------------------------------------------------------------//
// Verification
//---------------------------------------------------------------------------//

struct CotaSample {
  PerturbA A;
  double z_norm = 0.0;
  double margin = 0.0;  //!< |Z| 2 k1^3 / |A|
};

struct CotaReport {
  std::vector<CotaSample> samples;
  double min_margin = 0.0;
  double max_margin = 0.0;
  double linearity_error = 0.0;  //!< max | |Z(2A)| / (2|Z(A)|) - 1 |
  bool passed = false;
};

//! Margin of the response bound for one A; infinite for A = 0.
CotaSample cota_sample(const FranksConstants& k, const PerturbA& A);

CotaReport verify_cota(const FranksConstants& k, int sample_count, std::uint64_t seed,
                       int workers = 1, bool throw_on_violation = true);

struct TargetResult {
  Mat2 target_offset;  //!< target - S(f0)
  double distance = 0.0;
  PerturbA A;
  double A_norm = 0.0;
  double residual = 0.0;           //!< Frobenius, absolute
  double relative_residual = 0.0;  //!< residual / distance
  int iterations = 0;
  bool converged = false;
  bool within_gene_bound = false;  //!< |A| <= 2 k1^3 distance
  std::string message;
};

struct SurjectivityReport {
  double radius = 0.0;  //!< distance of the targets from S(f0)
  std::vector<TargetResult> targets;
  double max_residual = 0.0;
  double max_relative_residual = 0.0;
  double max_A_norm = 0.0;
  bool passed = false;
};

struct SurjectivityOptions {
  int max_iters = 20;
  double fd_scale = 1e-5;       //!< relative to delta1
  double rel_residual = 1e-7;   //!< convergence: residual <= rel_residual * distance
  int workers = 1;
};

//! Offsets S(f0) (exp(t D) - I) of targets at Frobenius distance `radius`
//! from S(f0), for Fibonacci directions D in sl(2).
std::vector<Mat2> sphere_targets(const Mat2& base, double radius, int count);

SurjectivityReport verify_ball_surjectivity(const FranksConstants& k,
                                            const std::vector<Mat2>& target_offsets,
                                            const SurjectivityOptions& opts = {});

//! Solve S(G(A)) - S(f0) = offset for A.
TargetResult solve_target(const FranksConstants& k, const Mat2& offset,
                          const SurjectivityOptions& opts = {});

//---------------------------------------------------------------------------//
// Segment decomposition
//---------------------------------------------------------------------------//

//! n = ceil(T_theta / K) so that T_theta / n lies in (K/2, K].
int segment_count(double period, double K);

struct SplitSegment {
  OrbitSegment segment;
  std::shared_ptr<TubularChart> chart;
};

struct SplitOptions {
  double width = 0.05;
  TubularOptions tube;
  InjectivityOptions injectivity;
  double K = -1.0;  //!< override of K(c, f); <= 0 computes it
};

std::vector<SplitSegment> segment_split(const Surface& surface, const ClosedOrbit& orbit,
                                        const MagneticField& field, double c,
                                        const SplitOptions& opts = {});

//! Smallest chart distance from the tube points psi(t, x), t in [t_lo, t_hi],
//! |x| in {0, x_half}, of segment i to the cores of the other segments.
double min_core_distance(const Surface& surface, const std::vector<SplitSegment>& split,
                         std::size_t i, double t_lo, double t_hi, double x_half,
                         int samples = 200);

}  // namespace maglab
