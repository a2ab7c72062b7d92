//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file kernels.hpp
//! Batched reductions over sampled grids: sup-norms of 2x2 matrix samples,
//! weighted sums for quadrature, and max-abs scans.
//!
//! Each kernel has a scalar reference implementation and an AVX2 variant.
//! The dispatching entry points pick the AVX2 path at runtime when the CPU
//! supports it; MAGLAB_SIMD=scalar in the environment forces the reference.
//---------------------------------------------------------------------------//
#pragma once

#include <span>

namespace maglab::kernels {

//! Matrices are passed structure-of-arrays: entries a[i], b[i], c[i], d[i]
//! form [[a, b], [c, d]]. All spans must have equal length.
struct Mat2Batch {
  std::span<const double> a, b, c, d;
};

double max_spectral_norm(const Mat2Batch& m);
double weighted_sum(std::span<const double> values, std::span<const double> weights);
double max_abs(std::span<const double> values);

//! Name of the variant the dispatcher selected ("avx2" or "scalar").
const char* active_variant();
bool avx2_available();

namespace scalar {
double max_spectral_norm(const Mat2Batch& m);
double weighted_sum(std::span<const double> values, std::span<const double> weights);
double max_abs(std::span<const double> values);
}  // namespace scalar

namespace avx2 {
// Only callable when avx2_available() is true.
double max_spectral_norm(const Mat2Batch& m);
double weighted_sum(std::span<const double> values, std::span<const double> weights);
double max_abs(std::span<const double> values);
}  // namespace avx2

}  // namespace maglab::kernels
