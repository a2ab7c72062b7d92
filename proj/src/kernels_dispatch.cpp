//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
#include "maglab/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace maglab::kernels {

namespace {

struct Table {
  double (*max_spectral_norm)(const Mat2Batch&);
  double (*weighted_sum)(std::span<const double>, std::span<const double>);
  double (*max_abs)(std::span<const double>);
  const char* name;
};

bool cpu_has_avx2() {
#if defined(MAGLAB_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(__i386__)) && defined(__GNUC__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Table select() {
  const char* env = std::getenv("MAGLAB_SIMD");
  const bool force_scalar = env != nullptr && std::string_view(env) == "scalar";
  if (!force_scalar && cpu_has_avx2())
    return {avx2::max_spectral_norm, avx2::weighted_sum, avx2::max_abs, "avx2"};
  return {scalar::max_spectral_norm, scalar::weighted_sum, scalar::max_abs, "scalar"};
}

const Table& table() {
  static const Table t = select();
  return t;
}

}  // namespace

bool avx2_available() { return cpu_has_avx2(); }
const char* active_variant() { return table().name; }

double max_spectral_norm(const Mat2Batch& m) { return table().max_spectral_norm(m); }
double weighted_sum(std::span<const double> v, std::span<const double> w) {
  return table().weighted_sum(v, w);
}
double max_abs(std::span<const double> v) { return table().max_abs(v); }

}  // namespace maglab::kernels
