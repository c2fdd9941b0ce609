// Copyright 2026 The hpq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// AVX2 variants. This file is compiled with -mavx2 but without -mfma so
// that every product and sum rounds exactly as in the scalar reference;
// the equivalence tests compare bit patterns.

#include "hpq/kernels.hpp"

#if defined(HPQ_HAVE_AVX2)
#include <immintrin.h>
#endif

namespace hpq::kernels {

#if defined(HPQ_HAVE_AVX2)
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// One __m256d holds two interleaved complex doubles [re0, im0, re1, im1].
inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

void hadamard_avx2(cplx* amps, std::size_t dim, std::size_t stride) {
  const __m256d s = _mm256_set1_pd(kInvSqrt2);
  if (stride == 1) {
    // Both partners share a register: swap the 128-bit halves.
    for (std::size_t x = 0; x < dim; x += 2) {
      const __m256d v = load2(amps + x);
      const __m256d sw = _mm256_permute2f128_pd(v, v, 0x01);
      const __m256d sum = _mm256_add_pd(v, sw);
      const __m256d dif = _mm256_sub_pd(sw, v);
      store2(amps + x, _mm256_mul_pd(_mm256_blend_pd(sum, dif, 0b1100), s));
    }
    return;
  }
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t x = base; x < base + stride; x += 2) {
      const __m256d a = load2(amps + x);
      const __m256d b = load2(amps + x + stride);
      store2(amps + x, _mm256_mul_pd(_mm256_add_pd(a, b), s));
      store2(amps + x + stride, _mm256_mul_pd(_mm256_sub_pd(a, b), s));
    }
  }
}

void multiply_diagonal_avx2(cplx* amps, const cplx* diag, std::size_t dim) {
  std::size_t x = 0;
  for (; x + 2 <= dim; x += 2) {
    const __m256d v = load2(amps + x);
    const __m256d d = load2(diag + x);
    const __m256d dr = _mm256_movedup_pd(d);
    const __m256d di = _mm256_permute_pd(d, 0xF);
    const __m256d vs = _mm256_permute_pd(v, 0x5);
    store2(amps + x, _mm256_addsub_pd(_mm256_mul_pd(v, dr), _mm256_mul_pd(vs, di)));
  }
  for (; x < dim; ++x) {
    const double ar = amps[x].real(), ai = amps[x].imag();
    const double dr = diag[x].real(), di = diag[x].imag();
    amps[x] = cplx(ar * dr - ai * di, ar * di + ai * dr);
  }
}

void norm_sqr_avx2(const cplx* amps, double* out, std::size_t dim) {
  std::size_t x = 0;
  for (; x + 4 <= dim; x += 4) {
    const __m256d a = load2(amps + x);
    const __m256d b = load2(amps + x + 2);
    const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
    _mm256_storeu_pd(out + x, _mm256_permute4x64_pd(h, 0b11011000));
  }
  for (; x < dim; ++x) {
    const double re = amps[x].real(), im = amps[x].imag();
    out[x] = re * re + im * im;
  }
}

void affine_avx2(double* probs, std::size_t dim, double keep, double add) {
  const __m256d k = _mm256_set1_pd(keep);
  const __m256d a = _mm256_set1_pd(add);
  std::size_t x = 0;
  for (; x + 4 <= dim; x += 4) {
    _mm256_storeu_pd(probs + x, _mm256_add_pd(_mm256_mul_pd(k, _mm256_loadu_pd(probs + x)), a));
  }
  for (; x < dim; ++x) probs[x] = keep * probs[x] + add;
}

constexpr KernelTable kAvx2{"avx2", hadamard_avx2, multiply_diagonal_avx2, norm_sqr_avx2,
                            affine_avx2};

}  // namespace

const KernelTable* avx2_table() {
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &kAvx2 : nullptr;
}

#else

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace hpq::kernels
