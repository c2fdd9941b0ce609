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

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "hpq/kernels.hpp"

namespace hpq::kernels {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void hadamard_scalar(cplx* amps, std::size_t dim, std::size_t stride) {
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t x = base; x < base + stride; ++x) {
      const double ar = amps[x].real(), ai = amps[x].imag();
      const double br = amps[x + stride].real(), bi = amps[x + stride].imag();
      amps[x] = cplx((ar + br) * kInvSqrt2, (ai + bi) * kInvSqrt2);
      amps[x + stride] = cplx((ar - br) * kInvSqrt2, (ai - bi) * kInvSqrt2);
    }
  }
}

void multiply_diagonal_scalar(cplx* amps, const cplx* diag, std::size_t dim) {
  for (std::size_t x = 0; x < dim; ++x) {
    const double ar = amps[x].real(), ai = amps[x].imag();
    const double dr = diag[x].real(), di = diag[x].imag();
    amps[x] = cplx(ar * dr - ai * di, ar * di + ai * dr);
  }
}

void norm_sqr_scalar(const cplx* amps, double* out, std::size_t dim) {
  for (std::size_t x = 0; x < dim; ++x) {
    const double re = amps[x].real(), im = amps[x].imag();
    out[x] = re * re + im * im;
  }
}

void affine_scalar(double* probs, std::size_t dim, double keep, double add) {
  for (std::size_t x = 0; x < dim; ++x) probs[x] = keep * probs[x] + add;
}

constexpr KernelTable kScalar{"scalar", hadamard_scalar, multiply_diagonal_scalar,
                              norm_sqr_scalar, affine_scalar};

const KernelTable& initial_choice() {
  const char* env = std::getenv("HPQ_KERNELS");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return kScalar;
  if (const KernelTable* t = avx2_table()) return *t;
  return kScalar;
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> table{&initial_choice()};
  return table;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void set_active(const KernelTable& table) { slot().store(&table, std::memory_order_release); }

}  // namespace hpq::kernels
