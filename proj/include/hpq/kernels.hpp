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

// Inner loops of the state-vector engine. Each kernel has a portable scalar
// reference and, on x86-64, an AVX2 variant chosen once at runtime. The
// variants are tested for equivalence against the scalar reference.

#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

namespace hpq::kernels {

using cplx = std::complex<double>;

struct KernelTable {
  std::string_view name;
  /// Hadamard butterfly on every pair (x, x | stride) with x & stride == 0.
  /// `stride` is a power of two below `dim`.
  void (*hadamard)(cplx* amps, std::size_t dim, std::size_t stride);
  /// amps[x] *= diag[x].
  void (*multiply_diagonal)(cplx* amps, const cplx* diag, std::size_t dim);
  /// out[x] = |amps[x]|^2.
  void (*norm_sqr)(const cplx* amps, double* out, std::size_t dim);
  /// probs[x] = keep * probs[x] + add.
  void (*affine)(double* probs, std::size_t dim, double keep, double add);
};

const KernelTable& scalar_table();

/// AVX2 table, or nullptr when not compiled in or unsupported by the CPU.
const KernelTable* avx2_table();

/// Table used by the library. Picks AVX2 when available unless the
/// environment variable HPQ_KERNELS is set to "scalar".
const KernelTable& active();

/// Overrides the dispatch choice (tests and benchmarks).
void set_active(const KernelTable& table);

}  // namespace hpq::kernels
