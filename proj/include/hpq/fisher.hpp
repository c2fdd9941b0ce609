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

// Discrete Fisher information between neighbouring periods, the
// Hammersley-Chapman-Robbins sample bound, and the QFT reference values.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hpq/circuit.hpp"
#include "hpq/distribution.hpp"

namespace hpq {

/// Probabilities at or below this are treated as exact zeros by dfi(). Exact
/// zeros of a circuit distribution come out of the simulator as round-off
/// of order 1e-30, far below any genuine probability at n <= 24.
inline constexpr double kZeroProbability = 1e-14;

/// A DFI value or the +infinity sentinel. The sentinel is never encoded as
/// a floating-point infinity.
struct DfiValue {
  double value = 0.0;
  bool infinite = false;
  /// Outcomes with p_r(x) = 0 < p_{r+1}(x), when infinite.
  std::vector<std::uint64_t> offending;

  bool finite() const { return !infinite; }
};

/// sum_x (p_r1(x) - p_r(x))^2 / p_r(x) with pairwise summation, so the
/// result does not depend on evaluation order elsewhere.
DfiValue dfi(const OutcomeDistribution& p_r, const OutcomeDistribution& p_r1);

/// ln(1 + eps^-2) / ln(1 + dfi).
double hcr_bound(double dfi_value, double eps);

/// Closed-form QFT DFI for a support of R elements spaced r apart.
double qft_dfi_exact(double r, int R);

/// (4 pi^2 / 9)(2^{2n} / r^2 - 1), valid for 1 << r << 2^n.
double qft_dfi_asymptotic(double r, int n);

/// Integral over (0, pi) of f (d_r ln f)^2 with
/// f = (1 / pi R)(sin(R r x) / sin(r x))^2, by adaptive Gauss-Kronrod on
/// pieces between the zeros of sin(R r x).
double qft_dfi_quadrature(double r, int R);

/// floor(2^{n/2}).
std::uint64_t period_window(int n);

struct DfiEntry {
  std::uint64_t r = 0;
  DfiValue value;
};

struct DfiScanResult {
  int n = 0;
  std::string circuit;
  std::vector<DfiEntry> entries;  // r = 1..period_window(n)
  /// Minimum over finite entries; empty when every entry is infinite.
  std::optional<double> dfi_min;
  std::uint64_t argmin = 0;
  int excluded = 0;
};

/// DFI between zero-shift periodic distributions at r and r + 1 for every r
/// in the window. Parallel over r; the result is schedule-independent.
DfiScanResult dfi_min_scan(const Transform& u, const std::string& circuit_name = "");

/// Rows "n,r,dfi"; the sentinel is written as "inf".
void write_scan_csv(std::span<const DfiScanResult> scans, const std::filesystem::path& path);

}  // namespace hpq
