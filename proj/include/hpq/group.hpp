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

// Integer and bitstring arithmetic over Z_{2^n}.
//
// Bit convention used everywhere in hpq: qubit 1 is the most significant
// bit, so y = sum_{i=1..n} y_i 2^{n-i} and the trailing qubits hold the
// least significant bits.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hpq {

inline constexpr int kMaxQubits = 24;

/// Checks 1 <= n <= kMaxQubits; throws ParameterError otherwise.
void check_width(int n);

/// Bit of `value` that belongs to 1-based `qubit` in an n-qubit register.
constexpr int qubit_bit(std::uint64_t value, int n, int qubit) {
  return static_cast<int>((value >> (n - qubit)) & 1u);
}

/// Mask selecting 1-based `qubit` in an n-qubit register index.
constexpr std::uint64_t qubit_mask(int n, int qubit) {
  return std::uint64_t{1} << (n - qubit);
}

class BitString {
 public:
  BitString(int n, std::uint64_t value);

  /// bits[0] is qubit 1 (the most significant bit).
  static BitString from_bits(std::span<const std::uint8_t> bits);
  static BitString parse(std::string_view text);

  int width() const { return n_; }
  std::uint64_t value() const { return value_; }
  int bit(int qubit) const;
  std::vector<std::uint8_t> bits() const;
  std::string to_string() const;

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  int n_;
  std::uint64_t value_;
};

/// Subgroup V = <2^p> of Z_{2^n}.
struct SubgroupSpec {
  int n = 1;
  int p = 0;

  std::uint64_t order() const { return std::uint64_t{1} << (n - p); }
  std::uint64_t generator() const { return std::uint64_t{1} << p; }
};

/// Coset c + V with representative 0 <= c < 2^p.
struct CosetSpec {
  SubgroupSpec subgroup;
  std::uint64_t representative = 0;
};

/// Truncated arithmetic progression {s + q r : s + q r < 2^n}.
struct PeriodicSupport {
  int n = 1;
  std::uint64_t period = 1;
  std::uint64_t shift = 0;
  std::vector<std::uint64_t> elements;

  std::size_t count() const { return elements.size(); }
};

std::vector<std::uint64_t> subgroup_elements(const SubgroupSpec& spec);
std::vector<std::uint64_t> coset_elements(const CosetSpec& spec);
PeriodicSupport periodic_support(int n, std::uint64_t period, std::uint64_t shift);

/// Number of elements of the truncated progression without enumerating it.
std::uint64_t periodic_count(int n, std::uint64_t period, std::uint64_t shift);

}  // namespace hpq
