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

#include "hpq/group.hpp"

#include <string>

#include "hpq/error.hpp"

namespace hpq {

void check_width(int n) {
  if (n < 1 || n > kMaxQubits) {
    throw ParameterError("register width n=" + std::to_string(n) + " outside [1, " +
                         std::to_string(kMaxQubits) + "]");
  }
}

BitString::BitString(int n, std::uint64_t value) : n_(n), value_(value) {
  check_width(n);
  if (value >> n) {
    throw ParameterError("value " + std::to_string(value) + " does not fit in " +
                         std::to_string(n) + " bits");
  }
}

BitString BitString::from_bits(std::span<const std::uint8_t> bits) {
  const int n = static_cast<int>(bits.size());
  check_width(n);
  std::uint64_t v = 0;
  for (std::uint8_t b : bits) {
    if (b > 1) throw ParameterError("bit values must be 0 or 1");
    v = (v << 1) | b;
  }
  return BitString(n, v);
}

BitString BitString::parse(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw ParameterError("not a binary string: " + std::string(text));
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return from_bits(bits);
}

int BitString::bit(int qubit) const {
  if (qubit < 1 || qubit > n_) throw ParameterError("qubit index out of range");
  return qubit_bit(value_, n_, qubit);
}

std::vector<std::uint8_t> BitString::bits() const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(n_));
  for (int q = 1; q <= n_; ++q) out[q - 1] = static_cast<std::uint8_t>(qubit_bit(value_, n_, q));
  return out;
}

std::string BitString::to_string() const {
  std::string s(static_cast<std::size_t>(n_), '0');
  for (int q = 1; q <= n_; ++q) {
    if (qubit_bit(value_, n_, q)) s[q - 1] = '1';
  }
  return s;
}

namespace {

void check_subgroup(const SubgroupSpec& spec) {
  check_width(spec.n);
  if (spec.p < 0 || spec.p > spec.n) {
    throw ParameterError("subgroup exponent p=" + std::to_string(spec.p) + " outside [0, " +
                         std::to_string(spec.n) + "]");
  }
}

}  // namespace

std::vector<std::uint64_t> subgroup_elements(const SubgroupSpec& spec) {
  check_subgroup(spec);
  std::vector<std::uint64_t> out;
  out.reserve(spec.order());
  for (std::uint64_t q = 0; q < spec.order(); ++q) out.push_back(q << spec.p);
  return out;
}

std::vector<std::uint64_t> coset_elements(const CosetSpec& spec) {
  check_subgroup(spec.subgroup);
  if (spec.representative >= spec.subgroup.generator()) {
    throw ParameterError("coset representative must be < 2^p");
  }
  std::vector<std::uint64_t> out = subgroup_elements(spec.subgroup);
  for (auto& v : out) v += spec.representative;
  return out;
}

std::uint64_t periodic_count(int n, std::uint64_t period, std::uint64_t shift) {
  check_width(n);
  if (period < 1) throw ParameterError("period must be >= 1");
  if (shift >= period) throw ParameterError("shift must satisfy 0 <= s < r");
  const std::uint64_t dim = std::uint64_t{1} << n;
  if (shift >= dim) throw ParameterError("shift lies outside the register");
  return (dim - shift + period - 1) / period;
}

PeriodicSupport periodic_support(int n, std::uint64_t period, std::uint64_t shift) {
  const std::uint64_t count = periodic_count(n, period, shift);
  PeriodicSupport sup{n, period, shift, {}};
  sup.elements.reserve(count);
  for (std::uint64_t q = 0; q < count; ++q) sup.elements.push_back(shift + q * period);
  return sup;
}

}  // namespace hpq
