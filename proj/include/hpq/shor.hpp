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

// Shor-style factoring with HP-1 sampling and the neural period decoder.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hpq/circuit.hpp"
#include "hpq/decoder.hpp"

namespace hpq {

bool is_prime(std::uint64_t n);
bool is_prime_power(std::uint64_t n);
/// Carmichael function lambda(n) by factorization.
std::uint64_t carmichael(std::uint64_t n);
/// Needs mod < 2^32 so products fit in 64 bits.
std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod);

/// Least r >= 1 with a^r = 1 (mod N), by repeated multiplication. Throws
/// ParameterError when gcd(a, N) != 1; the message names the shared factor.
std::uint64_t order_oracle(std::uint64_t a, std::uint64_t N);

struct ShorInstance {
  std::uint64_t N = 0;
  std::uint64_t a = 0;
  std::uint64_t r_true = 0;
  int n = 0;
};

/// Scans coprime bases in a seed-determined order and returns the first
/// whose order r satisfies r <= 2^{n/2}, r even and a^{r/2} != -1 (mod N).
/// Throws ParameterError for even, prime or prime-power N, or when no base
/// qualifies ("increase n").
ShorInstance choose_base(std::uint64_t N, int n, std::uint64_t seed);

/// The order candidates derived from one decoded guess: r, 2r, 3r, then the
/// proper divisors of r from largest down, at most 24 in total.
std::vector<std::uint64_t> refine_candidates(std::uint64_t r_hat);

/// Classical post-processing of one guess and its refinements: returns
/// (p, q) with p <= q, 1 < p and p q = N from the first candidate r' that
/// is even, satisfies a^{r'} = 1 and a^{r'/2} != -1, and gives two
/// nontrivial gcds.
std::optional<std::pair<std::uint64_t, std::uint64_t>> factor_from_period(std::uint64_t N, std::uint64_t a,
                                                                          std::uint64_t r_hat);

struct FactoringOutcome {
  ShorInstance instance;
  std::uint64_t shift = 0;
  bool success = false;
  int k_used = 0;  // 1-based rank of the first guess that factored N; 0 if none
  std::uint64_t p = 0, q = 0;
  std::vector<std::uint64_t> candidates;  // decoded guesses, best first
  std::uint64_t seed = 0;
};

/// Anything that turns an outcome histogram into ranked period guesses.
using PeriodGuesser = std::function<std::vector<std::uint64_t>(const Counts&, int k_max)>;

PeriodGuesser model_guesser(const DecoderModel& model, int beam_width = 8);

/// Samples the fixed HP-1 circuit on the truncated periodic input with a
/// seeded shift s in [0, r_true), decodes k_max guesses and tries them in
/// rank order. sample_budget = 0 means 1024 n^2.
FactoringOutcome run_instance(const ShorInstance& inst, const PeriodGuesser& guesser, std::uint64_t sample_budget,
                              int k_max, std::uint64_t seed);

/// As above with an explicit sampling circuit of width inst.n.
FactoringOutcome run_instance(const ShorInstance& inst, const Transform& circuit, const PeriodGuesser& guesser,
                              std::uint64_t sample_budget, int k_max, std::uint64_t seed);

/// Odd composites in [lo, hi] that are not prime powers.
std::vector<std::uint64_t> shor_targets(std::uint64_t lo, std::uint64_t hi);

/// CSV "N,a,r_true,n,success,k_used,p,q,seed".
void write_shor_csv(std::span<const FactoringOutcome> outcomes, const std::filesystem::path& path);

}  // namespace hpq
