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

// Exact outcome distributions for coset and periodic inputs, global
// depolarizing noise, seeded sampling, and HP-0 subgroup recovery.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hpq/circuit.hpp"
#include "hpq/group.hpp"
#include "hpq/rng.hpp"

namespace hpq {

struct OutcomeDistribution {
  int n = 0;
  std::vector<double> probabilities;

  std::size_t dim() const { return probabilities.size(); }
  double operator[](std::size_t x) const { return probabilities[x]; }
  double total() const;
};

struct SampleBatch {
  int n = 0;
  std::vector<std::uint64_t> outcomes;
  std::uint64_t seed = 0;
};

/// Pr(x) = |sum_{v in V} <x|U|c+v>|^2 / |V| by evolving the coset state.
OutcomeDistribution coset_distribution(const Transform& u, const CosetSpec& coset);

/// Pr(x) = |sum_{y in sup} <x|U|y>|^2 / R by evolving the support state.
OutcomeDistribution periodic_distribution(const Transform& u, const PeriodicSupport& sup);

/// Reference paths that sum closed-form matrix elements directly:
/// the effective-phase amplitude for HP circuits and e^{2 pi i xy/2^n}
/// for the QFT. Cost O(2^n |support|).
OutcomeDistribution support_distribution_oracle(const Transform& u,
                                                std::span<const std::uint64_t> support);

/// Transversal-Hadamard image of a coset: the leading n-p bits are 0 and
/// the trailing p bits are uniform.
OutcomeDistribution hp0_distribution(const CosetSpec& coset);

/// (1 - eta) Pr(x) + eta / 2^n.
OutcomeDistribution depolarize(const OutcomeDistribution& d, double eta);

/// m i.i.d. outcomes by inverse-CDF lookup.
SampleBatch draw_samples(const OutcomeDistribution& d, std::size_t m, std::uint64_t seed);

/// Outcome counts of m i.i.d. draws, generated as a chain of conditional
/// binomials. Same law as histogramming draw_samples, in O(2^n) time.
std::vector<std::uint32_t> draw_histogram(const OutcomeDistribution& d, std::size_t m, Rng& rng);

std::vector<std::uint32_t> histogram(const SampleBatch& batch);

/// Algorithm 1: j* is the leftmost qubit that reads 1 in any sample and
/// p = n - j* + 1, or p = 0 when every sample is all zeros.
SubgroupSpec hp0_decode(const SampleBatch& batch);

/// ceil(log2(1/eps)) samples bound the HP-0 failure probability by eps.
int hp0_sample_bound(double eps);

/// CSV with header "outcome,probability"; outcomes are n-bit strings.
void write_distribution_csv(const OutcomeDistribution& d, const std::filesystem::path& path);

/// One n-bit string per line after a "# n=<n> m=<m> seed=<seed>" header.
void write_samples(const SampleBatch& batch, const std::filesystem::path& path);
SampleBatch read_samples(const std::filesystem::path& path);

}  // namespace hpq
