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

#include "hpq/distribution.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/random/binomial_distribution.hpp>

#include "hpq/error.hpp"
#include "hpq/kernels.hpp"

namespace hpq {
namespace {

OutcomeDistribution evolve(const Transform& u, int n, std::span<const std::uint64_t> support) {
  if (u.n() != n) throw ParameterError("transform width does not match input width");
  StateVector psi = StateVector::uniform_over(n, support);
  u.apply(psi);
  return {n, psi.probabilities()};
}

}  // namespace

double OutcomeDistribution::total() const {
  return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

OutcomeDistribution coset_distribution(const Transform& u, const CosetSpec& coset) {
  return evolve(u, coset.subgroup.n, coset_elements(coset));
}

OutcomeDistribution periodic_distribution(const Transform& u, const PeriodicSupport& sup) {
  return evolve(u, sup.n, sup.elements);
}

OutcomeDistribution support_distribution_oracle(const Transform& u,
                                                std::span<const std::uint64_t> support) {
  const int n = u.n();
  const std::uint64_t dim = std::uint64_t{1} << n;
  if (support.empty()) throw ParameterError("empty support");
  for (auto y : support) {
    if (y >= dim) throw ParameterError("support element out of range");
  }
  const double norm = 1.0 / static_cast<double>(support.size());
  OutcomeDistribution d{n, std::vector<double>(dim)};
  if (u.is_qft()) {
    const double scale = std::pow(2.0, -0.5 * n);
    for (std::uint64_t x = 0; x < dim; ++x) {
      cplx sum = 0.0;
      for (auto y : support) {
        // Reduce xy mod 2^n before forming the angle to keep it exact.
        const double frac = static_cast<double>((x * y) & (dim - 1)) / static_cast<double>(dim);
        sum += std::polar(scale, 2.0 * std::numbers::pi * frac);
      }
      d.probabilities[x] = std::norm(sum) * norm;
    }
    return d;
  }
  const EffectivePhaseMatrix theta(u.skeleton());
  for (std::uint64_t x = 0; x < dim; ++x) {
    cplx sum = 0.0;
    for (auto y : support) sum += amplitude(theta, y, x);
    d.probabilities[x] = std::norm(sum) * norm;
  }
  return d;
}

OutcomeDistribution hp0_distribution(const CosetSpec& coset) {
  const auto& v = coset.subgroup;
  check_width(v.n);
  if (v.p < 0 || v.p > v.n) throw ParameterError("subgroup exponent p out of range");
  if (coset.representative >= v.generator()) throw ParameterError("coset representative must be < 2^p");
  const std::uint64_t dim = std::uint64_t{1} << v.n;
  const std::uint64_t free_count = v.generator();  // 2^p outcomes 0...0k
  OutcomeDistribution d{v.n, std::vector<double>(dim, 0.0)};
  const double w = 1.0 / static_cast<double>(free_count);
  for (std::uint64_t k = 0; k < free_count; ++k) d.probabilities[k] = w;
  return d;
}

OutcomeDistribution depolarize(const OutcomeDistribution& d, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("depolarizing strength must lie in [0, 1]");
  OutcomeDistribution out = d;
  if (eta == 1.0) {
    // Exactly uniform, with no rounding residue from the old values.
    std::fill(out.probabilities.begin(), out.probabilities.end(), 1.0 / static_cast<double>(d.dim()));
    return out;
  }
  kernels::active().affine(out.probabilities.data(), out.dim(), 1.0 - eta,
                           eta / static_cast<double>(d.dim()));
  return out;
}

SampleBatch draw_samples(const OutcomeDistribution& d, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw ParameterError("sample count must be positive");
  std::vector<double> cdf(d.dim());
  std::partial_sum(d.probabilities.begin(), d.probabilities.end(), cdf.begin());
  const double total = cdf.back();
  Rng rng(seed);
  SampleBatch batch{d.n, {}, seed};
  batch.outcomes.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    // Never land on a trailing zero-probability outcome.
    while (it != cdf.begin() && (it == cdf.end() || d.probabilities[it - cdf.begin()] == 0.0)) --it;
    batch.outcomes.push_back(static_cast<std::uint64_t>(it - cdf.begin()));
  }
  return batch;
}

std::vector<std::uint32_t> draw_histogram(const OutcomeDistribution& d, std::size_t m, Rng& rng) {
  if (m == 0) throw ParameterError("sample count must be positive");
  std::vector<std::uint32_t> counts(d.dim(), 0);
  double mass = d.total();
  std::size_t left = m;
  for (std::size_t x = 0; x < d.dim() && left > 0; ++x) {
    const double p = d.probabilities[x];
    if (p <= 0.0) continue;
    const double q = std::min(1.0, p / mass);
    std::size_t k = left;
    if (q < 1.0) {
      boost::random::binomial_distribution<long long, double> bin(static_cast<long long>(left), q);
      k = static_cast<std::size_t>(bin(rng));
    }
    counts[x] = static_cast<std::uint32_t>(k);
    left -= k;
    mass -= p;
  }
  if (left > 0) {
    // Rounding left mass unassigned; give it to the last supported outcome.
    for (std::size_t x = d.dim(); x-- > 0;) {
      if (d.probabilities[x] > 0.0) {
        counts[x] += static_cast<std::uint32_t>(left);
        break;
      }
    }
  }
  return counts;
}

std::vector<std::uint32_t> histogram(const SampleBatch& batch) {
  std::vector<std::uint32_t> counts(std::size_t{1} << batch.n, 0);
  for (auto x : batch.outcomes) ++counts.at(x);
  return counts;
}

SubgroupSpec hp0_decode(const SampleBatch& batch) {
  if (batch.outcomes.empty()) throw ParameterError("empty sample batch");
  std::uint64_t seen = 0;
  for (auto x : batch.outcomes) seen |= x;
  if (seen == 0) return {batch.n, 0};
  // Leftmost 1 over all samples sits at qubit j* = n - floor(log2 seen).
  const int top = 63 - __builtin_clzll(seen);
  const int j_star = batch.n - top;
  return {batch.n, batch.n - j_star + 1};
}

int hp0_sample_bound(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("epsilon must lie in (0, 1)");
  return static_cast<int>(std::ceil(std::log2(1.0 / eps)));
}

void write_distribution_csv(const OutcomeDistribution& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "outcome,probability\n";
  char buf[32];
  for (std::size_t x = 0; x < d.dim(); ++x) {
    std::snprintf(buf, sizeof buf, "%.17g", d.probabilities[x]);
    out << BitString(d.n, x).to_string() << ',' << buf << '\n';
  }
}

void write_samples(const SampleBatch& batch, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# n=" << batch.n << " m=" << batch.outcomes.size() << " seed=" << batch.seed << '\n';
  for (auto x : batch.outcomes) out << BitString(batch.n, x).to_string() << '\n';
}

SampleBatch read_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  SampleBatch batch;
  std::size_t m = 0;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "# n=%d m=%zu seed=%" SCNu64, &batch.n, &m, &batch.seed) != 3) {
    throw IoError("sample file lacks the '# n=<n> m=<m> seed=<seed>' header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const BitString b = BitString::parse(line);
      if (b.width() != batch.n) throw IoError("sample width does not match header");
      batch.outcomes.push_back(b.value());
    } catch (const ParameterError& e) {
      throw IoError(std::string("bad sample line: ") + e.what());
    }
  }
  if (batch.outcomes.size() != m) throw IoError("sample count does not match header");
  return batch;
}

}  // namespace hpq
