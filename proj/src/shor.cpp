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

#include "hpq/shor.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "hpq/circuit.hpp"
#include "hpq/distribution.hpp"
#include "hpq/error.hpp"
#include "hpq/fisher.hpp"
#include "hpq/rng.hpp"

namespace hpq {

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

bool is_prime_power(std::uint64_t n) {
  if (n < 2) return false;
  std::uint64_t p = 2;
  while (p * p <= n && n % p != 0) ++p;
  if (n % p != 0) return true;  // n itself is prime
  while (n % p == 0) n /= p;
  return n == 1;
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
  if (mod >= (std::uint64_t{1} << 32)) throw ParameterError("modulus must be below 2^32");
  if (mod == 1) return 0;
  std::uint64_t result = 1, b = base % mod;
  while (exp > 0) {
    if (exp & 1u) result = result * b % mod;
    b = b * b % mod;
    exp >>= 1;
  }
  return result;
}

std::uint64_t carmichael(std::uint64_t n) {
  if (n < 1) throw ParameterError("carmichael needs n >= 1");
  std::uint64_t lambda = 1;
  for (std::uint64_t p = 2; n > 1; ++p) {
    if (p * p > n) p = n;
    if (n % p != 0) continue;
    std::uint64_t pk = 1;
    int k = 0;
    while (n % p == 0) {
      n /= p;
      pk *= p;
      ++k;
    }
    std::uint64_t l = pk / p * (p - 1);
    if (p == 2 && k >= 3) l /= 2;
    lambda = std::lcm(lambda, l);
  }
  return lambda;
}

std::uint64_t order_oracle(std::uint64_t a, std::uint64_t N) {
  if (N < 3 || N >= (std::uint64_t{1} << 32)) throw ParameterError("order_oracle needs 3 <= N < 2^32");
  const std::uint64_t g = std::gcd(a, N);
  if (g != 1) {
    throw ParameterError("gcd(" + std::to_string(a) + ", " + std::to_string(N) + ") = " + std::to_string(g) +
                         " is a factor of N");
  }
  std::uint64_t x = a % N;
  for (std::uint64_t r = 1; r <= N; ++r) {
    if (x == 1) return r;
    x = x * (a % N) % N;
  }
  throw NumericError("no order found");  // unreachable for coprime a
}

namespace {

bool usable_period(std::uint64_t N, std::uint64_t a, std::uint64_t r) {
  return r % 2 == 0 && pow_mod(a, r, N) == 1 && pow_mod(a, r / 2, N) != N - 1;
}

}  // namespace

ShorInstance choose_base(std::uint64_t N, int n, std::uint64_t seed) {
  if (N < 15 || N % 2 == 0 || is_prime(N) || is_prime_power(N)) {
    throw ParameterError("N=" + std::to_string(N) + " must be an odd composite that is not a prime power");
  }
  const std::uint64_t window = period_window(n);
  std::vector<std::uint64_t> bases;
  for (std::uint64_t a = 2; a + 1 < N; ++a) bases.push_back(a);
  Rng rng(seed);
  for (std::size_t k = bases.size(); k > 1; --k) std::swap(bases[k - 1], bases[rng.below(k)]);
  for (auto a : bases) {
    if (std::gcd(a, N) != 1) continue;
    const std::uint64_t r = order_oracle(a, N);
    if (r <= window && usable_period(N, a, r)) return {N, a, r, n};
  }
  throw ParameterError("no base for N=" + std::to_string(N) + " has a usable order <= 2^{n/2} at n=" +
                       std::to_string(n) + "; increase n");
}

std::vector<std::uint64_t> refine_candidates(std::uint64_t r_hat) {
  constexpr std::size_t kCap = 24;
  std::vector<std::uint64_t> out;
  if (r_hat == 0) return out;
  auto add = [&](std::uint64_t c) {
    if (out.size() < kCap && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  };
  add(r_hat);
  add(2 * r_hat);
  add(3 * r_hat);
  for (std::uint64_t d = r_hat / 2; d >= 1; --d) {
    if (r_hat % d == 0) add(d);
  }
  return out;
}

std::optional<std::pair<std::uint64_t, std::uint64_t>> factor_from_period(std::uint64_t N, std::uint64_t a,
                                                                          std::uint64_t r_hat) {
  if (r_hat < 1) throw ParameterError("period guess must be >= 1");
  for (auto r : refine_candidates(r_hat)) {
    if (!usable_period(N, a, r)) continue;
    const std::uint64_t x = pow_mod(a, r / 2, N);
    const std::uint64_t p = std::gcd(x + N - 1, N), q = std::gcd(x + 1, N);
    if (p > 1 && p < N && q > 1 && q < N) return std::make_pair(std::min(p, q), std::max(p, q));
  }
  return std::nullopt;
}

PeriodGuesser model_guesser(const DecoderModel& model, int beam_width) {
  return [&model, beam_width](const Counts& counts, int k_max) {
    BeamResult br = beam_decode(model, counts, std::max(beam_width, k_max));
    if (static_cast<int>(br.candidates.size()) > k_max) br.candidates.resize(static_cast<std::size_t>(k_max));
    return br.candidates;
  };
}

FactoringOutcome run_instance(const ShorInstance& inst, const PeriodGuesser& guesser, std::uint64_t sample_budget,
                              int k_max, std::uint64_t seed) {
  return run_instance(inst, Transform::hp(build_fixed_hp1(inst.n)), guesser, sample_budget, k_max, seed);
}

FactoringOutcome run_instance(const ShorInstance& inst, const Transform& circuit, const PeriodGuesser& guesser,
                              std::uint64_t sample_budget, int k_max, std::uint64_t seed) {
  if (circuit.n() != inst.n) throw ParameterError("sampling circuit width does not match the instance");
  if (k_max < 1) throw ParameterError("k_max must be >= 1");
  FactoringOutcome out;
  out.instance = inst;
  out.seed = seed;
  Rng rng(seed);
  out.shift = rng.below(inst.r_true);
  const std::uint64_t m = sample_budget > 0 ? sample_budget : 1024ULL * static_cast<std::uint64_t>(inst.n * inst.n);
  const OutcomeDistribution d =
      periodic_distribution(circuit, periodic_support(inst.n, inst.r_true, out.shift));
  Rng draw = rng.split(1);
  const Counts counts = draw_histogram(d, m, draw);
  out.candidates = guesser(counts, k_max);
  for (std::size_t k = 0; k < out.candidates.size() && static_cast<int>(k) < k_max; ++k) {
    if (auto f = factor_from_period(inst.N, inst.a, out.candidates[k])) {
      out.success = true;
      out.k_used = static_cast<int>(k) + 1;
      out.p = f->first;
      out.q = f->second;
      if (out.p * out.q != inst.N) throw NumericError("factor check failed for N=" + std::to_string(inst.N));
      break;
    }
  }
  return out;
}

std::vector<std::uint64_t> shor_targets(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t N = std::max<std::uint64_t>(lo, 3); N <= hi; ++N) {
    if (N % 2 == 1 && !is_prime(N) && !is_prime_power(N)) out.push_back(N);
  }
  return out;
}

void write_shor_csv(std::span<const FactoringOutcome> outcomes, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "N,a,r_true,n,success,k_used,p,q,seed\n";
  for (const auto& o : outcomes) {
    out << o.instance.N << ',' << o.instance.a << ',' << o.instance.r_true << ',' << o.instance.n << ','
        << (o.success ? 1 : 0) << ',';
    if (o.success) out << o.k_used << ',' << o.p << ',' << o.q;
    else out << ",,";
    out << ',' << o.seed << '\n';
  }
}

}  // namespace hpq
