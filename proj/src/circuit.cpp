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

#include "hpq/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include "hpq/error.hpp"
#include "hpq/group.hpp"
#include "hpq/kernels.hpp"
#include "hpq/rng.hpp"

namespace hpq {

std::vector<int> Skeleton::layer_of() const {
  std::vector<int> out(static_cast<std::size_t>(std::max(n, 0)) + 1, 0);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (int q : layers[l]) {
      if (q >= 1 && q <= n) out[q] = static_cast<int>(l) + 1;
    }
  }
  return out;
}

bool ValidationReport::violates(Rule rule) const {
  return std::any_of(violations.begin(), violations.end(),
                     [rule](const Violation& v) { return v.rule == rule; });
}

std::string ValidationReport::to_string() const {
  if (valid()) return "valid";
  std::ostringstream os;
  for (const auto& v : violations) {
    os << "rule ";
    switch (v.rule) {
      case Rule::kRange: os << "(range)"; break;
      case Rule::kPartition: os << "(i)"; break;
      case Rule::kPairOnce: os << "(ii)"; break;
      case Rule::kOrdering: os << "(iii)"; break;
    }
    os << ": " << v.message;
    if (!v.qubits.empty()) {
      os << " [qubits";
      for (int q : v.qubits) os << ' ' << q;
      os << ']';
    }
    os << '\n';
  }
  return os.str();
}

ValidationReport validate_skeleton(const Skeleton& sk) {
  ValidationReport report;
  auto add = [&](Rule rule, std::vector<int> qubits, std::string msg) {
    report.violations.push_back({rule, std::move(qubits), std::move(msg)});
  };
  if (sk.n < 1 || sk.n > kMaxQubits) {
    add(Rule::kRange, {}, "qubit count n=" + std::to_string(sk.n) + " outside [1, 24]");
    return report;
  }

  // Rule (i): the layers partition {1..n}.
  std::vector<int> seen(static_cast<std::size_t>(sk.n) + 1, 0);
  for (std::size_t l = 0; l < sk.layers.size(); ++l) {
    if (sk.layers[l].empty()) {
      add(Rule::kPartition, {}, "layer " + std::to_string(l + 1) + " is empty");
    }
    for (int q : sk.layers[l]) {
      if (q < 1 || q > sk.n) {
        add(Rule::kRange, {q}, "qubit index outside [1, n] in layer " + std::to_string(l + 1));
        continue;
      }
      ++seen[q];
    }
  }
  std::vector<int> missing, repeated;
  for (int q = 1; q <= sk.n; ++q) {
    if (seen[q] == 0) missing.push_back(q);
    if (seen[q] > 1) repeated.push_back(q);
  }
  if (!missing.empty()) add(Rule::kPartition, missing, "qubits receive no Hadamard");
  if (!repeated.empty()) add(Rule::kPartition, repeated, "qubits receive more than one Hadamard");

  // Rules (ii) and (iii).
  const std::vector<int> layer = sk.layer_of();
  std::set<std::pair<int, int>> pairs;
  for (const PhaseGate& g : sk.phases) {
    if (g.i < 1 || g.i > sk.n || g.j < 1 || g.j > sk.n) {
      add(Rule::kRange, {g.i, g.j}, "phase gate index outside [1, n]");
      continue;
    }
    if (!std::isfinite(g.theta)) {
      add(Rule::kRange, {g.i, g.j}, "phase angle is not finite");
    }
    if (g.i == g.j) {
      add(Rule::kOrdering, {g.i}, "phase gate couples a qubit with itself");
      continue;
    }
    if (!pairs.emplace(std::min(g.i, g.j), std::max(g.i, g.j)).second) {
      add(Rule::kPairOnce, {g.i, g.j}, "pair carries more than one phase gate");
    }
    if (layer[g.i] == 0 || layer[g.j] == 0) continue;  // reported under rule (i)
    if (layer[g.i] >= layer[g.j]) {
      add(Rule::kOrdering, {g.i, g.j},
          "phase gate needs layer(i) < layer(j), got " + std::to_string(layer[g.i]) + " and " +
              std::to_string(layer[g.j]));
    }
  }
  return report;
}

void require_valid(const Skeleton& sk) {
  ValidationReport report = validate_skeleton(sk);
  if (!report.valid()) throw ValidationError("invalid skeleton:\n" + report.to_string());
}

Skeleton build_hp0(int n) {
  check_width(n);
  Skeleton sk{n, {{}}, {}};
  for (int q = 1; q <= n; ++q) sk.layers[0].push_back(q);
  return sk;
}

Skeleton build_fixed_hp1(int n) {
  if (n < 2) throw ParameterError("fixed HP-1 needs n >= 2");
  check_width(n);
  Skeleton sk{n, {{}, {}}, {}};
  for (int q = 1; q <= n; ++q) sk.layers[(q % 2 == 1) ? 0 : 1].push_back(q);
  for (int i : sk.layers[0]) {
    for (int j : sk.layers[1]) {
      sk.phases.push_back({i, j, 2.0 * std::numbers::pi / std::ldexp(1.0, std::abs(i - j))});
    }
  }
  return sk;
}

Skeleton with_dense_phases(Skeleton sk, double theta) {
  const std::vector<int> layer = sk.layer_of();
  std::set<std::pair<int, int>> present;
  for (const auto& g : sk.phases) present.emplace(std::min(g.i, g.j), std::max(g.i, g.j));
  for (std::size_t l = 0; l < sk.layers.size(); ++l) {
    for (int i : sk.layers[l]) {
      for (int j = 1; j <= sk.n; ++j) {
        if (layer[j] > static_cast<int>(l) + 1 &&
            present.emplace(std::min(i, j), std::max(i, j)).second) {
          sk.phases.push_back({i, j, theta});
        }
      }
    }
  }
  return sk;
}

Skeleton sample_random_skeleton(int n, int num_layers, std::uint64_t seed, PhaseFill fill) {
  check_width(n);
  if (num_layers < 1 || num_layers > n) {
    throw ParameterError("layer count must satisfy 1 <= L <= n");
  }
  Rng rng(seed);
  const int big_l = num_layers;

  // ways[k][e]: assignments of k remaining qubits that fill e still-empty
  // layers (and may reuse the L - e nonempty ones). Sampling each qubit's
  // layer proportionally gives a uniform surjection onto the L layers.
  std::vector<std::vector<double>> ways(n + 1, std::vector<double>(big_l + 1, 0.0));
  ways[0][0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    for (int e = 0; e <= big_l; ++e) {
      double w = (big_l - e) * ways[k - 1][e];
      if (e > 0) w += e * ways[k - 1][e - 1];
      ways[k][e] = w;
    }
  }

  Skeleton sk{n, std::vector<std::vector<int>>(big_l), {}};
  std::vector<int> empty_layers(big_l);
  for (int l = 0; l < big_l; ++l) empty_layers[l] = l;
  std::vector<int> used_layers;
  for (int q = 1; q <= n; ++q) {
    const int remaining = n - q + 1;
    const int e = static_cast<int>(empty_layers.size());
    const double reuse = (big_l - e) * ways[remaining - 1][e];
    const double fresh = e > 0 ? e * ways[remaining - 1][e - 1] : 0.0;
    const double u = rng.uniform() * (reuse + fresh);
    if (u < reuse && !used_layers.empty()) {
      const int l = used_layers[rng.below(used_layers.size())];
      sk.layers[l].push_back(q);
    } else {
      const std::size_t pick = rng.below(empty_layers.size());
      const int l = empty_layers[pick];
      empty_layers.erase(empty_layers.begin() + static_cast<std::ptrdiff_t>(pick));
      used_layers.push_back(l);
      sk.layers[l].push_back(q);
    }
  }

  if (fill == PhaseFill::kDense) {
    const std::vector<int> layer = sk.layer_of();
    for (int l = 1; l <= big_l; ++l) {
      for (int i : sk.layers[l - 1]) {
        for (int j = 1; j <= n; ++j) {
          if (layer[j] > l) sk.phases.push_back({i, j, 2.0 * std::numbers::pi * rng.uniform()});
        }
      }
    }
  }
  return sk;
}

EffectivePhaseMatrix::EffectivePhaseMatrix(const Skeleton& sk) : n_(sk.n) {
  require_valid(sk);
  entries_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
  for (int q = 1; q <= n_; ++q) entries_[(q - 1) * n_ + (q - 1)] = std::numbers::pi;
  for (const auto& g : sk.phases) entries_[(g.i - 1) * n_ + (g.j - 1)] = g.theta;
}

cplx amplitude(const EffectivePhaseMatrix& theta, std::uint64_t in, std::uint64_t out) {
  const int n = theta.n();
  const std::uint64_t dim = std::uint64_t{1} << n;
  if (in >= dim || out >= dim) throw ParameterError("basis index exceeds register dimension");
  double phase = 0.0;
  for (int i = 1; i <= n; ++i) {
    if (!qubit_bit(out, n, i)) continue;
    for (int j = 1; j <= n; ++j) {
      if (qubit_bit(in, n, j)) phase += theta(i, j);
    }
  }
  return std::polar(1.0 / std::sqrt(static_cast<double>(dim)), phase);
}

StateVector::StateVector(int n) : n_(n) {
  check_width(n);
  amps_.assign(std::size_t{1} << n, cplx(0.0, 0.0));
  amps_[0] = 1.0;
}

StateVector::StateVector(int n, std::vector<cplx> amps) : n_(n), amps_(std::move(amps)) {
  check_width(n);
  if (amps_.size() != (std::size_t{1} << n)) {
    throw ParameterError("amplitude vector length does not match 2^n");
  }
}

StateVector StateVector::basis(int n, std::uint64_t index) {
  StateVector psi(n);
  if (index >= psi.dim()) throw ParameterError("basis index exceeds register dimension");
  psi.amps_[0] = 0.0;
  psi.amps_[index] = 1.0;
  return psi;
}

StateVector StateVector::uniform_over(int n, std::span<const std::uint64_t> support) {
  StateVector psi(n);
  if (support.empty()) throw ParameterError("empty support");
  psi.amps_[0] = 0.0;
  const double a = 1.0 / std::sqrt(static_cast<double>(support.size()));
  for (std::uint64_t x : support) {
    if (x >= psi.dim()) throw ParameterError("support element exceeds register dimension");
    psi.amps_[x] = a;
  }
  return psi;
}

double StateVector::norm_squared() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return s;
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> p(amps_.size());
  kernels::active().norm_sqr(amps_.data(), p.data(), amps_.size());
  return p;
}

CircuitEngine::CircuitEngine(const Skeleton& sk) : n_(sk.n), sk_(sk) {
  require_valid(sk);
  const std::size_t dim = std::size_t{1} << n_;
  const std::vector<int> layer = sk.layer_of();
  layers_.resize(sk.layers.size());
  for (std::size_t l = 0; l < sk.layers.size(); ++l) {
    for (int q : sk.layers[l]) layers_[l].strides.push_back(qubit_mask(n_, q));
  }
  std::vector<std::vector<const PhaseGate*>> blocks(sk.layers.size());
  for (const auto& g : sk.phases) blocks[layer[g.i] - 1].push_back(&g);
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    if (blocks[l].empty()) continue;
    std::vector<double> angle(dim, 0.0);
    for (const PhaseGate* g : blocks[l]) {
      const std::uint64_t both = qubit_mask(n_, g->i) | qubit_mask(n_, g->j);
      for (std::size_t x = 0; x < dim; ++x) {
        if ((x & both) == both) angle[x] += g->theta;
      }
    }
    auto& diag = layers_[l].diagonal;
    diag.resize(dim);
    for (std::size_t x = 0; x < dim; ++x) diag[x] = std::polar(1.0, angle[x]);
  }
}

void CircuitEngine::apply(StateVector& psi) const {
  if (psi.n() != n_) throw ParameterError("state width does not match circuit width");
  const auto& k = kernels::active();
  cplx* amps = psi.amplitudes().data();
  const std::size_t dim = psi.dim();
  for (const Layer& layer : layers_) {
    for (std::size_t stride : layer.strides) k.hadamard(amps, dim, stride);
    if (!layer.diagonal.empty()) k.multiply_diagonal(amps, layer.diagonal.data(), dim);
  }
}

StateVector apply_circuit(const Skeleton& sk, StateVector psi) {
  CircuitEngine(sk).apply(psi);
  return psi;
}

StateVector qft_state(StateVector psi) {
  QftEngine(psi.n()).apply(psi);
  return psi;
}

StateVector qft_state_direct(const StateVector& psi) {
  const std::size_t dim = psi.dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<cplx> out(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    cplx acc(0.0, 0.0);
    for (std::size_t j = 0; j < dim; ++j) {
      // Reduce jk mod 2^n before scaling to keep the angle small and exact.
      const std::size_t e = (j * k) & (dim - 1);
      acc += psi[j] * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(e) /
                                          static_cast<double>(dim));
    }
    out[k] = acc * scale;
  }
  return StateVector(psi.n(), std::move(out));
}

Transform Transform::hp(const Skeleton& sk) {
  Transform t;
  t.engine_ = std::make_shared<CircuitEngine>(sk);
  return t;
}

Transform Transform::qft(int n) {
  Transform t;
  t.engine_ = std::make_shared<QftEngine>(n);
  return t;
}

int Transform::n() const {
  return std::visit([](const auto& e) { return e->n(); }, engine_);
}

void Transform::apply(StateVector& psi) const {
  std::visit([&psi](const auto& e) { e->apply(psi); }, engine_);
}

const Skeleton& Transform::skeleton() const {
  if (is_qft()) throw ParameterError("the QFT transform has no skeleton");
  return std::get<std::shared_ptr<CircuitEngine>>(engine_)->skeleton();
}

GateCount gate_count(const Skeleton& sk) {
  require_valid(sk);
  GateCount gc;
  gc.hadamards = sk.n;
  gc.controlled_phases = static_cast<int>(sk.phases.size());

  // List scheduling in circuit order. Each qubit keeps the set of occupied
  // time steps; a gate takes the earliest step after its predecessors that
  // is free on every qubit it touches. Phase gates commute with each other,
  // so only the Hadamards impose ordering on a wire.
  const std::vector<int> layer = sk.layer_of();
  std::vector<std::set<int>> busy(static_cast<std::size_t>(sk.n) + 1);
  std::vector<int> hadamard_step(static_cast<std::size_t>(sk.n) + 1, 0);
  std::vector<int> last_phase(static_cast<std::size_t>(sk.n) + 1, 0);
  auto first_free = [&](int from, std::initializer_list<int> qubits) {
    for (int t = from;; ++t) {
      bool ok = true;
      for (int q : qubits) ok = ok && !busy[q].contains(t);
      if (ok) return t;
    }
  };

  std::vector<std::vector<PhaseGate>> blocks(sk.layers.size());
  for (const auto& g : sk.phases) blocks[layer[g.i] - 1].push_back(g);
  // Within a block, gates go in diagonal order (position of i plus position
  // of j, modulo the larger side), which packs a complete bipartite block
  // into its maximum degree of time steps.
  for (auto& b : blocks) {
    std::vector<int> left, right;
    for (const auto& g : b) left.push_back(g.i), right.push_back(g.j);
    for (auto* v : {&left, &right}) {
      std::sort(v->begin(), v->end());
      v->erase(std::unique(v->begin(), v->end()), v->end());
    }
    const auto pos = [](const std::vector<int>& v, int q) {
      return static_cast<int>(std::lower_bound(v.begin(), v.end(), q) - v.begin());
    };
    const int span = static_cast<int>(std::max(left.size(), right.size()));
    const auto key = [&](const PhaseGate& g) {
      const int a = pos(left, g.i), c = pos(right, g.j);
      return std::tuple((a + c) % std::max(span, 1), a, c);
    };
    std::sort(b.begin(), b.end(), [&](const PhaseGate& a, const PhaseGate& c) { return key(a) < key(c); });
  }
  int depth = 0;
  for (std::size_t l = 0; l < sk.layers.size(); ++l) {
    for (int q : sk.layers[l]) {
      const int t = first_free(last_phase[q] + 1, {q});
      busy[q].insert(t);
      hadamard_step[q] = t;
      depth = std::max(depth, t);
    }
    for (const auto& g : blocks[l]) {
      const int t = first_free(hadamard_step[g.i] + 1, {g.i, g.j});
      busy[g.i].insert(t);
      busy[g.j].insert(t);
      last_phase[g.j] = std::max(last_phase[g.j], t);
      depth = std::max(depth, t);
    }
  }
  gc.depth = depth;
  return gc;
}

}  // namespace hpq
