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

// Hadamard-phase (HP-L) circuits.
//
// An HP-L circuit on n qubits is described by an ordered partition of the
// qubits into Hadamard layers L_1..L_L plus controlled-phase angles. It is
// applied as
//
//   H(L_1), CP-block(1), H(L_2), CP-block(2), ..., H(L_L)
//
// where CP-block(l) couples qubits of L_l with qubits that have not yet
// received their Hadamard. CP(theta) is diag(1, 1, 1, e^{i theta}).

#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hpq {

using cplx = std::complex<double>;

/// Controlled phase between qubit i (Hadamard'ed earlier) and qubit j
/// (Hadamard'ed later). Indices are 1-based.
struct PhaseGate {
  int i = 0;
  int j = 0;
  double theta = 0.0;

  friend bool operator==(const PhaseGate&, const PhaseGate&) = default;
};

struct Skeleton {
  int n = 0;
  std::vector<std::vector<int>> layers;
  std::vector<PhaseGate> phases;

  int num_layers() const { return static_cast<int>(layers.size()); }

  /// layer_of()[q] is the 1-based layer of qubit q (index 0 unused); 0 when
  /// the qubit is unassigned. Assumes indices are in range.
  std::vector<int> layer_of() const;

  friend bool operator==(const Skeleton&, const Skeleton&) = default;
};

enum class Rule {
  kRange = 0,      // malformed input: n or an index out of range
  kPartition = 1,  // (i) every qubit gets exactly one Hadamard
  kPairOnce = 2,   // (ii) each qubit pair has at most one phase gate
  kOrdering = 3,   // (iii) the phase sits between the two Hadamards
};

struct Violation {
  Rule rule;
  std::vector<int> qubits;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool valid() const { return violations.empty(); }
  bool violates(Rule rule) const;
  std::string to_string() const;
};

ValidationReport validate_skeleton(const Skeleton& sk);

/// Throws ValidationError carrying the report when `sk` is invalid.
void require_valid(const Skeleton& sk);

/// Transversal Hadamard circuit (single layer, no phases).
Skeleton build_hp0(int n);

/// Odd qubits in layer 1, even qubits in layer 2, theta_ij = 2 pi / 2^|i-j|.
Skeleton build_fixed_hp1(int n);

enum class PhaseFill {
  kDense,  // every cross-layer pair gets an angle uniform on [0, 2 pi)
  kZero,   // skeleton only, no phase gates
};

/// Uniformly random ordered partition of {1..n} into `num_layers` nonempty
/// layers. Deterministic in `seed`.
Skeleton sample_random_skeleton(int n, int num_layers, std::uint64_t seed,
                                PhaseFill fill = PhaseFill::kDense);

/// Adds a phase gate for every cross-layer pair not already present.
Skeleton with_dense_phases(Skeleton sk, double theta);

/// Directed matrix with pi on the diagonal and theta_ij where l(i) < l(j).
class EffectivePhaseMatrix {
 public:
  explicit EffectivePhaseMatrix(const Skeleton& sk);

  int n() const { return n_; }
  /// 1-based access.
  double operator()(int i, int j) const { return entries_[(i - 1) * n_ + (j - 1)]; }

 private:
  int n_;
  std::vector<double> entries_;
};

/// <out| U |in> = 2^{-n/2} exp(i sum_ij theta~_ij out_i in_j).
cplx amplitude(const EffectivePhaseMatrix& theta, std::uint64_t in, std::uint64_t out);

class StateVector {
 public:
  /// |0...0>.
  explicit StateVector(int n);
  StateVector(int n, std::vector<cplx> amps);

  static StateVector basis(int n, std::uint64_t index);
  /// Normalized uniform superposition over `support`.
  static StateVector uniform_over(int n, std::span<const std::uint64_t> support);

  int n() const { return n_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<cplx> amplitudes() { return amps_; }
  std::span<const cplx> amplitudes() const { return amps_; }
  cplx operator[](std::size_t x) const { return amps_[x]; }

  double norm_squared() const;
  std::vector<double> probabilities() const;

 private:
  int n_;
  std::vector<cplx> amps_;
};

/// Precompiled HP-L circuit: per-layer Hadamard targets and diagonal phase
/// factors. Immutable; apply() may be called concurrently on distinct states.
class CircuitEngine {
 public:
  explicit CircuitEngine(const Skeleton& sk);

  int n() const { return n_; }
  void apply(StateVector& psi) const;
  const Skeleton& skeleton() const { return sk_; }

 private:
  struct Layer {
    std::vector<std::size_t> strides;
    std::vector<cplx> diagonal;  // empty when the block has no gates
  };
  int n_;
  Skeleton sk_;
  std::vector<Layer> layers_;
};

/// Validates, then applies the circuit to a copy of psi.
StateVector apply_circuit(const Skeleton& sk, StateVector psi);

/// |j> -> 2^{-n/2} sum_k e^{2 pi i jk / 2^n} |k>, by FFT.
class QftEngine {
 public:
  explicit QftEngine(int n);
  ~QftEngine();
  QftEngine(const QftEngine&) = delete;
  QftEngine& operator=(const QftEngine&) = delete;
  QftEngine(QftEngine&&) noexcept;
  QftEngine& operator=(QftEngine&&) noexcept;

  int n() const { return n_; }
  void apply(StateVector& psi) const;

 private:
  struct Plan;
  int n_;
  std::unique_ptr<Plan> plan_;
};

StateVector qft_state(StateVector psi);

/// Direct O(4^n) evaluation of the same transform (reference path).
StateVector qft_state_direct(const StateVector& psi);

/// A measurement transform: an HP-L circuit or the reference QFT.
class Transform {
 public:
  static Transform hp(const Skeleton& sk);
  static Transform qft(int n);

  int n() const;
  bool is_qft() const { return std::holds_alternative<std::shared_ptr<QftEngine>>(engine_); }
  void apply(StateVector& psi) const;
  /// The skeleton behind an HP transform; throws for the QFT.
  const Skeleton& skeleton() const;

 private:
  std::variant<std::shared_ptr<CircuitEngine>, std::shared_ptr<QftEngine>> engine_;
};

struct GateCount {
  int hadamards = 0;
  int controlled_phases = 0;
  int depth = 0;

  friend bool operator==(const GateCount&, const GateCount&) = default;
};

/// Gate totals and the as-soon-as-possible schedule length in which no two
/// gates sharing a qubit occupy the same time step.
GateCount gate_count(const Skeleton& sk);

}  // namespace hpq
