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

// Variational tuning of controlled-phase angles to maximize DFI_min.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hpq/circuit.hpp"

namespace hpq {

enum class OptimizerMethod {
  kCoordinateAscent,
  kSimultaneousPerturbation,
  kFiniteDifferenceGradient,
};

OptimizerMethod parse_optimizer_method(const std::string& name);
std::string to_string(OptimizerMethod method);

struct OptimizerConfig {
  OptimizerMethod method = OptimizerMethod::kCoordinateAscent;
  int max_iterations = 200;  // sweeps (coordinate ascent) or steps
  int restarts = 4;          // restart 0 starts from the given phases
  std::uint64_t seed = 0;
  double tolerance = 1e-9;   // stop when an iteration gains less than this

  // Coordinate ascent: coarse grid, then golden section around the best cell.
  int grid_points = 16;
  int golden_iterations = 24;

  // Simultaneous perturbation: a_k = a / (k + 1 + stability)^0.602,
  // c_k = c / (k + 1)^0.101.
  double spsa_a = 0.2;
  double spsa_c = 0.1;
  double spsa_stability = 10.0;

  // Finite-difference gradient ascent with backtracking.
  double fd_step = 1e-4;
  double fd_initial_rate = 0.5;
};

struct ObjectiveValue {
  double value = 0.0;
  /// Set when some period gave the infinite sentinel and was left out of
  /// the minimum (or when no finite entry remained, in which case value = 0).
  bool penalized = false;
};

/// DFI_min over the period window of `sk` with its phase angles replaced
/// by `phases` (in the order of sk.phases).
ObjectiveValue objective(const Skeleton& sk, std::span<const double> phases);

/// Central-difference estimate of the directional derivative.
double directional_derivative(const Skeleton& sk, std::span<const double> phases,
                              std::span<const double> direction, double step);

std::vector<double> phase_vector(const Skeleton& sk);
Skeleton with_phases(Skeleton sk, std::span<const double> phases);

/// FNV-1a over the bit patterns of the angles.
std::uint64_t phase_checksum(std::span<const double> phases);

struct TraceRecord {
  int restart = 0;
  int iteration = 0;
  double objective = 0.0;
  std::uint64_t checksum = 0;
  bool accepted = false;
};

struct OptimizationTrace {
  std::vector<TraceRecord> records;
  double initial_objective = 0.0;
  double best_objective = 0.0;
  std::vector<double> best_phases;  // reduced into [0, 2 pi)
  Skeleton best_skeleton;
};

/// Deterministic for a fixed config. Only improving moves are accepted, so
/// best_objective >= initial_objective.
OptimizationTrace optimize(const Skeleton& sk, const OptimizerConfig& cfg);

/// One JSON object per record.
void write_trace_jsonl(const OptimizationTrace& trace, const std::filesystem::path& path);

}  // namespace hpq
