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

// Deep Sets period decoder. A bag of n-bit outcomes is encoded by a shared
// feature map phi, pooled, and read out by a head that ranks candidate
// periods. Pooling is linear in the bag, so the model consumes outcome
// histograms directly; a bag and its histogram give identical outputs.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hpq/rng.hpp"

namespace hpq {

enum class HeadKind {
  kAutoregressive,  // one binary classifier per digit of r, MSB first
  kFlat,            // softmax over the candidate range
};

enum class Pooling {
  kMean,  // (1/m) sum_i phi(b_i)
  kSum,   // sum_i phi(b_i)
};

struct DecoderConfig {
  int n = 0;
  int feature_width = 0;  // 16 n when left at 0
  std::uint64_t period_lo = 0;
  std::uint64_t period_hi = 0;
  HeadKind head = HeadKind::kAutoregressive;
  Pooling pooling = Pooling::kMean;
  /// Rectifier on the output of phi's second layer as well as between the
  /// layers.
  bool output_activation = true;

  int width() const { return feature_width > 0 ? feature_width : 16 * n; }
  /// Binary digits needed for period_hi.
  int digits() const;
  int candidates() const { return static_cast<int>(period_hi - period_lo + 1); }
};

nlohmann::json to_json(const DecoderConfig& cfg);
DecoderConfig decoder_config_from_json(const nlohmann::json& doc);

struct Parameter {
  std::string name;
  Eigen::MatrixXd value;
};

/// Histogram over the 2^n outcomes of one bag.
using Counts = std::vector<std::uint32_t>;

/// Teacher-forced per-step logits for a batch: logits[t] is batch x 2 for
/// the autoregressive head; the flat head has a single batch x C entry.
using Logits = std::vector<Eigen::MatrixXd>;

class DecoderModel {
 public:
  /// Zero weights.
  explicit DecoderModel(const DecoderConfig& cfg);
  /// He-uniform weights, zero biases.
  static DecoderModel random(const DecoderConfig& cfg, std::uint64_t seed);

  const DecoderConfig& config() const { return cfg_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  Parameter& parameter(const std::string& name);
  const Parameter& parameter(const std::string& name) const;

  /// Row b is the pooled feature of bag b. Throws ParameterError when a
  /// histogram has the wrong length or is empty.
  Eigen::MatrixXd aggregate(std::span<const Counts* const> bags) const;
  Eigen::MatrixXd aggregate(const Counts& bag) const;

  /// Pooled feature of a bag given as raw outcomes.
  Eigen::RowVectorXd aggregate_outcomes(std::span<const std::uint64_t> outcomes) const;

  /// Logits with the given previous digits (teacher forcing). `labels` are
  /// the true periods; ignored by the flat head.
  Logits forward(std::span<const Counts* const> bags, std::span<const std::uint64_t> labels) const;

  /// Mean over the batch of the summed per-step cross-entropies, and its
  /// gradient with respect to every parameter (same order as parameters()).
  double loss_and_gradient(std::span<const Counts* const> bags, std::span<const std::uint64_t> labels,
                           std::vector<Eigen::MatrixXd>* gradient) const;

  /// Log-probability of each candidate in [period_lo, period_hi] for one
  /// pooled feature row.
  std::vector<double> candidate_log_probs(const Eigen::RowVectorXd& pooled) const;

  /// Digit sequence of r, MSB first.
  std::vector<int> digits_of(std::uint64_t r) const;

  /// Head input: rectified affine map of the pooled features.
  Eigen::MatrixXd trunk(const Eigen::MatrixXd& pooled) const;
  /// Log-probabilities of digit t given the head input and earlier digits.
  Eigen::RowVectorXd step_log_probs(int t, const Eigen::RowVectorXd& g, const std::vector<int>& prefix) const;

 private:

  DecoderConfig cfg_;
  Eigen::MatrixXd inputs_;  // 2^n x n, bits mapped to -1 / +1
  std::vector<Parameter> params_;
};

struct BeamResult {
  std::vector<std::uint64_t> candidates;  // best first, inside the period range
  std::vector<double> log_probs;
  /// Set when the beam held no in-range sequence and the list came from
  /// rescoring every in-range candidate.
  bool fallback = false;
};

/// Beam search over digit sequences by cumulative log-probability, then
/// filtering to the candidate range. Deterministic; ties prefer the smaller
/// digit sequence.
BeamResult beam_decode(const DecoderModel& model, const Counts& bag, int beam_width);
BeamResult beam_decode_pooled(const DecoderModel& model, const Eigen::RowVectorXd& pooled, int beam_width);

/// Adam over a parameter list.
class Adam {
 public:
  Adam(const std::vector<Parameter>& params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);
  void step(std::vector<Parameter>& params, const std::vector<Eigen::MatrixXd>& grad);
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

struct Checkpoint {
  static constexpr int kSchemaVersion = 1;
  DecoderModel model;
  int epoch = 0;
  double val_top1 = 0.0;
  std::uint64_t rng_digest = 0;
};

/// First line: JSON metadata with array shapes and byte offsets. Then the
/// arrays as little-endian float64, row-major.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hpq
