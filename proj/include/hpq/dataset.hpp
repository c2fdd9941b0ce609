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

// Period-recovery datasets and the decoder's training and evaluation loops.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hpq/circuit.hpp"
#include "hpq/decoder.hpp"

namespace hpq {

/// Default candidate upper bounds: 80 at n = 9, 99 at n = 10. The n = 11
/// value 118 continues the same step and is an assumption.
std::uint64_t default_period_hi(int n);

struct DatasetSpec {
  int n = 0;
  std::uint64_t period_lo = 0;  // n when 0
  std::uint64_t period_hi = 0;  // default_period_hi(n) when 0
  int held_out_shifts = 3;      // per period, test split only
  int test_redraws = 8;         // independent sample bags per held-out shift
  int train_redraws = 16;       // sample bags per training shift
  double val_fraction = 0.1;    // of the non-held-out shifts, per period
  std::uint64_t samples = 0;    // per bag; 1024 n^2 when 0
  double eta = 0.0;             // depolarizing strength for every split
  double train_eta_max = 0.3;   // extra per-bag strength on train bags, uniform in [0, max]
  std::uint64_t seed = 0;

  /// Copy with every defaulted field filled in; throws on an invalid spec.
  DatasetSpec resolved() const;
};

nlohmann::json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json& doc);

enum class Split : std::uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

struct Instance {
  Split split = Split::kTrain;
  std::uint64_t period = 0;
  std::uint64_t shift = 0;
  int redraw = 0;
  Counts counts;
};

struct Dataset {
  DatasetSpec spec;  // resolved
  std::vector<Instance> train, val, test;

  const std::vector<Instance>& split(Split s) const;
};

struct ShiftSplit {
  std::vector<std::uint64_t> train, val, test;
};

/// Seeded partition of the shifts {0..r-1} of one period.
ShiftSplit split_shifts(const DatasetSpec& spec, std::uint64_t period);

/// Streams every instance, ordered by period, then split, shift and redraw.
/// Generation is parallel over periods; the stream is schedule-independent.
void generate_instances(const DatasetSpec& spec, const Transform& u,
                        const std::function<void(Instance&&)>& sink);

Dataset generate_dataset(const DatasetSpec& spec, const Transform& u);

/// Held-out instances only, with noise strength `eta` in place of spec.eta.
std::vector<Instance> generate_test_split(const DatasetSpec& spec, const Transform& u, double eta);

/// File layout: one JSON header line (spec, circuit, record count), then
/// per record: split (u8), period (u64), shift (u64), redraw (u32), digit
/// count (u8) and the label digits (u8 each), then 2^n outcome counts (u32).
/// All integers little-endian. Records are appended one at a time.
class DatasetWriter {
 public:
  DatasetWriter(const std::filesystem::path& path, const DatasetSpec& spec, const nlohmann::json& circuit,
                std::uint64_t records);
  void write(const Instance& inst);
  /// Checks that the announced number of records was written.
  void close();

 private:
  std::filesystem::path path_;
  DatasetSpec spec_;
  std::uint64_t expected_ = 0, written_ = 0;
  std::ofstream out_;
};

/// Number of records generate_instances() will produce.
std::uint64_t count_instances(const DatasetSpec& spec);

class DatasetReader {
 public:
  explicit DatasetReader(const std::filesystem::path& path);
  const DatasetSpec& spec() const { return spec_; }
  const nlohmann::json& circuit() const { return circuit_; }
  std::uint64_t records() const { return records_; }
  /// Next record, or nullopt at the end.
  std::optional<Instance> next();

 private:
  std::unique_ptr<std::ifstream> in_;
  DatasetSpec spec_;
  nlohmann::json circuit_;
  std::uint64_t records_ = 0, read_ = 0;
};

Dataset read_dataset(const std::filesystem::path& path);

struct TrainConfig {
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  int beam_width = 8;
  /// Stop after the first epoch whose validation top-1 reaches this value.
  std::optional<double> stop_at_val_top1;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_top1 = 0.0;
  double val_top3 = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  /// Highest validation top-1 (earliest epoch on ties).
  Checkpoint best;
};

/// Adam on the summed per-digit cross-entropy, shuffling the training split
/// each epoch with a seed-derived permutation. Throws NumericError if the
/// loss becomes non-finite.
TrainResult train(DecoderModel model, const Dataset& data, const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

struct EvalResult {
  double top1 = 0.0;
  double topk = 0.0;
  int k = 0;
  std::size_t examples = 0;
  std::size_t fallbacks = 0;
};

EvalResult evaluate(const DecoderModel& model, const std::vector<Instance>& instances, int k,
                    int beam_width = 8);

}  // namespace hpq
