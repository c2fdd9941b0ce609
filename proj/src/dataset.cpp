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

#include "hpq/dataset.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <sstream>

#include "hpq/distribution.hpp"
#include "hpq/error.hpp"
#include "hpq/parallel.hpp"
#include "hpq/rng.hpp"

namespace hpq {
namespace {

// Stream tags under the dataset's root seed.
constexpr std::uint64_t kShiftTag = 0x5348494654ULL;
constexpr std::uint64_t kDrawTag = 0x44524157ULL;
constexpr std::uint64_t kAugmentTag = 0x4155474dULL;

void put_u(std::ostream& out, std::uint64_t v, int bytes) {
  char buf[8];
  for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(buf, bytes);
}

std::uint64_t get_u(std::istream& in, int bytes) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), bytes)) throw IoError("truncated dataset record");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

struct Job {
  Split split;
  std::uint64_t shift;
  int redraws;
};

std::vector<Job> jobs_for(const DatasetSpec& spec, std::uint64_t r) {
  const ShiftSplit sh = split_shifts(spec, r);
  std::vector<Job> jobs;
  for (auto s : sh.train) jobs.push_back({Split::kTrain, s, spec.train_redraws});
  for (auto s : sh.val) jobs.push_back({Split::kVal, s, 1});
  for (auto s : sh.test) jobs.push_back({Split::kTest, s, spec.test_redraws});
  return jobs;
}

std::vector<Instance> period_instances(const DatasetSpec& spec, const Transform& u, std::uint64_t r,
                                       double eta, bool test_only) {
  const Rng draws = Rng(spec.seed).split(kDrawTag).split(r);
  std::vector<Instance> out;
  for (const Job& job : jobs_for(spec, r)) {
    if (test_only && job.split != Split::kTest) continue;
    OutcomeDistribution d = periodic_distribution(u, periodic_support(spec.n, r, job.shift));
    if (eta > 0.0) d = depolarize(d, eta);
    const bool augment = job.split == Split::kTrain && spec.train_eta_max > 0.0;
    for (int k = 0; k < job.redraws; ++k) {
      Rng rng = draws.split(job.shift).split(static_cast<std::uint64_t>(k));
      if (augment) {
        const double extra = spec.train_eta_max * rng.split(kAugmentTag).uniform();
        const OutcomeDistribution noisy = depolarize(d, extra);
        out.push_back({job.split, r, job.shift, k, draw_histogram(noisy, spec.samples, rng)});
      } else {
        out.push_back({job.split, r, job.shift, k, draw_histogram(d, spec.samples, rng)});
      }
    }
  }
  return out;
}

void for_each_period(const DatasetSpec& spec, const std::function<std::vector<Instance>(std::uint64_t)>& make,
                     const std::function<void(Instance&&)>& sink) {
  // Periods are generated a chunk at a time so only a chunk is ever held.
  const std::uint64_t chunk = static_cast<std::uint64_t>(std::max(1, thread_count()));
  for (std::uint64_t lo = spec.period_lo; lo <= spec.period_hi; lo += chunk) {
    const std::uint64_t hi = std::min(spec.period_hi, lo + chunk - 1);
    std::vector<std::vector<Instance>> parts(hi - lo + 1);
    parallel_for(parts.size(), [&](std::size_t i) { parts[i] = make(lo + i); });
    for (auto& part : parts) {
      for (auto& inst : part) sink(std::move(inst));
    }
  }
}

}  // namespace

std::uint64_t default_period_hi(int n) {
  switch (n) {
    case 9: return 80;
    case 10: return 99;
    case 11: return 118;
    default:
      throw ParameterError("no default candidate range for n=" + std::to_string(n) + "; set period_hi");
  }
}

DatasetSpec DatasetSpec::resolved() const {
  DatasetSpec s = *this;
  check_width(s.n);
  if (s.period_lo == 0) s.period_lo = static_cast<std::uint64_t>(s.n);
  if (s.period_hi == 0) s.period_hi = default_period_hi(s.n);
  if (s.samples == 0) s.samples = 1024ULL * static_cast<std::uint64_t>(s.n * s.n);
  if (s.period_lo < 1 || s.period_hi < s.period_lo) throw ParameterError("empty candidate period range");
  if (s.period_hi > (std::uint64_t{1} << s.n)) throw ParameterError("candidate period exceeds 2^n");
  if (s.held_out_shifts < 0 || s.test_redraws < 0 || s.train_redraws < 1) {
    throw ParameterError("shift and redraw counts must be nonnegative (train_redraws >= 1)");
  }
  if (static_cast<std::uint64_t>(s.held_out_shifts) >= s.period_lo) {
    throw ParameterError("held-out shifts must leave a training shift for every period");
  }
  if (!(s.val_fraction >= 0.0 && s.val_fraction < 1.0)) throw ParameterError("val_fraction must lie in [0, 1)");
  if (!(s.eta >= 0.0 && s.eta <= 1.0)) throw ParameterError("eta must lie in [0, 1]");
  if (!(s.train_eta_max >= 0.0 && s.train_eta_max <= 1.0)) {
    throw ParameterError("train_eta_max must lie in [0, 1]");
  }
  if (s.samples > 0xffffffffULL) throw ParameterError("too many samples per bag");
  return s;
}

nlohmann::json to_json(const DatasetSpec& spec) {
  return {{"n", spec.n},
          {"period_lo", spec.period_lo},
          {"period_hi", spec.period_hi},
          {"held_out_shifts", spec.held_out_shifts},
          {"test_redraws", spec.test_redraws},
          {"train_redraws", spec.train_redraws},
          {"val_fraction", spec.val_fraction},
          {"samples", spec.samples},
          {"eta", spec.eta},
          {"train_eta_max", spec.train_eta_max},
          {"seed", spec.seed}};
}

DatasetSpec dataset_spec_from_json(const nlohmann::json& doc) {
  DatasetSpec s;
  s.n = doc.value("n", 0);
  s.period_lo = doc.value("period_lo", std::uint64_t{0});
  s.period_hi = doc.value("period_hi", std::uint64_t{0});
  s.held_out_shifts = doc.value("held_out_shifts", s.held_out_shifts);
  s.test_redraws = doc.value("test_redraws", s.test_redraws);
  s.train_redraws = doc.value("train_redraws", s.train_redraws);
  s.val_fraction = doc.value("val_fraction", s.val_fraction);
  s.samples = doc.value("samples", std::uint64_t{0});
  s.eta = doc.value("eta", 0.0);
  s.train_eta_max = doc.value("train_eta_max", s.train_eta_max);
  s.seed = doc.value("seed", std::uint64_t{0});
  return s;
}

const std::vector<Instance>& Dataset::split(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kVal: return val;
    case Split::kTest: return test;
  }
  return test;
}

ShiftSplit split_shifts(const DatasetSpec& spec, std::uint64_t period) {
  std::vector<std::uint64_t> shifts(period);
  for (std::uint64_t s = 0; s < period; ++s) shifts[s] = s;
  Rng rng = Rng(spec.seed).split(kShiftTag).split(period);
  for (std::size_t k = shifts.size(); k > 1; --k) std::swap(shifts[k - 1], shifts[rng.below(k)]);
  ShiftSplit out;
  const std::size_t held = std::min<std::size_t>(static_cast<std::size_t>(spec.held_out_shifts), shifts.size());
  const std::size_t rest = shifts.size() - held;
  std::size_t nval = 0;
  if (rest >= 2 && spec.val_fraction > 0.0) {
    nval = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.val_fraction * static_cast<double>(rest))));
    nval = std::min(nval, rest - 1);
  }
  out.test.assign(shifts.begin(), shifts.begin() + static_cast<std::ptrdiff_t>(held));
  out.val.assign(shifts.begin() + static_cast<std::ptrdiff_t>(held),
                 shifts.begin() + static_cast<std::ptrdiff_t>(held + nval));
  out.train.assign(shifts.begin() + static_cast<std::ptrdiff_t>(held + nval), shifts.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::uint64_t count_instances(const DatasetSpec& spec_in) {
  const DatasetSpec spec = spec_in.resolved();
  std::uint64_t total = 0;
  for (std::uint64_t r = spec.period_lo; r <= spec.period_hi; ++r) {
    for (const Job& j : jobs_for(spec, r)) total += static_cast<std::uint64_t>(j.redraws);
  }
  return total;
}

void generate_instances(const DatasetSpec& spec_in, const Transform& u,
                        const std::function<void(Instance&&)>& sink) {
  const DatasetSpec spec = spec_in.resolved();
  if (u.n() != spec.n) throw ParameterError("circuit width does not match the dataset's n");
  for_each_period(spec, [&](std::uint64_t r) { return period_instances(spec, u, r, spec.eta, false); }, sink);
}

Dataset generate_dataset(const DatasetSpec& spec, const Transform& u) {
  Dataset data;
  data.spec = spec.resolved();
  generate_instances(data.spec, u, [&](Instance&& inst) {
    switch (inst.split) {
      case Split::kTrain: data.train.push_back(std::move(inst)); break;
      case Split::kVal: data.val.push_back(std::move(inst)); break;
      case Split::kTest: data.test.push_back(std::move(inst)); break;
    }
  });
  return data;
}

std::vector<Instance> generate_test_split(const DatasetSpec& spec_in, const Transform& u, double eta) {
  const DatasetSpec spec = spec_in.resolved();
  if (u.n() != spec.n) throw ParameterError("circuit width does not match the dataset's n");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("eta must lie in [0, 1]");
  std::vector<Instance> out;
  for_each_period(spec, [&](std::uint64_t r) { return period_instances(spec, u, r, eta, true); },
                  [&](Instance&& inst) { out.push_back(std::move(inst)); });
  return out;
}

DatasetWriter::DatasetWriter(const std::filesystem::path& path, const DatasetSpec& spec,
                             const nlohmann::json& circuit, std::uint64_t records)
    : path_(path), spec_(spec.resolved()), expected_(records), out_(path, std::ios::binary) {
  if (!out_) throw IoError("cannot write dataset " + path.string());
  const nlohmann::json header = {{"format", "hpq-dataset"},
                                 {"version", 1},
                                 {"spec", to_json(spec_)},
                                 {"circuit", circuit},
                                 {"digits", std::bit_width(spec_.period_hi)},
                                 {"records", records}};
  out_ << header.dump() << '\n';
}

void DatasetWriter::write(const Instance& inst) {
  if (inst.counts.size() != (std::size_t{1} << spec_.n)) throw ParameterError("histogram width mismatch");
  const int nb = static_cast<int>(std::bit_width(spec_.period_hi));
  put_u(out_, static_cast<std::uint64_t>(inst.split), 1);
  put_u(out_, inst.period, 8);
  put_u(out_, inst.shift, 8);
  put_u(out_, static_cast<std::uint64_t>(inst.redraw), 4);
  put_u(out_, static_cast<std::uint64_t>(nb), 1);
  for (int t = 0; t < nb; ++t) put_u(out_, (inst.period >> (nb - 1 - t)) & 1u, 1);
  for (auto c : inst.counts) put_u(out_, c, 4);
  ++written_;
}

void DatasetWriter::close() {
  out_.flush();
  if (!out_) throw IoError("failed writing dataset " + path_.string());
  out_.close();
  if (written_ != expected_) {
    throw IoError("dataset " + path_.string() + " announced " + std::to_string(expected_) + " records, wrote " +
                  std::to_string(written_));
  }
}

DatasetReader::DatasetReader(const std::filesystem::path& path)
    : in_(std::make_unique<std::ifstream>(path, std::ios::binary)) {
  if (!*in_) throw IoError("cannot open dataset " + path.string());
  std::string line;
  if (!std::getline(*in_, line)) throw IoError("empty dataset file " + path.string());
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.at("format").get<std::string>() != "hpq-dataset" || header.at("version").get<int>() != 1) {
      throw IoError("unsupported dataset format in " + path.string());
    }
    spec_ = dataset_spec_from_json(header.at("spec")).resolved();
    circuit_ = header.at("circuit");
    records_ = header.at("records").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed dataset header: ") + e.what());
  } catch (const ParameterError& e) {
    throw IoError(std::string("invalid dataset spec: ") + e.what());
  }
}

std::optional<Instance> DatasetReader::next() {
  if (read_ == records_) return std::nullopt;
  Instance inst;
  const auto split = get_u(*in_, 1);
  if (split > 2) throw IoError("bad split tag in dataset record");
  inst.split = static_cast<Split>(split);
  inst.period = get_u(*in_, 8);
  inst.shift = get_u(*in_, 8);
  inst.redraw = static_cast<int>(get_u(*in_, 4));
  const auto nb = static_cast<int>(get_u(*in_, 1));
  std::uint64_t label = 0;
  for (int t = 0; t < nb; ++t) label = (label << 1) | (get_u(*in_, 1) & 1u);
  if (label != inst.period) throw IoError("dataset record label digits disagree with its period");
  inst.counts.resize(std::size_t{1} << spec_.n);
  for (auto& c : inst.counts) c = static_cast<std::uint32_t>(get_u(*in_, 4));
  ++read_;
  return inst;
}

Dataset read_dataset(const std::filesystem::path& path) {
  DatasetReader reader(path);
  Dataset data;
  data.spec = reader.spec();
  while (auto inst = reader.next()) {
    switch (inst->split) {
      case Split::kTrain: data.train.push_back(std::move(*inst)); break;
      case Split::kVal: data.val.push_back(std::move(*inst)); break;
      case Split::kTest: data.test.push_back(std::move(*inst)); break;
    }
  }
  return data;
}

EvalResult evaluate(const DecoderModel& model, const std::vector<Instance>& instances, int k, int beam_width) {
  if (k < 1) throw ParameterError("k must be >= 1");
  EvalResult res;
  res.k = k;
  res.examples = instances.size();
  if (instances.empty()) return res;
  const int width = std::max(beam_width, k);
  std::vector<int> rank(instances.size(), -1);
  std::vector<char> fell_back(instances.size(), 0);
  constexpr std::size_t kBlock = 64;
  const std::size_t blocks = (instances.size() + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t blk) {
    const std::size_t lo = blk * kBlock, hi = std::min(instances.size(), lo + kBlock);
    std::vector<const Counts*> bags;
    for (std::size_t i = lo; i < hi; ++i) bags.push_back(&instances[i].counts);
    const Eigen::MatrixXd pooled = model.aggregate(bags);
    for (std::size_t i = lo; i < hi; ++i) {
      const BeamResult br = beam_decode_pooled(model, pooled.row(static_cast<Eigen::Index>(i - lo)), width);
      fell_back[i] = br.fallback;
      const auto it = std::find(br.candidates.begin(), br.candidates.end(), instances[i].period);
      if (it != br.candidates.end()) rank[i] = static_cast<int>(it - br.candidates.begin());
    }
  });
  std::size_t top1 = 0, topk = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    top1 += rank[i] == 0;
    topk += rank[i] >= 0 && rank[i] < k;
    res.fallbacks += static_cast<std::size_t>(fell_back[i]);
  }
  res.top1 = static_cast<double>(top1) / static_cast<double>(instances.size());
  res.topk = static_cast<double>(topk) / static_cast<double>(instances.size());
  return res;
}

TrainResult train(DecoderModel model, const Dataset& data, const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  if (data.train.empty()) throw ParameterError("training split is empty");
  if (cfg.epochs < 1 || cfg.batch_size < 1) throw ParameterError("epochs and batch size must be >= 1");
  Adam adam(model.parameters(), cfg.learning_rate);
  TrainResult result{{}, Checkpoint{model, 0, -1.0, 0}};
  const Rng root(cfg.seed);
  std::vector<std::size_t> order(data.train.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng = root.split(static_cast<std::uint64_t>(epoch));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);

    double total = 0.0;
    std::size_t batches = 0;
    std::vector<const Counts*> bags;
    std::vector<std::uint64_t> labels;
    std::vector<Eigen::MatrixXd> grad;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += static_cast<std::size_t>(cfg.batch_size)) {
      bags.clear();
      labels.clear();
      const std::size_t b1 = std::min(order.size(), b0 + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t i = b0; i < b1; ++i) {
        bags.push_back(&data.train[order[i]].counts);
        labels.push_back(data.train[order[i]].period);
      }
      const double loss = model.loss_and_gradient(bags, labels, &grad);
      if (!std::isfinite(loss)) {
        std::ostringstream os;
        os << "training diverged: loss " << loss << " at epoch " << epoch << ", batch " << batches + 1
           << " (learning rate " << cfg.learning_rate << ")";
        throw NumericError(os.str());
      }
      adam.step(model.parameters(), grad);
      total += loss;
      ++batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = total / static_cast<double>(batches);
    if (!data.val.empty()) {
      const EvalResult ev = evaluate(model, data.val, 3, cfg.beam_width);
      rec.val_top1 = ev.top1;
      rec.val_top3 = ev.topk;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.val_top1 > result.best.val_top1) {
      result.best = Checkpoint{model, epoch, rec.val_top1, rng.key() ^ rng.counter()};
    }
    if (cfg.stop_at_val_top1 && rec.val_top1 >= *cfg.stop_at_val_top1) break;
  }
  return result;
}

}  // namespace hpq
