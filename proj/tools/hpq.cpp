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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "hpq/circuit.hpp"
#include "hpq/dataset.hpp"
#include "hpq/decoder.hpp"
#include "hpq/distribution.hpp"
#include "hpq/error.hpp"
#include "hpq/fisher.hpp"
#include "hpq/fit.hpp"
#include "hpq/optimizer.hpp"
#include "hpq/parallel.hpp"
#include "hpq/rng.hpp"
#include "hpq/shor.hpp"
#include "hpq/skeleton_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hpq;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr int kExitDomain = 1;
constexpr int kExitConfig = 2;
constexpr int kMaxScanQubits = 16;

const std::vector<double> kDefaultEtas = {1, 0.464, 0.215, 0.1, 0.0464, 0.0215, 0.01, 0.00464, 0.00215, 0.001};

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + " is not valid JSON: " + e.what());
  }
}

void write_json_file(const json& doc, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

// Options of one subcommand. Values given on the command line win over the
// config file, which wins over the defaults; the resolved set is echoed in
// the manifest.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help, bool positional = false) {
    const std::string names = positional ? "--" + name + "," + name : "--" + name;
    CLI::Option* opt = app_->add_option(names, var, help)->capture_default_str();
    entries_.push_back({name, [opt, name, &var](const json& cfg) {
                          if (opt->count() == 0 && cfg.contains(name)) var = cfg.at(name).get<T>();
                        },
                        [name, &var](json& out) { out[name] = var; }});
    return opt;
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    CLI::Option* opt = app_->add_flag("--" + name, var, help);
    entries_.push_back({name, [opt, name, &var](const json& cfg) {
                          if (opt->count() == 0 && cfg.contains(name)) var = cfg.at(name).get<bool>();
                        },
                        [name, &var](json& out) { out[name] = var; }});
    return opt;
  }

  void apply(const json& cfg) {
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
      const bool known = std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == it.key(); });
      if (!known) throw ParameterError("unknown config key '" + it.key() + "' for " + app_->get_name());
    }
    try {
      for (auto& e : entries_) e.apply(cfg);
    } catch (const json::exception& e) {
      throw ParameterError(std::string("config value has the wrong type: ") + e.what());
    }
  }

  json resolved() const {
    json out = json::object();
    for (const auto& e : entries_) e.dump(out);
    return out;
  }

 private:
  struct Entry {
    std::string name;
    std::function<void(const json&)> apply;
    std::function<void(json&)> dump;
  };
  CLI::App* app_;
  std::vector<Entry> entries_;
};

struct Common {
  std::uint64_t seed = 0;
  std::string config;
  std::string out_dir = ".";
  int threads = 0;
};

class Command {
 public:
  Command(CLI::App& parent, const std::string& name, const std::string& help)
      : app_(parent.add_subcommand(name, help)), opts_(app_) {
    opts_.add("seed", common_.seed, "root seed for every random stream of the run");
    app_->add_option("--config", common_.config, "JSON file of option values (flags take precedence)");
    opts_.add("out-dir", common_.out_dir, "directory for every output file");
    opts_.add("threads", common_.threads, "worker threads (0: HPQ_THREADS or hardware concurrency)");
  }
  virtual ~Command() = default;

  CLI::App* app() const { return app_; }
  bool selected() const { return app_->parsed(); }

  int execute(const std::vector<std::string>& argv) {
    json manifest = {{"tool", "hpq"}, {"version", kVersion}, {"subcommand", app_->get_name()}, {"argv", argv},
                     {"started_utc", utc_now()}};
    int code = 0;
    std::string error;
    try {
      if (!common_.config.empty()) opts_.apply(read_json_file(common_.config));
      manifest["config_file"] = common_.config;
      if (common_.threads < 0) throw ParameterError("--threads must be >= 0");
      if (common_.threads > 0) set_thread_count(common_.threads);
      fs::create_directories(out_dir());
      code = run();
    } catch (const ValidationError& e) {
      code = kExitDomain, error = e.what();
    } catch (const NumericError& e) {
      code = kExitDomain, error = e.what();
    } catch (const ParameterError& e) {
      code = kExitConfig, error = e.what();
    } catch (const IoError& e) {
      code = kExitConfig, error = e.what();
    } catch (const fs::filesystem_error& e) {
      code = kExitConfig, error = e.what();
    } catch (const json::exception& e) {
      code = kExitConfig, error = e.what();
    }
    if (!error.empty()) std::cerr << "hpq " << app_->get_name() << ": error: " << error << '\n';
    manifest["config"] = opts_.resolved();
    manifest["seed"] = common_.seed;
    manifest["threads"] = thread_count();
    manifest["outputs"] = outputs_;
    manifest["exit_code"] = code;
    if (!error.empty()) manifest["error"] = error;
    manifest["finished_utc"] = utc_now();
    std::error_code ec;
    fs::create_directories(out_dir(), ec);
    std::ofstream out(out_dir() / "manifest.json");
    if (out) out << manifest.dump(2) << '\n';
    return code;
  }

 protected:
  virtual int run() = 0;

  fs::path out_dir() const { return common_.out_dir; }
  fs::path output(const std::string& name) {
    outputs_.push_back(name);
    return out_dir() / name;
  }
  std::uint64_t seed() const { return common_.seed; }
  Options& opts() { return opts_; }

 private:
  CLI::App* app_;
  Common common_;
  Options opts_;
  std::vector<std::string> outputs_;
};

// ---------------------------------------------------------------- circuits

double fixed_rule_angle(int i, int j) { return 2 * std::numbers::pi / std::ldexp(1.0, std::abs(i - j)); }

Skeleton with_fixed_rule_phases(Skeleton sk) {
  for (auto& g : sk.phases) g.theta = fixed_rule_angle(g.i, g.j);
  return sk;
}

json circuit_json(const std::string& kind, const Skeleton* sk) {
  json j = {{"kind", kind}};
  if (sk) j["skeleton"] = skeleton_to_json(*sk);
  return j;
}

Transform circuit_from_json(const json& doc, int n) {
  if (doc.value("kind", "") == "qft") return Transform::qft(n);
  if (!doc.contains("skeleton")) throw IoError("dataset header carries no circuit description");
  Skeleton sk = skeleton_from_json(doc.at("skeleton"));
  require_valid(sk);
  return Transform::hp(sk);
}

// ---------------------------------------------------------------- validate

class ValidateCommand : public Command {
 public:
  explicit ValidateCommand(CLI::App& app) : Command(app, "validate", "check a skeleton file against the HP-L rules") {
    opts().add("skeleton", path_, "skeleton JSON file", true)->required();
  }

 protected:
  int run() override {
    std::ifstream in(path_);
    if (!in) throw IoError("cannot open skeleton file " + path_);
    std::ostringstream text;
    text << in.rdbuf();
    json doc;
    try {
      doc = json::parse(text.str());
    } catch (const json::exception& e) {
      throw IoError(path_ + " is not valid JSON: " + e.what());
    }
    const Skeleton sk = skeleton_from_json(doc);
    const auto report = validate_skeleton(sk);
    json out = {{"skeleton", path_}, {"valid", report.valid()}, {"violations", json::array()}};
    for (const auto& v : report.violations) {
      out["violations"].push_back({{"rule", static_cast<int>(v.rule)}, {"qubits", v.qubits}, {"message", v.message}});
    }
    write_json_file(out, output("validate.json"));
    if (report.valid()) {
      std::cout << path_ << ": valid (n=" << sk.n << ", layers=" << sk.num_layers()
                << ", phases=" << sk.phases.size() << ")\n";
      return 0;
    }
    std::cout << path_ << ": invalid\n" << report.to_string() << '\n';
    return kExitDomain;
  }

 private:
  std::string path_;
};

// ---------------------------------------------------------------- dfi-scan

class DfiScanCommand : public Command {
 public:
  explicit DfiScanCommand(CLI::App& app)
      : Command(app, "dfi-scan", "DFI_min over the period window for a circuit family and a qubit range") {
    opts().add("circuit", circuit_, "hp1-fixed | hp1-optimized | hp1-random | hpL-random | hpL-random-phase | qft");
    opts().add("n-min", n_min_, "smallest register width");
    opts().add("n-max", n_max_, "largest register width");
    opts().add("draws", draws_, "random circuits per width (random families only)");
    opts().add("layers", layers_, "Hadamard layers of the hpL families");
    opts().add("opt-method", opt_method_, "optimizer for hp1-optimized");
    opts().add("opt-iterations", opt_iterations_, "optimizer iterations for hp1-optimized");
    opts().add("opt-restarts", opt_restarts_, "optimizer restarts for hp1-optimized");
  }

 protected:
  int run() override {
    static const std::vector<std::string> kFamilies = {"hp1-fixed",  "hp1-optimized",    "hp1-random",
                                                       "hpL-random", "hpL-random-phase", "qft"};
    if (std::find(kFamilies.begin(), kFamilies.end(), circuit_) == kFamilies.end()) {
      throw ParameterError("unknown circuit family '" + circuit_ + "'");
    }
    if (n_min_ < 2 || n_max_ < n_min_ || n_max_ > kMaxScanQubits) {
      throw ParameterError("qubit range must satisfy 2 <= n-min <= n-max <= " + std::to_string(kMaxScanQubits));
    }
    if (draws_ < 1) throw ParameterError("--draws must be >= 1");
    const bool random = circuit_ == "hp1-random" || circuit_ == "hpL-random" || circuit_ == "hpL-random-phase";
    const int draws = random ? draws_ : 1;

    std::ofstream scan(output("dfi_scan.csv"));
    std::ofstream summary(output("dfi_min.csv"));
    if (!scan || !summary) throw IoError("cannot write scan outputs in " + out_dir().string());
    scan << "n,draw,r,dfi\n";
    summary << "n,mean,std,draws,penalized\n";
    std::vector<FitPoint> points;
    for (int n = n_min_; n <= n_max_; ++n) {
      std::vector<double> mins;
      int penalized = 0;
      for (int d = 0; d < draws; ++d) {
        const Transform u = make_circuit(n, d);
        const auto res = dfi_min_scan(u, circuit_);
        for (const auto& e : res.entries) {
          scan << n << ',' << d << ',' << e.r << ',' << (e.value.infinite ? "inf" : fmt(e.value.value)) << '\n';
        }
        if (res.excluded > 0) ++penalized;
        if (res.dfi_min) mins.push_back(*res.dfi_min);
      }
      if (mins.empty()) {
        summary << n << ",inf,0," << draws << ',' << penalized << '\n';
        std::cout << "n=" << n << " every period infinite\n";
        continue;
      }
      const double mean = std::accumulate(mins.begin(), mins.end(), 0.0) / mins.size();
      double var = 0;
      for (double v : mins) var += (v - mean) * (v - mean);
      const double sd = mins.size() > 1 ? std::sqrt(var / (mins.size() - 1)) : 0.0;
      summary << n << ',' << fmt(mean) << ',' << fmt(sd) << ',' << mins.size() << ',' << penalized << '\n';
      std::cout << "n=" << n << " dfi_min mean=" << fmt(mean) << " std=" << fmt(sd) << '\n';
      points.push_back({double(n), mean});
    }
    json out = {{"circuit", circuit_}, {"n_min", n_min_}, {"n_max", n_max_}, {"draws", draws}};
    if (points.size() >= 3) {
      const auto fit = loglinear_fit(points);
      out["fit"] = fit_to_json(fit);
      std::cout << "slope k=" << fmt(fit.slope) << " ci95=[" << fmt(fit.ci95_slope.first) << ", "
                << fmt(fit.ci95_slope.second) << "] R2=" << fmt(fit.r_squared) << '\n';
    } else {
      out["fit"] = nullptr;
    }
    write_json_file(out, output("fit.json"));
    return 0;
  }

 private:
  Transform make_circuit(int n, int draw) const {
    const std::uint64_t s = Rng(seed()).split(static_cast<std::uint64_t>(n)).split(static_cast<std::uint64_t>(draw))();
    if (circuit_ == "qft") return Transform::qft(n);
    if (circuit_ == "hp1-fixed") return Transform::hp(build_fixed_hp1(n));
    if (circuit_ == "hp1-optimized") {
      OptimizerConfig cfg;
      cfg.method = parse_optimizer_method(opt_method_);
      cfg.max_iterations = opt_iterations_;
      cfg.restarts = opt_restarts_;
      cfg.seed = s;
      return Transform::hp(optimize(build_fixed_hp1(n), cfg).best_skeleton);
    }
    if (layers_ < 2) throw ParameterError("--layers must be >= 2");
    const int layers = circuit_ == "hp1-random" ? 2 : std::min(layers_, n);
    Skeleton sk = sample_random_skeleton(n, layers, s);
    if (circuit_ != "hpL-random-phase") sk = with_fixed_rule_phases(sk);
    return Transform::hp(sk);
  }

  std::string circuit_ = "hp1-fixed";
  int n_min_ = 7, n_max_ = 14, draws_ = 20, layers_ = 3;
  std::string opt_method_ = "coordinate-ascent";
  int opt_iterations_ = 3, opt_restarts_ = 1;
};

// ---------------------------------------------------------------- hp0

class Hp0Command : public Command {
 public:
  explicit Hp0Command(CLI::App& app) : Command(app, "hp0", "transversal Hadamard sampling for a subgroup of Z_2^n") {
    opts().add("n", n_, "register width");
    opts().add("p", p_, "hidden subgroup exponent: V is generated by 2^p");
    opts().add("m", m_, "samples per trial");
    opts().add("trials", trials_, "independent repetitions");
    opts().add("coset", coset_, "coset representative (-1: seeded per trial)");
  }

 protected:
  int run() override {
    if (p_ < 0 || p_ > n_) throw ParameterError("p must lie in [0, n]");
    if (trials_ < 1 || m_ < 1) throw ParameterError("--trials and --m must be >= 1");
    std::ofstream csv(output("hp0.csv"));
    if (!csv) throw IoError("cannot write hp0.csv");
    csv << "trial,coset,p_hat,correct\n";
    const std::uint64_t cosets = std::uint64_t{1} << p_;
    int failures = 0;
    for (int t = 0; t < trials_; ++t) {
      Rng rng = Rng(seed()).split(static_cast<std::uint64_t>(t));
      const std::uint64_t c = coset_ >= 0 ? static_cast<std::uint64_t>(coset_) : rng.below(cosets);
      const auto dist = hp0_distribution({{n_, p_}, c});
      const auto batch = draw_samples(dist, static_cast<std::size_t>(m_), rng());
      const int p_hat = hp0_decode(batch).p;
      failures += p_hat != p_;
      csv << t << ',' << c << ',' << p_hat << ',' << (p_hat == p_ ? 1 : 0) << '\n';
      if (t == 0) {
        write_samples(batch, output("samples.txt"));
        if (trials_ == 1) {
          for (auto x : batch.outcomes) std::cout << BitString(n_, x).to_string() << '\n';
        }
      }
      if (trials_ == 1) std::cout << "p_hat=" << p_hat << " (V generated by 2^" << p_hat << ")\n";
    }
    const double rate = double(failures) / trials_;
    write_json_file({{"n", n_}, {"p", p_}, {"m", m_}, {"trials", trials_}, {"failures", failures},
                     {"failure_rate", rate}, {"bound", std::ldexp(1.0, -m_)}},
                    output("hp0.json"));
    if (trials_ > 1) std::cout << "failure rate " << fmt(rate) << " over " << trials_ << " trials\n";
    return 0;
  }

 private:
  int n_ = 8, p_ = 3, m_ = 20, trials_ = 1;
  long long coset_ = -1;
};

// ---------------------------------------------------------------- optimize

class OptimizeCommand : public Command {
 public:
  explicit OptimizeCommand(CLI::App& app)
      : Command(app, "optimize", "maximize DFI_min over the phase angles of a fixed skeleton") {
    opts().add("skeleton", skeleton_, "starting skeleton file (default: fixed HP-1 at --n)");
    opts().add("n", n_, "register width when no skeleton file is given");
    opts().add("method", method_, "coordinate-ascent | spsa | fd");
    opts().add("max-iterations", cfg_.max_iterations, "sweeps or steps per restart");
    opts().add("restarts", cfg_.restarts, "restarts; the first starts from the given phases");
    opts().add("tolerance", cfg_.tolerance, "stop when an iteration gains less than this");
    opts().add("grid-points", cfg_.grid_points, "coarse grid per coordinate");
    opts().add("golden-iterations", cfg_.golden_iterations, "golden-section steps per coordinate");
  }

 protected:
  int run() override {
    const Skeleton start = skeleton_.empty() ? build_fixed_hp1(n_) : load_skeleton(skeleton_);
    cfg_.method = parse_optimizer_method(method_);
    cfg_.seed = seed();
    const auto trace = optimize(start, cfg_);
    write_trace_jsonl(trace, output("trace.jsonl"));
    save_skeleton(trace.best_skeleton, output("optimized_skeleton.json"));
    write_json_file({{"initial_objective", trace.initial_objective},
                     {"best_objective", trace.best_objective},
                     {"iterations", trace.records.size()},
                     {"best_phases", trace.best_phases}},
                    output("optimize.json"));
    std::cout << "DFI_min " << fmt(trace.initial_objective) << " -> " << fmt(trace.best_objective) << '\n';
    return 0;
  }

 private:
  std::string skeleton_;
  int n_ = 8;
  std::string method_ = "coordinate-ascent";
  OptimizerConfig cfg_;
};

// ---------------------------------------------------------------- gen-dataset

class GenDatasetCommand : public Command {
 public:
  explicit GenDatasetCommand(CLI::App& app)
      : Command(app, "gen-dataset", "sample labelled measurement histograms for decoder training") {
    opts().add("n", spec_.n, "register width");
    opts().add("circuit", circuit_, "hp1-fixed | qft | file (uses --skeleton)");
    opts().add("skeleton", skeleton_, "skeleton file for --circuit file");
    opts().add("period-lo", spec_.period_lo, "smallest candidate period (0: n)");
    opts().add("period-hi", spec_.period_hi, "largest candidate period (0: default for n)");
    opts().add("held-out", spec_.held_out_shifts, "test shifts per period");
    opts().add("train-redraws", spec_.train_redraws, "bags per training shift");
    opts().add("test-redraws", spec_.test_redraws, "bags per held-out shift");
    opts().add("val-fraction", spec_.val_fraction, "share of the remaining shifts used for validation");
    opts().add("samples", spec_.samples, "samples per bag (0: 1024 n^2)");
    opts().add("eta", spec_.eta, "depolarizing strength");
    opts().add("train-eta-max", spec_.train_eta_max, "upper bound of per-bag training noise");
    opts().add("output", output_, "dataset file name inside --out-dir");
  }

 protected:
  int run() override {
    spec_.seed = seed();
    const DatasetSpec spec = spec_.resolved();
    json circuit;
    Transform u = Transform::qft(1);
    if (circuit_ == "qft") {
      u = Transform::qft(spec.n), circuit = circuit_json("qft", nullptr);
    } else if (circuit_ == "hp1-fixed" || circuit_ == "file") {
      const Skeleton sk = circuit_ == "file" ? load_skeleton(skeleton_) : build_fixed_hp1(spec.n);
      if (sk.n != spec.n) throw ParameterError("skeleton width does not match --n");
      u = Transform::hp(sk), circuit = circuit_json(circuit_, &sk);
    } else {
      throw ParameterError("unknown circuit '" + circuit_ + "'");
    }
    const auto t0 = std::chrono::steady_clock::now();
    DatasetWriter writer(output(output_), spec, circuit, count_instances(spec));
    std::uint64_t counts[3] = {0, 0, 0};
    generate_instances(spec, u, [&](Instance&& inst) {
      ++counts[static_cast<int>(inst.split)];
      writer.write(inst);
    });
    writer.close();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "train=" << counts[0] << " val=" << counts[1] << " test=" << counts[2] << " samples/bag=" << spec.samples
              << " (" << fmt(secs) << " s)\n";
    return 0;
  }

 private:
  DatasetSpec spec_;
  std::string circuit_ = "hp1-fixed", skeleton_, output_ = "dataset.bin";
};

// ---------------------------------------------------------------- train

class TrainCommand : public Command {
 public:
  explicit TrainCommand(CLI::App& app) : Command(app, "train", "train the permutation-invariant period decoder") {
    opts().add("dataset", dataset_, "dataset file from gen-dataset")->required();
    opts().add("epochs", cfg_.epochs, "passes over the training split");
    opts().add("batch-size", cfg_.batch_size, "bags per update");
    opts().add("lr", cfg_.learning_rate, "Adam learning rate");
    opts().add("beam-width", cfg_.beam_width, "beam width for validation decoding");
    opts().add("feature-width", model_.feature_width, "feature width (0: 16 n)");
    opts().add("head", head_, "autoregressive | flat");
    opts().add("pooling", pooling_, "mean | sum");
    opts().flag("no-output-activation", no_output_activation_, "drop the ReLU after the feature map");
    opts().add("stop-at", stop_at_, "stop once validation top-1 reaches this (negative: never)");
    opts().add("require-top1", require_top1_, "exit 1 when the best validation top-1 is lower (negative: off)");
    opts().add("output", output_, "checkpoint file name inside --out-dir");
  }

 protected:
  int run() override {
    const Dataset data = read_dataset(dataset_);
    model_.n = data.spec.n;
    model_.period_lo = data.spec.period_lo;
    model_.period_hi = data.spec.period_hi;
    model_.head = head_ == "flat" ? HeadKind::kFlat : head_ == "autoregressive" ? HeadKind::kAutoregressive
                                                                                : throw ParameterError("unknown head " + head_);
    model_.pooling = pooling_ == "sum" ? Pooling::kSum : pooling_ == "mean" ? Pooling::kMean
                                                                            : throw ParameterError("unknown pooling " + pooling_);
    model_.output_activation = !no_output_activation_;
    cfg_.seed = seed();
    if (stop_at_ >= 0) cfg_.stop_at_val_top1 = stop_at_;
    std::ofstream hist(output("history.csv"));
    if (!hist) throw IoError("cannot write history.csv");
    hist << "epoch,train_loss,val_top1,val_top3,seconds\n";
    const auto result = train(DecoderModel::random(model_, Rng(seed()).split(0x4d4f44454cULL)()), data, cfg_,
                              [&](const EpochRecord& e) {
                                hist << e.epoch << ',' << fmt(e.train_loss) << ',' << fmt(e.val_top1) << ','
                                     << fmt(e.val_top3) << ',' << fmt(e.seconds) << '\n';
                                hist.flush();
                                std::cout << "epoch " << e.epoch << " loss " << fmt(e.train_loss) << " val_top1 "
                                          << fmt(e.val_top1) << " val_top3 " << fmt(e.val_top3) << '\n';
                              });
    save_checkpoint(result.best, output(output_));
    write_json_file({{"best_epoch", result.best.epoch}, {"best_val_top1", result.best.val_top1},
                     {"epochs_run", result.history.size()}},
                    output("train.json"));
    std::cout << "best epoch " << result.best.epoch << " val_top1 " << fmt(result.best.val_top1) << '\n';
    if (require_top1_ >= 0 && result.best.val_top1 < require_top1_) return kExitDomain;
    return 0;
  }

 private:
  std::string dataset_, head_ = "autoregressive", pooling_ = "mean", output_ = "model.ckpt";
  bool no_output_activation_ = false;
  double stop_at_ = -1, require_top1_ = -1;
  DecoderConfig model_;
  TrainConfig cfg_;
};

// ---------------------------------------------------------------- eval

Checkpoint load_checkpoint_hint(const std::string& path) {
  if (!fs::exists(path)) throw IoError("checkpoint " + path + " not found; run 'hpq train' first");
  return load_checkpoint(path);
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ParameterError("unknown split " + s);
}

class EvalCommand : public Command {
 public:
  explicit EvalCommand(CLI::App& app) : Command(app, "eval", "top-1 and top-k accuracy of a checkpoint") {
    opts().add("checkpoint", checkpoint_, "checkpoint file")->required();
    opts().add("dataset", dataset_, "dataset file")->required();
    opts().add("split", split_, "train | val | test");
    opts().add("k", k_, "top-k cutoff");
    opts().add("beam-width", beam_width_, "beam width");
    opts().add("require-top1", require_top1_, "exit 1 when top-1 is lower (negative: off)");
  }

 protected:
  int run() override {
    const auto ckpt = load_checkpoint_hint(checkpoint_);
    if (!fs::exists(dataset_)) throw IoError("dataset " + dataset_ + " not found; run 'hpq gen-dataset' first");
    const auto data = read_dataset(dataset_);
    const auto res = evaluate(ckpt.model, data.split(parse_split(split_)), k_, std::max(beam_width_, k_));
    write_json_file({{"split", split_}, {"top1", res.top1}, {"topk", res.topk}, {"k", res.k},
                     {"examples", res.examples}, {"fallbacks", res.fallbacks}},
                    output("eval.json"));
    std::cout << split_ << ": top1 " << fmt(res.top1) << " top" << k_ << ' ' << fmt(res.topk) << " over "
              << res.examples << " examples\n";
    if (require_top1_ >= 0 && res.top1 < require_top1_) return kExitDomain;
    return 0;
  }

 private:
  std::string checkpoint_, dataset_, split_ = "test";
  int k_ = 3, beam_width_ = 8;
  double require_top1_ = -1;
};

// ---------------------------------------------------------------- eval-noise

class EvalNoiseCommand : public Command {
 public:
  explicit EvalNoiseCommand(CLI::App& app)
      : Command(app, "eval-noise", "held-out accuracy under global depolarizing noise") {
    opts().add("checkpoint", checkpoint_, "checkpoint file")->required();
    opts().add("dataset", dataset_, "dataset file whose spec and circuit define the held-out split")->required();
    opts().add("etas", etas_, "depolarizing strengths");
    opts().add("k", k_, "top-k cutoff");
    opts().add("beam-width", beam_width_, "beam width");
  }

 protected:
  int run() override {
    const auto ckpt = load_checkpoint_hint(checkpoint_);
    if (!fs::exists(dataset_)) throw IoError("dataset " + dataset_ + " not found; run 'hpq gen-dataset' first");
    const DatasetReader header(dataset_);
    const DatasetSpec spec = header.spec();
    const Transform u = circuit_from_json(header.circuit(), spec.n);
    std::ofstream csv(output("noise.csv"));
    if (!csv) throw IoError("cannot write noise.csv");
    csv << "eta,top1,topk,k,examples,stderr_top1,chance\n";
    const double chance = 1.0 / double(spec.period_hi - spec.period_lo + 1);
    for (double eta : etas_) {
      const auto inst = generate_test_split(spec, u, eta);
      const auto res = evaluate(ckpt.model, inst, k_, std::max(beam_width_, k_));
      const double se = std::sqrt(res.top1 * (1 - res.top1) / std::max<std::size_t>(res.examples, 1));
      csv << fmt(eta) << ',' << fmt(res.top1) << ',' << fmt(res.topk) << ',' << k_ << ',' << res.examples << ','
          << fmt(se) << ',' << fmt(chance) << '\n';
      std::cout << "eta=" << fmt(eta) << " top1 " << fmt(res.top1) << " top" << k_ << ' ' << fmt(res.topk) << '\n';
    }
    return 0;
  }

 private:
  std::string checkpoint_, dataset_;
  std::vector<double> etas_ = kDefaultEtas;
  int k_ = 3, beam_width_ = 8;
};

// ---------------------------------------------------------------- shor

class ShorCommand : public Command {
 public:
  explicit ShorCommand(CLI::App& app)
      : Command(app, "shor", "factor a batch of composites with decoder-guided period finding") {
    opts().add("checkpoints", checkpoints_, "trained checkpoints, one per register width")->required();
    opts().add("n-lo", lo_, "smallest N");
    opts().add("n-hi", hi_, "largest N");
    opts().add("k-max", k_max_, "guesses tried per instance");
    opts().add("samples", samples_, "samples per instance (0: 1024 n^2)");
    opts().add("beam-width", beam_width_, "beam width");
  }

 protected:
  int run() override {
    std::map<int, Checkpoint> models;
    for (const auto& path : checkpoints_) {
      auto ck = load_checkpoint_hint(path);
      const int n = ck.model.config().n;
      models.emplace(n, std::move(ck));
    }
    struct Job {
      ShorInstance inst;
      std::uint64_t seed;
    };
    std::vector<Job> jobs;
    std::vector<std::uint64_t> skipped;
    for (std::uint64_t N : shor_targets(lo_, hi_)) {
      const std::uint64_t s = Rng(seed()).split(N)();
      bool found = false;
      for (const auto& [n, ck] : models) {
        try {
          const auto inst = choose_base(N, n, s);
          if (inst.r_true < ck.model.config().period_lo || inst.r_true > ck.model.config().period_hi) continue;
          jobs.push_back({inst, s});
          found = true;
          break;
        } catch (const ParameterError&) {
        }
      }
      if (!found) skipped.push_back(N);
    }
    std::vector<FactoringOutcome> outcomes(jobs.size());
    std::map<int, Transform> circuits;
    for (const auto& [n, ck] : models) circuits.emplace(n, Transform::hp(build_fixed_hp1(n)));
    parallel_for(jobs.size(), [&](std::size_t i) {
      const auto& job = jobs[i];
      const auto& model = models.at(job.inst.n).model;
      outcomes[i] = run_instance(job.inst, circuits.at(job.inst.n), model_guesser(model, std::max(beam_width_, k_max_)),
                                 samples_, k_max_, job.seed);
    });
    write_shor_csv(outcomes, output("shor.csv"));
    int ok = 0;
    std::map<int, int> by_k;
    for (const auto& o : outcomes) {
      ok += o.success;
      if (o.success) ++by_k[o.k_used];
    }
    json hist = json::object();
    for (const auto& [k, c] : by_k) hist[std::to_string(k)] = c;
    write_json_file({{"instances", outcomes.size()}, {"success", ok}, {"k_used", hist}, {"skipped", skipped}},
                    output("shor.json"));
    std::cout << ok << " of " << outcomes.size() << " instances factored";
    for (const auto& [k, c] : by_k) std::cout << ", k=" << k << ": " << c;
    std::cout << "; " << skipped.size() << " composites without an admissible base\n";
    return 0;
  }

 private:
  std::vector<std::string> checkpoints_;
  std::uint64_t lo_ = 15, hi_ = 395, samples_ = 0;
  int k_max_ = 3, beam_width_ = 8;
};

// ---------------------------------------------------------------- fit

class FitCommand : public Command {
 public:
  explicit FitCommand(CLI::App& app) : Command(app, "fit", "log-linear fit of DFI_min against n") {
    opts().add("input", input_, "CSV with an n column and a dfi_min or mean column")->required();
  }

 protected:
  int run() override {
    std::ifstream in(input_);
    if (!in) throw IoError("cannot open " + input_);
    std::string line;
    if (!std::getline(in, line)) throw IoError(input_ + " is empty");
    const auto header = split(line);
    const auto col = [&](const std::string& name) {
      return static_cast<int>(std::find(header.begin(), header.end(), name) - header.begin());
    };
    const int cn = col("n");
    int cy = col("dfi_min");
    if (cy == static_cast<int>(header.size())) cy = col("mean");
    if (cn == static_cast<int>(header.size()) || cy == static_cast<int>(header.size())) {
      throw IoError(input_ + " needs an 'n' column and a 'dfi_min' or 'mean' column");
    }
    std::vector<FitPoint> pts;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split(line);
      if (static_cast<int>(f.size()) <= std::max(cn, cy)) throw IoError("short row in " + input_);
      try {
        pts.push_back({std::stod(f[cn]), std::stod(f[cy])});
      } catch (const std::exception&) {
        throw IoError("non-numeric value in " + input_ + ": " + line);
      }
    }
    const auto fit = loglinear_fit(pts);
    write_fit_json(fit, output("fit.json"));
    std::cout << "slope k=" << fmt(fit.slope) << " ci95=[" << fmt(fit.ci95_slope.first) << ", "
              << fmt(fit.ci95_slope.second) << "] R2=" << fmt(fit.r_squared) << " p=" << fmt(fit.p_value_slope)
              << '\n';
    return 0;
  }

 private:
  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(f);
    return out;
  }

  std::string input_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hpq: hidden subgroup sampling with Hadamard-phase circuits"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::vector<std::unique_ptr<Command>> commands;
  commands.push_back(std::make_unique<ValidateCommand>(app));
  commands.push_back(std::make_unique<DfiScanCommand>(app));
  commands.push_back(std::make_unique<Hp0Command>(app));
  commands.push_back(std::make_unique<OptimizeCommand>(app));
  commands.push_back(std::make_unique<GenDatasetCommand>(app));
  commands.push_back(std::make_unique<TrainCommand>(app));
  commands.push_back(std::make_unique<EvalCommand>(app));
  commands.push_back(std::make_unique<EvalNoiseCommand>(app));
  commands.push_back(std::make_unique<ShorCommand>(app));
  commands.push_back(std::make_unique<FitCommand>(app));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  const std::vector<std::string> args(argv, argv + argc);
  for (auto& c : commands) {
    if (c->selected()) return c->execute(args);
  }
  return kExitConfig;
}
