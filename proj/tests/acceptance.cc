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

// Acceptance run: one PASS/FAIL line per criterion. Heavy criteria (decoder
// training, noise sweep, factoring batch) take tens of minutes on one core.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hpq/circuit.hpp"
#include "hpq/dataset.hpp"
#include "hpq/decoder.hpp"
#include "hpq/distribution.hpp"
#include "hpq/error.hpp"
#include "hpq/fisher.hpp"
#include "hpq/fit.hpp"
#include "hpq/group.hpp"
#include "hpq/parallel.hpp"
#include "hpq/rng.hpp"
#include "hpq/shor.hpp"

namespace fs = std::filesystem;
using namespace hpq;

namespace {

constexpr double kPi = std::numbers::pi;

struct Result {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string exact(double v) {
  if (std::isinf(v)) return "inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::ofstream open_csv(const fs::path& path, const std::string& header) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << header << '\n';
  return out;
}

struct Settings {
  std::uint64_t seed = 2026;
  bool reuse_models = false;
};

// Random skeletons with n = 3..6 qubits, L = 1..3 Hadamard layers, 50 each.
struct SkeletonDraw {
  int n, layers, draw;
  Skeleton sk;
};

std::vector<SkeletonDraw> skeleton_set(std::uint64_t seed) {
  std::vector<SkeletonDraw> out;
  const Rng root = Rng(seed).split(0x534b454cULL);
  for (int n = 3; n <= 6; ++n) {
    for (int layers = 1; layers <= 3; ++layers) {
      for (int d = 0; d < 50; ++d) {
        const std::uint64_t s = root.split(static_cast<std::uint64_t>(n))
                                    .split(static_cast<std::uint64_t>(layers))
                                    .split(static_cast<std::uint64_t>(d))();
        out.push_back({n, layers, d, sample_random_skeleton(n, layers, s)});
      }
    }
  }
  return out;
}

double max_dev(const OutcomeDistribution& a, const OutcomeDistribution& b) {
  double m = 0.0;
  for (std::size_t x = 0; x < a.dim(); ++x) m = std::max(m, std::abs(a[x] - b[x]));
  return m;
}

// ---------------------------------------------------------------- 1

Result shift_invariance(const Settings& s, const fs::path& dir) {
  Timer timer;
  auto csv = open_csv(dir / "shift_invariance.csv", "n,layers,draw,max_deviation");
  double worst = 0.0;
  std::size_t cosets = 0;
  const auto set = skeleton_set(s.seed);
  for (const auto& d : set) {
    const Transform u = Transform::hp(d.sk);
    double dev = 0.0;
    for (int p = 0; p <= d.n; ++p) {
      const auto base = coset_distribution(u, {{d.n, p}, 0});
      for (std::uint64_t c = 1; c < (std::uint64_t{1} << p); ++c) {
        dev = std::max(dev, max_dev(base, coset_distribution(u, {{d.n, p}, c})));
        ++cosets;
      }
    }
    worst = std::max(worst, dev);
    csv << d.n << ',' << d.layers << ',' << d.draw << ',' << exact(dev) << '\n';
  }
  const double t = timer.seconds();
  return {worst < 1e-12 && t < 120,
          "shift invariance: max deviation " + num(worst) + " over " + std::to_string(set.size()) +
              " skeletons and " + std::to_string(cosets) + " coset pairs (" + num(t, 3) + " s, limit 120 s)"};
}

// ---------------------------------------------------------------- 2, 3

struct UnitaryChecks {
  double modulus_dev = 0.0;
  double formula_dev = 0.0;
  std::size_t skeletons = 0;
  double seconds = 0.0;
};

UnitaryChecks unitary_checks(const Settings& s) {
  Timer timer;
  UnitaryChecks out;
  for (const auto& d : skeleton_set(s.seed)) {
    const Transform u = Transform::hp(d.sk);
    const EffectivePhaseMatrix theta(d.sk);
    const double flat = std::pow(2.0, -0.5 * d.n);
    const std::uint64_t dim = std::uint64_t{1} << d.n;
    for (std::uint64_t x = 0; x < dim; ++x) {
      StateVector psi = StateVector::basis(d.n, x);
      u.apply(psi);
      for (std::uint64_t y = 0; y < dim; ++y) {
        out.modulus_dev = std::max(out.modulus_dev, std::abs(std::abs(psi[y]) - flat));
        out.formula_dev = std::max(out.formula_dev, std::abs(psi[y] - amplitude(theta, x, y)));
      }
    }
    ++out.skeletons;
  }
  out.seconds = timer.seconds();
  return out;
}

Result flat_modulus(const UnitaryChecks& c) {
  return {c.modulus_dev < 1e-12, "flat modulus: max ||U_xy| - 2^(-n/2)| = " + num(c.modulus_dev) + " over " +
                                     std::to_string(c.skeletons) + " skeletons, n = 3..6"};
}

Result closed_form(const UnitaryChecks& c) {
  return {c.formula_dev < 1e-12 && c.skeletons >= 100,
          "closed-form amplitudes vs gate-by-gate simulation: max deviation " + num(c.formula_dev) + " over " +
              std::to_string(c.skeletons) + " skeletons (" + num(c.seconds, 3) + " s)"};
}

// ---------------------------------------------------------------- 4

Result hp0_checks(const Settings& s, const fs::path& dir) {
  Timer timer;
  auto csv = open_csv(dir / "hp0.csv", "n,p,c,max_deviation");
  double worst = 0.0;
  for (int n = 1; n <= 8; ++n) {
    const Transform hp0 = Transform::hp(build_hp0(n));
    for (int p = 0; p <= n; ++p) {
      for (std::uint64_t c = 0; c < (std::uint64_t{1} << p); ++c) {
        const CosetSpec cs{{n, p}, c};
        const double dev = max_dev(hp0_distribution(cs), coset_distribution(hp0, cs));
        worst = std::max(worst, dev);
        csv << n << ',' << p << ',' << c << ',' << exact(dev) << '\n';
      }
    }
  }

  constexpr int kN = 6, kP = 3, kM = 5, kTrials = 100000;
  std::vector<OutcomeDistribution> dists;
  for (std::uint64_t c = 0; c < (1u << kP); ++c) dists.push_back(hp0_distribution({{kN, kP}, c}));
  const Rng root = Rng(s.seed).split(0x4d43ULL);
  int failures = 0;
  for (int t = 0; t < kTrials; ++t) {
    Rng rng = root.split(static_cast<std::uint64_t>(t));
    const auto& d = dists[rng.below(dists.size())];
    failures += hp0_decode(draw_samples(d, kM, rng())).p != kP;
  }
  const double rate = double(failures) / kTrials;
  const double q = std::ldexp(1.0, -kM);
  const double se = std::sqrt(q * (1 - q) / kTrials);
  auto mc = open_csv(dir / "hp0_monte_carlo.csv", "n,p,m,trials,failures,rate");
  mc << kN << ',' << kP << ',' << kM << ',' << kTrials << ',' << failures << ',' << exact(rate) << '\n';
  const int bound = hp0_sample_bound(1e-3);
  const double t = timer.seconds();
  return {worst < 1e-12 && std::abs(rate - q) <= 3 * se && bound == 10 && t < 60,
          "HP-0 sampling: analytic vs simulated max deviation " + num(worst) + "; failure rate " + num(rate) +
              " vs 2^-5 = " + num(q) + " (3 SE = " + num(3 * se, 3) + "); sample bound(1e-3) = " +
              std::to_string(bound) + " (" + num(t, 3) + " s, limit 60 s)"};
}

// ---------------------------------------------------------------- 5

Result qft_lemma() {
  Timer timer;
  double quad = 0.0;
  for (int r : {1, 2, 3, 4}) {
    for (int R : {2, 4, 8}) {
      const double e = qft_dfi_exact(r, R);
      quad = std::max(quad, std::abs(qft_dfi_quadrature(r, R) - e) / e);
    }
  }
  double two = 0.0;
  for (int r = 1; r <= 64; ++r) {
    two = std::max(two, std::abs(qft_dfi_exact(r, 2) - (4 * kPi * kPi / 3 - 2.0 / (r * r))));
  }
  double ratio = 0.0;
  for (int r : {16, 32, 64}) {
    const int R = (1 << 16) / r;
    ratio = std::max(ratio, std::abs(qft_dfi_exact(r, R) / qft_dfi_asymptotic(r, 16) - 1));
  }
  const double t = timer.seconds();
  return {quad < 1e-6 && two < 1e-12 && ratio < 0.02 && t < 60,
          "QFT DFI lemma: quadrature rel. error " + num(quad) + "; R=2 closed form error " + num(two) +
              "; exact/asymptotic deviation " + num(ratio) + " at n=16 (" + num(t, 3) + " s)"};
}

// ---------------------------------------------------------------- 6

Result table_one(const fs::path& dir) {
  const int before = thread_count();
  set_thread_count(1);
  Timer timer;
  auto csv = open_csv(dir / "dfi_min.csv", "circuit,n,dfi_min");
  std::vector<FitPoint> hp1, qft;
  for (int n = 7; n <= 14; ++n) {
    const auto a = dfi_min_scan(Transform::hp(build_fixed_hp1(n)), "hp1-fixed");
    const auto b = dfi_min_scan(Transform::qft(n), "qft");
    if (!a.dfi_min || !b.dfi_min) throw NumericError("scan without a finite entry at n=" + std::to_string(n));
    hp1.push_back({double(n), *a.dfi_min});
    qft.push_back({double(n), *b.dfi_min});
    csv << "hp1-fixed," << n << ',' << exact(*a.dfi_min) << '\n' << "qft," << n << ',' << exact(*b.dfi_min) << '\n';
  }
  const double t = timer.seconds();
  set_thread_count(before);
  const auto f = loglinear_fit(hp1);
  const auto g = loglinear_fit(qft);
  auto fits = open_csv(dir / "fits.csv", "circuit,slope,intercept,r_squared,ci_lo,ci_hi");
  for (const auto& [name, fit] : {std::pair{"hp1-fixed", f}, std::pair{"qft", g}}) {
    fits << name << ',' << exact(fit.slope) << ',' << exact(fit.intercept) << ',' << exact(fit.r_squared) << ','
         << exact(fit.ci95_slope.first) << ',' << exact(fit.ci95_slope.second) << '\n';
  }
  const bool slope_ok = f.slope >= 0.306 && f.slope <= 0.449 && f.r_squared >= 0.90;
  const bool qft_ok = std::abs(g.slope - 1.067) <= 0.05;
  return {slope_ok && qft_ok && t < 1800,
          "DFI_min scaling n=7..14: fixed HP-1 slope " + num(f.slope) + " (R^2 " + num(f.r_squared) +
              "), target [0.306, 0.449] with R^2 >= 0.90; QFT slope " + num(g.slope) + " (R^2 " +
              num(g.r_squared) + "), target 1.067 +- 0.05 (" + num(t, 3) + " s single-threaded)"};
}

// ---------------------------------------------------------------- 7, 8

std::vector<const Counts*> ptrs(const std::vector<Counts>& bags) {
  std::vector<const Counts*> out;
  for (const auto& b : bags) out.push_back(&b);
  return out;
}

// Fraction of probes where the analytic gradient disagrees with central
// differences by more than 1e-4 relative.
double gradient_mismatch(std::uint64_t seed) {
  DecoderConfig cfg;
  cfg.n = 4;
  cfg.period_lo = 2;
  cfg.period_hi = 4;
  int checked = 0, bad = 0;
  for (std::uint64_t draw = 0; draw < 100; ++draw) {
    auto model = DecoderModel::random(cfg, seed + draw);
    Rng rng = Rng(seed).split(draw);
    for (auto& p : model.parameters()) {
      if (p.name.ends_with("bias")) {
        for (Eigen::Index k = 0; k < p.value.size(); ++k) p.value.data()[k] = 0.2 * rng.normal();
      }
    }
    std::vector<Counts> bags;
    std::vector<std::uint64_t> labels;
    for (int b = 0; b < 3; ++b) {
      Counts c(16, 0);
      for (int i = 0; i < 8; ++i) ++c[rng.below(16)];
      bags.push_back(c);
      labels.push_back(2 + rng.below(3));
    }
    const auto bp = ptrs(bags);
    std::vector<Eigen::MatrixXd> grad;
    model.loss_and_gradient(bp, labels, &grad);
    for (std::size_t p = 0; p < grad.size(); ++p) {
      auto& value = model.parameters()[p].value;
      for (int probe = 0; probe < 3; ++probe) {
        const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(value.size())));
        const double saved = value.data()[k];
        const double h = 1e-6 * std::max(1.0, std::abs(saved));
        value.data()[k] = saved + h;
        const double up = model.loss_and_gradient(bp, labels, nullptr);
        value.data()[k] = saved - h;
        const double down = model.loss_and_gradient(bp, labels, nullptr);
        value.data()[k] = saved;
        const double fd = (up - down) / (2 * h), an = grad[p].data()[k];
        ++checked;
        bad += std::abs(fd - an) > 1e-4 * std::max(std::abs(fd), std::abs(an)) + 1e-8;
      }
    }
  }
  return double(bad) / checked;
}

bool permutation_invariant(const DecoderModel& model, const Counts& bag, std::uint64_t seed) {
  std::vector<std::uint64_t> outcomes;
  for (std::uint64_t x = 0; x < bag.size(); ++x) outcomes.insert(outcomes.end(), bag[x], x);
  const auto a = model.aggregate_outcomes(outcomes);
  Rng rng(seed);
  for (std::size_t i = outcomes.size() - 1; i > 0; --i) std::swap(outcomes[i], outcomes[rng.below(i + 1)]);
  const auto b = model.aggregate_outcomes(outcomes);
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

struct Trained {
  DecoderModel model;
  double best_val = 0.0;
  int best_epoch = 0;
  double seconds = 0.0;
  bool reused = false;
};

Trained train_model(const DatasetSpec& spec, const TrainConfig& tc, const fs::path& ckpt, const fs::path& history,
                    bool reuse) {
  if (reuse && fs::exists(ckpt)) {
    auto c = load_checkpoint(ckpt);
    return {c.model, c.val_top1, c.epoch, 0.0, true};
  }
  Timer timer;
  const Dataset data = generate_dataset(spec, Transform::hp(build_fixed_hp1(spec.n)));
  DecoderConfig cfg;
  cfg.n = data.spec.n;
  cfg.period_lo = data.spec.period_lo;
  cfg.period_hi = data.spec.period_hi;
  auto csv = open_csv(history, "epoch,train_loss,val_top1,val_top3");
  const auto res = train(DecoderModel::random(cfg, Rng(spec.seed).split(0x4d4f44454cULL)()), data, tc,
                         [&](const EpochRecord& e) {
                           csv << e.epoch << ',' << exact(e.train_loss) << ',' << exact(e.val_top1) << ','
                               << exact(e.val_top3) << '\n';
                           std::cerr << "  n=" << spec.n << " epoch " << e.epoch << " loss " << num(e.train_loss)
                                     << " val_top1 " << num(e.val_top1) << '\n';
                         });
  save_checkpoint(res.best, ckpt);
  return {res.best.model, res.best.val_top1, res.best.epoch, timer.seconds(), false};
}

struct DecoderState {
  std::optional<DecoderModel> n10;
};

Result decoder_training(const Settings& s, const fs::path& dir, DecoderState& state) {
  Timer timer;
  const double mismatch = gradient_mismatch(s.seed);

  DatasetSpec s9;
  s9.n = 9;
  s9.seed = Rng(s.seed).split(9)();
  TrainConfig t9;
  t9.epochs = 10;
  t9.seed = s9.seed;
  const auto m9 = train_model(s9, t9, dir / "n9.ckpt", dir / "n9_history.csv", s.reuse_models);

  DatasetSpec s10;
  s10.n = 10;
  s10.seed = Rng(s.seed).split(10)();
  TrainConfig t10;
  t10.epochs = 15;
  t10.seed = s10.seed;
  t10.stop_at_val_top1 = 1.0;
  const auto m10 = train_model(s10, t10, dir / "n10.ckpt", dir / "n10_history.csv", s.reuse_models);
  state.n10 = m10.model;

  Rng rng(s.seed);
  Counts bag(std::size_t{1} << 9, 0);
  for (int i = 0; i < 5000; ++i) ++bag[rng.below(bag.size())];
  const bool invariant = permutation_invariant(m9.model, bag, s.seed);

  const bool pass = m9.best_val >= 0.95 && m10.best_val >= 0.99 && mismatch <= 0.005 && invariant &&
                    (m10.reused || m10.seconds < 7200);
  return {pass, "decoder training: n=9 best val top-1 " + num(m9.best_val) + " at epoch " +
                    std::to_string(m9.best_epoch) + " (target 0.95 within 10); n=10 " + num(m10.best_val) +
                    " at epoch " + std::to_string(m10.best_epoch) + " (target 0.99 within 15, " +
                    (m10.reused ? std::string("reused checkpoint") : num(m10.seconds, 4) + " s") +
                    "); gradient probes off by >1e-4: " + num(100 * mismatch, 3) + "%; permutation invariance " +
                    (invariant ? "bit-exact" : "BROKEN") + " (" + num(timer.seconds(), 4) + " s)"};
}

Result noise_robustness(const Settings& s, const fs::path& dir, DecoderState& state) {
  Timer timer;
  if (!state.n10) {
    const fs::path ckpt = dir / "n10.ckpt";
    if (!fs::exists(ckpt)) return {false, "noise robustness: no n=10 checkpoint; run criterion 7 first"};
    state.n10 = load_checkpoint(ckpt).model;
  }
  DatasetSpec spec;
  spec.n = 10;
  spec.seed = Rng(s.seed).split(10)();
  const Transform u = Transform::hp(build_fixed_hp1(10));
  const std::vector<double> etas = {0, 0.001, 0.00215, 0.00464, 0.01, 0.0215, 0.0464, 0.1, 0.215, 0.464, 1};
  auto csv = open_csv(dir / "noise.csv", "eta,top1,top3,examples");
  std::map<double, double> acc;
  std::size_t examples = 0;
  for (double eta : etas) {
    const auto res = evaluate(*state.n10, generate_test_split(spec, u, eta), 3);
    acc[eta] = res.top1;
    examples = res.examples;
    csv << exact(eta) << ',' << exact(res.top1) << ',' << exact(res.topk) << ',' << res.examples << '\n';
  }
  double worst = 0.0;
  for (double eta : etas) {
    if (eta > 0 && eta <= 0.215) worst = std::max(worst, std::abs(acc[eta] - acc[0]));
  }
  const double chance = 1.0 / 90;
  const double se = std::sqrt(chance * (1 - chance) / double(examples));
  const bool pass = worst <= 0.02 && std::abs(acc[1] - chance) <= 3 * se;
  return {pass, "noise robustness n=10: noiseless top-1 " + num(acc[0]) + ", max drop for eta <= 0.215 " +
                    num(worst) + " (limit 0.02); eta=0.464 " + num(acc[0.464]) + "; eta=1 " + num(acc[1]) +
                    " vs chance " + num(chance) + " +- " + num(3 * se, 3) + " over " + std::to_string(examples) +
                    " examples (" + num(timer.seconds(), 4) + " s)"};
}

// ---------------------------------------------------------------- 9

Result shor_batch(const Settings& s, const fs::path& dir) {
  Timer timer;
  std::map<int, DecoderModel> models;
  for (int n : {9, 10, 11}) {
    DatasetSpec spec;
    spec.n = n;
    spec.period_lo = 2;
    spec.period_hi = period_window(n);
    spec.held_out_shifts = 0;
    spec.seed = Rng(s.seed).split(0x53484f52ULL).split(static_cast<std::uint64_t>(n))();
    TrainConfig tc;
    tc.epochs = 20;
    tc.seed = spec.seed;
    tc.stop_at_val_top1 = 1.0;
    models.emplace(n, train_model(spec, tc, dir / ("shor_n" + std::to_string(n) + ".ckpt"),
                                  dir / ("shor_n" + std::to_string(n) + "_history.csv"), s.reuse_models)
                          .model);
  }
  struct Job {
    ShorInstance inst;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  std::size_t excluded = 0;
  for (std::uint64_t N : shor_targets(15, 395)) {
    const std::uint64_t seed = Rng(s.seed).split(N)();
    std::optional<ShorInstance> inst;
    for (int n : {9, 10, 11}) {
      try {
        inst = choose_base(N, n, seed);
        break;
      } catch (const ParameterError&) {
      }
    }
    if (inst) jobs.push_back({*inst, seed});
    else ++excluded;
  }
  std::map<int, Transform> circuits;
  for (int n : {9, 10, 11}) circuits.emplace(n, Transform::hp(build_fixed_hp1(n)));
  std::vector<FactoringOutcome> out(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    out[i] = run_instance(jobs[i].inst, circuits.at(jobs[i].inst.n), model_guesser(models.at(jobs[i].inst.n), 8), 0,
                          3, jobs[i].seed);
  });
  write_shor_csv(out, dir / "shor.csv");
  std::size_t ok = 0, first = 0, verified = 0;
  std::map<int, int> widths;
  for (const auto& o : out) {
    ++widths[o.instance.n];
    if (!o.success) continue;
    ++ok;
    first += o.k_used == 1;
    verified += o.p * o.q == o.instance.N && o.p > 1 && o.p <= o.q && o.q < o.instance.N && o.k_used <= 3;
  }
  const double frac1 = out.empty() ? 0.0 : double(first) / out.size();
  std::string by_width;
  for (const auto& [n, c] : widths) by_width += " n=" + std::to_string(n) + ":" + std::to_string(c);
  const bool pass = !out.empty() && ok == out.size() && verified == ok && frac1 >= 0.8;
  return {pass, "factoring N <= 395: " + std::to_string(ok) + "/" + std::to_string(out.size()) +
                    " factored with k <= 3, " + num(100 * frac1, 4) + "% at k = 1 (target 80%), products verified " +
                    std::to_string(verified) + ";" + by_width + "; " + std::to_string(excluded) +
                    " composites without an admissible base (" + num(timer.seconds(), 4) + " s)"};
}

// ---------------------------------------------------------------- 10

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream x(a, std::ios::binary), y(b, std::ios::binary);
  if (!x || !y) return false;
  std::ostringstream sx, sy;
  sx << x.rdbuf();
  sy << y.rdbuf();
  return sx.str() == sy.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hpq acceptance run"};
  std::string work = "acceptance_work";
  std::vector<int> only;
  Settings settings;
  app.add_option("--work-dir", work, "directory for every artifact of the run")->capture_default_str();
  app.add_option("--only", only, "criteria to run (default: all)");
  app.add_option("--seed", settings.seed, "root seed")->capture_default_str();
  app.add_flag("--reuse-models", settings.reuse_models, "load decoder checkpoints left by an earlier run");
  CLI11_PARSE(app, argc, argv);

  const std::set<int> selected = only.empty() ? std::set<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}
                                              : std::set<int>(only.begin(), only.end());
  const fs::path run1 = fs::path(work) / "run1", run2 = fs::path(work) / "run2";
  fs::create_directories(run1);
  DecoderState state;
  std::optional<UnitaryChecks> unitary;
  int failed = 0;

  const auto report = [&](int id, const std::function<Result()>& fn) {
    if (!selected.count(id)) return;
    Result r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    failed += !r.pass;
    std::cout << "criterion " << id << ": " << (r.pass ? "PASS" : "FAIL") << "  " << r.detail << std::endl;
  };

  report(1, [&] { return shift_invariance(settings, run1); });
  report(2, [&] {
    if (!unitary) unitary = unitary_checks(settings);
    return flat_modulus(*unitary);
  });
  report(3, [&] {
    if (!unitary) unitary = unitary_checks(settings);
    return closed_form(*unitary);
  });
  report(4, [&] { return hp0_checks(settings, run1); });
  report(5, [&] { return qft_lemma(); });
  report(6, [&] { return table_one(run1); });
  report(7, [&] { return decoder_training(settings, run1, state); });
  report(8, [&] { return noise_robustness(settings, run1, state); });
  report(9, [&] { return shor_batch(settings, run1); });
  report(10, [&] {
    // Reruns the deterministic criteria from scratch into a second
    // directory (models are retrained, never reused) and compares bytes.
    Settings fresh = settings;
    fresh.reuse_models = false;
    const std::vector<std::pair<int, std::vector<std::string>>> files = {
        {1, {"shift_invariance.csv"}},
        {4, {"hp0.csv", "hp0_monte_carlo.csv"}},
        {6, {"dfi_min.csv", "fits.csv"}},
        {9, {"shor.csv"}}};
    for (const fs::path& dir : {run1, run2}) {
      for (const auto& [id, names] : files) {
        if (dir == run1 && selected.count(id) && !(id == 9 && settings.reuse_models)) continue;
        switch (id) {
          case 1: shift_invariance(fresh, dir); break;
          case 4: hp0_checks(fresh, dir); break;
          case 6: table_one(dir); break;
          case 9: shor_batch(fresh, dir); break;
        }
      }
    }
    std::vector<std::string> differing;
    std::size_t compared = 0;
    for (const auto& [id, names] : files) {
      for (const auto& name : names) {
        ++compared;
        if (!same_bytes(run1 / name, run2 / name)) differing.push_back(name);
      }
    }
    std::string detail = "determinism: " + std::to_string(compared - differing.size()) + "/" +
                         std::to_string(compared) + " CSV files byte-identical across reruns of criteria 1, 4, 6, 9";
    for (const auto& d : differing) detail += "; differs: " + d;
    return Result{differing.empty(), detail};
  });

  std::cout << (failed == 0 ? "all selected criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
