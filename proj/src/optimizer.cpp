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

#include "hpq/optimizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include <nlohmann/json.hpp>

#include "hpq/error.hpp"
#include "hpq/fisher.hpp"
#include "hpq/parallel.hpp"
#include "hpq/rng.hpp"

namespace hpq {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

class Search {
 public:
  Search(const Skeleton& sk, const OptimizerConfig& cfg) : sk_(sk), cfg_(cfg) {}

  double eval(std::span<const double> phases) { return objective(sk_, phases).value; }

  // Values of the objective with coordinate i set to each of `thetas`.
  std::vector<double> eval_coordinate(const std::vector<double>& x, std::size_t i,
                                      const std::vector<double>& thetas) {
    std::vector<double> out(thetas.size());
    parallel_for(thetas.size(), [&](std::size_t t) {
      std::vector<double> y = x;
      y[i] = thetas[t];
      out[t] = eval(y);
    });
    return out;
  }

  double coordinate_sweep(std::vector<double>& x, double fx, Rng& rng) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
    const int g = std::max(cfg_.grid_points, 3);
    const double cell = kTwoPi / g;
    for (std::size_t i : order) {
      std::vector<double> grid(static_cast<std::size_t>(g));
      for (int t = 0; t < g; ++t) grid[t] = x[i] + t * cell;
      const auto values = eval_coordinate(x, i, grid);
      const auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
      double lo = grid[best] - cell, hi = grid[best] + cell;
      double best_theta = grid[best], best_value = values[best];
      // Golden-section refinement on the bracketing cells.
      const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
      double a = hi - ratio * (hi - lo), b = lo + ratio * (hi - lo);
      auto fa = eval_coordinate(x, i, {a, b});
      double va = fa[0], vb = fa[1];
      for (int it = 0; it < cfg_.golden_iterations; ++it) {
        if (va >= vb) {
          hi = b;
          b = a;
          vb = va;
          a = hi - ratio * (hi - lo);
          va = eval_coordinate(x, i, {a})[0];
        } else {
          lo = a;
          a = b;
          va = vb;
          b = lo + ratio * (hi - lo);
          vb = eval_coordinate(x, i, {b})[0];
        }
        if (va > best_value) best_value = va, best_theta = a;
        if (vb > best_value) best_value = vb, best_theta = b;
      }
      if (best_value > fx) {
        x[i] = wrap(best_theta);
        fx = best_value;
      }
    }
    return fx;
  }

  double spsa_step(std::vector<double>& x, double fx, int k, Rng& rng) {
    const double ak = cfg_.spsa_a / std::pow(k + 1 + cfg_.spsa_stability, 0.602);
    const double ck = cfg_.spsa_c / std::pow(k + 1, 0.101);
    std::vector<double> delta(x.size()), plus = x, minus = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      delta[i] = (rng() & 1u) ? 1.0 : -1.0;
      plus[i] += ck * delta[i];
      minus[i] -= ck * delta[i];
    }
    const double fp = eval(plus), fm = eval(minus);
    std::vector<double> cand = x;
    for (std::size_t i = 0; i < x.size(); ++i) cand[i] = wrap(x[i] + ak * (fp - fm) / (2.0 * ck * delta[i]));
    const double fc = eval(cand);
    if (fc > fx) {
      x = std::move(cand);
      return fc;
    }
    return fx;
  }

  double gradient_step(std::vector<double>& x, double fx, double& rate) {
    std::vector<double> grad(x.size());
    parallel_for(x.size(), [&](std::size_t i) {
      std::vector<double> e(x.size(), 0.0);
      e[i] = 1.0;
      grad[i] = directional_derivative(sk_, x, e, cfg_.fd_step);
    });
    const double gnorm = std::sqrt(std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0));
    if (gnorm == 0.0) return fx;
    for (int tries = 0; tries < 20; ++tries) {
      std::vector<double> cand = x;
      for (std::size_t i = 0; i < x.size(); ++i) cand[i] = wrap(x[i] + rate * grad[i] / gnorm);
      const double fc = eval(cand);
      if (fc > fx) {
        x = std::move(cand);
        rate *= 1.5;
        return fc;
      }
      rate *= 0.5;
    }
    return fx;
  }

 private:
  const Skeleton& sk_;
  const OptimizerConfig& cfg_;
};

}  // namespace

OptimizerMethod parse_optimizer_method(const std::string& name) {
  if (name == "coordinate-ascent") return OptimizerMethod::kCoordinateAscent;
  if (name == "simultaneous-perturbation" || name == "spsa") return OptimizerMethod::kSimultaneousPerturbation;
  if (name == "finite-difference-gradient" || name == "fd") return OptimizerMethod::kFiniteDifferenceGradient;
  throw ParameterError("unknown optimizer method '" + name + "'");
}

std::string to_string(OptimizerMethod method) {
  switch (method) {
    case OptimizerMethod::kCoordinateAscent: return "coordinate-ascent";
    case OptimizerMethod::kSimultaneousPerturbation: return "simultaneous-perturbation";
    case OptimizerMethod::kFiniteDifferenceGradient: return "finite-difference-gradient";
  }
  return "?";
}

std::vector<double> phase_vector(const Skeleton& sk) {
  std::vector<double> out;
  out.reserve(sk.phases.size());
  for (const auto& g : sk.phases) out.push_back(g.theta);
  return out;
}

Skeleton with_phases(Skeleton sk, std::span<const double> phases) {
  if (phases.size() != sk.phases.size()) {
    throw ParameterError("phase vector has " + std::to_string(phases.size()) + " entries, skeleton has " +
                         std::to_string(sk.phases.size()) + " phase slots");
  }
  for (std::size_t i = 0; i < phases.size(); ++i) sk.phases[i].theta = phases[i];
  return sk;
}

ObjectiveValue objective(const Skeleton& sk, std::span<const double> phases) {
  const DfiScanResult scan = dfi_min_scan(Transform::hp(with_phases(sk, phases)));
  ObjectiveValue out;
  out.penalized = scan.excluded > 0;
  out.value = scan.dfi_min.value_or(0.0);
  return out;
}

double directional_derivative(const Skeleton& sk, std::span<const double> phases,
                              std::span<const double> direction, double step) {
  if (direction.size() != phases.size()) throw ParameterError("direction size mismatch");
  std::vector<double> plus(phases.begin(), phases.end()), minus = plus;
  for (std::size_t i = 0; i < plus.size(); ++i) {
    plus[i] += step * direction[i];
    minus[i] -= step * direction[i];
  }
  return (objective(sk, plus).value - objective(sk, minus).value) / (2.0 * step);
}

std::uint64_t phase_checksum(std::span<const double> phases) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double p : phases) {
    auto bits = std::bit_cast<std::uint64_t>(p);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

OptimizationTrace optimize(const Skeleton& sk, const OptimizerConfig& cfg) {
  require_valid(sk);
  if (cfg.max_iterations < 1) throw ParameterError("max_iterations must be >= 1");
  if (!(cfg.tolerance > 0.0)) throw ParameterError("tolerance must be > 0");
  if (cfg.restarts < 1) throw ParameterError("restarts must be >= 1");

  Search search(sk, cfg);
  OptimizationTrace trace;
  std::vector<double> start = phase_vector(sk);
  for (auto& t : start) t = wrap(t);
  trace.initial_objective = search.eval(start);
  trace.best_objective = trace.initial_objective;
  trace.best_phases = start;

  const Rng root(cfg.seed);
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    Rng rng = root.split(static_cast<std::uint64_t>(restart));
    std::vector<double> x = start;
    if (restart > 0) {
      for (auto& t : x) t = kTwoPi * rng.uniform();
    }
    double fx = search.eval(x);
    trace.records.push_back({restart, 0, fx, phase_checksum(x), true});
    double rate = cfg.fd_initial_rate;
    int stalled = 0;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
      double next = fx;
      switch (cfg.method) {
        case OptimizerMethod::kCoordinateAscent: next = search.coordinate_sweep(x, fx, rng); break;
        case OptimizerMethod::kSimultaneousPerturbation: next = search.spsa_step(x, fx, it - 1, rng); break;
        case OptimizerMethod::kFiniteDifferenceGradient: next = search.gradient_step(x, fx, rate); break;
      }
      const bool accepted = next > fx;
      const double gain = next - fx;
      fx = next;
      trace.records.push_back({restart, it, fx, phase_checksum(x), accepted});
      // Stochastic steps can fail a few times in a row without having converged.
      stalled = gain < cfg.tolerance ? stalled + 1 : 0;
      const int patience = cfg.method == OptimizerMethod::kSimultaneousPerturbation ? 20 : 1;
      if (stalled >= patience) break;
    }
    if (fx > trace.best_objective) {
      trace.best_objective = fx;
      trace.best_phases = x;
    }
  }
  trace.best_skeleton = with_phases(sk, trace.best_phases);
  return trace;
}

void write_trace_jsonl(const OptimizationTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : trace.records) {
    nlohmann::json rec = {{"restart", r.restart},
                          {"iteration", r.iteration},
                          {"objective", r.objective},
                          {"checksum", r.checksum},
                          {"accepted", r.accepted}};
    out << rec.dump() << '\n';
  }
}

}  // namespace hpq
