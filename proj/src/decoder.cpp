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

#include "hpq/decoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hpq/error.hpp"
#include "hpq/group.hpp"

namespace hpq {
namespace {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

MatrixXd relu(const MatrixXd& z) { return z.cwiseMax(0.0); }

MatrixXd relu_mask(const MatrixXd& z) { return (z.array() > 0.0).cast<double>().matrix(); }

// Adds the bias (stored as a column) to every row.
MatrixXd add_bias(MatrixXd z, const MatrixXd& bias) {
  z.rowwise() += bias.col(0).transpose();
  return z;
}

MatrixXd col_sums(const MatrixXd& d) { return d.colwise().sum().transpose(); }

MatrixXd log_softmax_rows(const MatrixXd& z) {
  MatrixXd out(z.rows(), z.cols());
  for (Eigen::Index b = 0; b < z.rows(); ++b) {
    const double mx = z.row(b).maxCoeff();
    const double lse = mx + std::log((z.row(b).array() - mx).exp().sum());
    out.row(b) = z.row(b).array() - lse;
  }
  return out;
}

std::string step_name(int t, const char* part) {
  return "step" + std::to_string(t) + "." + part;
}

}  // namespace

int DecoderConfig::digits() const {
  return period_hi == 0 ? 1 : static_cast<int>(std::bit_width(period_hi));
}

nlohmann::json to_json(const DecoderConfig& cfg) {
  return {{"n", cfg.n},
          {"feature_width", cfg.width()},
          {"period_lo", cfg.period_lo},
          {"period_hi", cfg.period_hi},
          {"head", cfg.head == HeadKind::kAutoregressive ? "autoregressive" : "flat"},
          {"pooling", cfg.pooling == Pooling::kMean ? "mean" : "sum"},
          {"activation", "relu"},
          {"output_activation", cfg.output_activation},
          {"input_encoding", "pm1"}};
}

DecoderConfig decoder_config_from_json(const nlohmann::json& doc) {
  try {
    DecoderConfig cfg;
    cfg.n = doc.at("n").get<int>();
    cfg.feature_width = doc.at("feature_width").get<int>();
    cfg.period_lo = doc.at("period_lo").get<std::uint64_t>();
    cfg.period_hi = doc.at("period_hi").get<std::uint64_t>();
    const auto head = doc.at("head").get<std::string>();
    if (head != "autoregressive" && head != "flat") throw IoError("unknown head '" + head + "'");
    cfg.head = head == "flat" ? HeadKind::kFlat : HeadKind::kAutoregressive;
    const auto pooling = doc.at("pooling").get<std::string>();
    if (pooling != "mean" && pooling != "sum") throw IoError("unknown pooling '" + pooling + "'");
    cfg.pooling = pooling == "sum" ? Pooling::kSum : Pooling::kMean;
    cfg.output_activation = doc.at("output_activation").get<bool>();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed decoder config: ") + e.what());
  }
}

DecoderModel::DecoderModel(const DecoderConfig& cfg) : cfg_(cfg) {
  check_width(cfg.n);
  if (cfg.n > 16) throw ParameterError("decoder supports n <= 16");
  if (cfg.period_lo < 1 || cfg.period_hi < cfg.period_lo) throw ParameterError("empty candidate period range");
  const int n = cfg.n, f = cfg.width();
  const Eigen::Index dim = Eigen::Index{1} << n;
  inputs_.resize(dim, n);
  for (Eigen::Index x = 0; x < dim; ++x) {
    for (int q = 1; q <= n; ++q) inputs_(x, q - 1) = qubit_bit(static_cast<std::uint64_t>(x), n, q) ? 1.0 : -1.0;
  }
  auto add = [&](std::string name, Eigen::Index rows, Eigen::Index cols) {
    params_.push_back({std::move(name), MatrixXd::Zero(rows, cols)});
  };
  add("phi1.weight", f, n);
  add("phi1.bias", f, 1);
  add("phi2.weight", f, f);
  add("phi2.bias", f, 1);
  add("trunk.weight", f, f);
  add("trunk.bias", f, 1);
  if (cfg.head == HeadKind::kAutoregressive) {
    for (int t = 0; t < cfg.digits(); ++t) {
      add(step_name(t, "hidden.weight"), f, f + t);
      add(step_name(t, "hidden.bias"), f, 1);
      add(step_name(t, "out.weight"), 2, f);
      add(step_name(t, "out.bias"), 2, 1);
    }
  } else {
    add("flat.weight", cfg.candidates(), f);
    add("flat.bias", cfg.candidates(), 1);
  }
}

DecoderModel DecoderModel::random(const DecoderConfig& cfg, std::uint64_t seed) {
  DecoderModel model(cfg);
  Rng rng(seed);
  for (auto& p : model.params_) {
    if (p.value.cols() == 1) continue;  // biases start at zero
    const double bound = std::sqrt(6.0 / static_cast<double>(p.value.cols()));
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.value.cols(); ++j) p.value(i, j) = bound * (2.0 * rng.uniform() - 1.0);
    }
  }
  return model;
}

Parameter& DecoderModel::parameter(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw ParameterError("no parameter named " + name);
}

const Parameter& DecoderModel::parameter(const std::string& name) const {
  return const_cast<DecoderModel*>(this)->parameter(name);
}

std::vector<int> DecoderModel::digits_of(std::uint64_t r) const {
  const int nb = cfg_.digits();
  std::vector<int> d(static_cast<std::size_t>(nb));
  for (int t = 0; t < nb; ++t) d[t] = static_cast<int>((r >> (nb - 1 - t)) & 1u);
  return d;
}

namespace {

// Rows of bag weights: counts / m for mean pooling, raw counts for sum.
MatrixXd bag_weights(const DecoderConfig& cfg, std::span<const Counts* const> bags) {
  const std::size_t dim = std::size_t{1} << cfg.n;
  MatrixXd w(static_cast<Eigen::Index>(bags.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t b = 0; b < bags.size(); ++b) {
    const Counts& c = *bags[b];
    if (c.size() != dim) throw ParameterError("bag histogram width does not match the model's n");
    const double m = std::accumulate(c.begin(), c.end(), 0.0);
    if (m <= 0.0) throw ParameterError("empty bag");
    const double scale = cfg.pooling == Pooling::kMean ? 1.0 / m : 1.0;
    for (std::size_t x = 0; x < dim; ++x) w(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(x)) = c[x] * scale;
  }
  return w;
}

struct Activations {
  MatrixXd weights;  // B x 2^n
  MatrixXd z1, h;    // 2^n x F
  MatrixXd z2;       // 2^n x F, with the output activation
  MatrixXd pooled;   // B x F
  MatrixXd zg, g;    // B x F
};

}  // namespace

Eigen::MatrixXd DecoderModel::aggregate(std::span<const Counts* const> bags) const {
  const MatrixXd w = bag_weights(cfg_, bags);
  const MatrixXd& w1 = parameter("phi1.weight").value;
  const MatrixXd& w2 = parameter("phi2.weight").value;
  const MatrixXd h = relu(add_bias(inputs_ * w1.transpose(), parameter("phi1.bias").value));
  if (cfg_.output_activation) {
    return w * relu(add_bias(h * w2.transpose(), parameter("phi2.bias").value));
  }
  MatrixXd pooled = (w * h) * w2.transpose();
  const VectorXd mass = w.rowwise().sum();
  pooled += mass * parameter("phi2.bias").value.col(0).transpose();
  return pooled;
}

Eigen::MatrixXd DecoderModel::aggregate(const Counts& bag) const {
  const Counts* ptr = &bag;
  return aggregate(std::span<const Counts* const>(&ptr, 1));
}

Eigen::RowVectorXd DecoderModel::aggregate_outcomes(std::span<const std::uint64_t> outcomes) const {
  Counts counts(std::size_t{1} << cfg_.n, 0);
  for (auto x : outcomes) {
    if (x >= counts.size()) throw ParameterError("outcome wider than the model's n");
    ++counts[x];
  }
  return aggregate(counts).row(0);
}

Eigen::MatrixXd DecoderModel::trunk(const Eigen::MatrixXd& pooled) const {
  return relu(add_bias(pooled * parameter("trunk.weight").value.transpose(), parameter("trunk.bias").value));
}

Logits DecoderModel::forward(std::span<const Counts* const> bags, std::span<const std::uint64_t> labels) const {
  const MatrixXd g = trunk(aggregate(bags));
  Logits out;
  if (cfg_.head == HeadKind::kFlat) {
    out.push_back(add_bias(g * parameter("flat.weight").value.transpose(), parameter("flat.bias").value));
    return out;
  }
  if (labels.size() != bags.size()) throw ParameterError("one label per bag is required");
  const int nb = cfg_.digits(), f = cfg_.width();
  const auto batch = static_cast<Eigen::Index>(bags.size());
  MatrixXd u(batch, f + nb);
  u.leftCols(f) = g;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto d = digits_of(labels[b]);
    for (int t = 0; t < nb; ++t) u(b, f + t) = d[t] ? 1.0 : -1.0;
  }
  for (int t = 0; t < nb; ++t) {
    const MatrixXd hs = relu(add_bias(u.leftCols(f + t) * parameter(step_name(t, "hidden.weight")).value.transpose(),
                                      parameter(step_name(t, "hidden.bias")).value));
    out.push_back(add_bias(hs * parameter(step_name(t, "out.weight")).value.transpose(),
                           parameter(step_name(t, "out.bias")).value));
  }
  return out;
}

double DecoderModel::loss_and_gradient(std::span<const Counts* const> bags, std::span<const std::uint64_t> labels,
                                       std::vector<Eigen::MatrixXd>* gradient) const {
  if (bags.empty()) throw ParameterError("empty batch");
  if (labels.size() != bags.size()) throw ParameterError("one label per bag is required");
  for (auto r : labels) {
    if (r < cfg_.period_lo || r > cfg_.period_hi) throw ParameterError("label outside the candidate range");
  }
  const int f = cfg_.width(), nb = cfg_.digits();
  const auto batch = static_cast<Eigen::Index>(bags.size());
  const double inv_b = 1.0 / static_cast<double>(batch);

  // Forward pass, keeping what the backward pass needs.
  const MatrixXd& w1 = parameter("phi1.weight").value;
  const MatrixXd& w2 = parameter("phi2.weight").value;
  const MatrixXd& tw = parameter("trunk.weight").value;
  const MatrixXd w = bag_weights(cfg_, bags);
  const MatrixXd z1 = add_bias(inputs_ * w1.transpose(), parameter("phi1.bias").value);
  const MatrixXd h = relu(z1);
  MatrixXd z2, wh, pooled;
  if (cfg_.output_activation) {
    z2 = add_bias(h * w2.transpose(), parameter("phi2.bias").value);
    pooled = w * relu(z2);
  } else {
    wh = w * h;
    pooled = wh * w2.transpose();
    pooled += w.rowwise().sum() * parameter("phi2.bias").value.col(0).transpose();
  }
  const MatrixXd zg = add_bias(pooled * tw.transpose(), parameter("trunk.bias").value);
  const MatrixXd g = relu(zg);

  std::vector<MatrixXd> grad;
  if (gradient != nullptr) {
    for (const auto& p : params_) grad.push_back(MatrixXd::Zero(p.value.rows(), p.value.cols()));
  }
  auto slot = [&](const std::string& name) -> MatrixXd& {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (params_[i].name == name) return grad[i];
    }
    throw ParameterError("no parameter named " + name);
  };

  double loss = 0.0;
  MatrixXd dg = MatrixXd::Zero(batch, f);
  if (cfg_.head == HeadKind::kFlat) {
    const MatrixXd& cw = parameter("flat.weight").value;
    const MatrixXd logp = log_softmax_rows(add_bias(g * cw.transpose(), parameter("flat.bias").value));
    MatrixXd dl = logp.array().exp().matrix();
    for (Eigen::Index b = 0; b < batch; ++b) {
      const auto k = static_cast<Eigen::Index>(labels[b] - cfg_.period_lo);
      loss -= logp(b, k);
      dl(b, k) -= 1.0;
    }
    dl *= inv_b;
    if (gradient != nullptr) {
      slot("flat.weight") = dl.transpose() * g;
      slot("flat.bias") = col_sums(dl);
      dg = dl * cw;
    }
  } else {
    MatrixXd u(batch, f + nb);
    u.leftCols(f) = g;
    std::vector<std::vector<int>> digits(static_cast<std::size_t>(batch));
    for (Eigen::Index b = 0; b < batch; ++b) {
      digits[b] = digits_of(labels[b]);
      for (int t = 0; t < nb; ++t) u(b, f + t) = digits[b][t] ? 1.0 : -1.0;
    }
    for (int t = 0; t < nb; ++t) {
      const MatrixXd& aw = parameter(step_name(t, "hidden.weight")).value;
      const MatrixXd& ow = parameter(step_name(t, "out.weight")).value;
      const MatrixXd ut = u.leftCols(f + t);
      const MatrixXd zs = add_bias(ut * aw.transpose(), parameter(step_name(t, "hidden.bias")).value);
      const MatrixXd hs = relu(zs);
      const MatrixXd logp = log_softmax_rows(add_bias(hs * ow.transpose(), parameter(step_name(t, "out.bias")).value));
      MatrixXd dl = logp.array().exp().matrix();
      for (Eigen::Index b = 0; b < batch; ++b) {
        loss -= logp(b, digits[b][t]);
        dl(b, digits[b][t]) -= 1.0;
      }
      if (gradient == nullptr) continue;
      dl *= inv_b;
      slot(step_name(t, "out.weight")) = dl.transpose() * hs;
      slot(step_name(t, "out.bias")) = col_sums(dl);
      const MatrixXd dzs = (dl * ow).cwiseProduct(relu_mask(zs));
      slot(step_name(t, "hidden.weight")) = dzs.transpose() * ut;
      slot(step_name(t, "hidden.bias")) = col_sums(dzs);
      // Only the pooled-feature columns carry gradient; the digit inputs are data.
      dg += (dzs * aw).leftCols(f);
    }
  }
  loss *= inv_b;
  if (gradient == nullptr) return loss;

  const MatrixXd dzg = dg.cwiseProduct(relu_mask(zg));
  slot("trunk.weight") = dzg.transpose() * pooled;
  slot("trunk.bias") = col_sums(dzg);
  const MatrixXd dpooled = dzg * tw;
  MatrixXd dh;
  if (cfg_.output_activation) {
    const MatrixXd dz2 = (w.transpose() * dpooled).cwiseProduct(relu_mask(z2));
    slot("phi2.weight") = dz2.transpose() * h;
    slot("phi2.bias") = col_sums(dz2);
    dh = dz2 * w2;
  } else {
    slot("phi2.weight") = dpooled.transpose() * wh;
    slot("phi2.bias") = dpooled.transpose() * w.rowwise().sum();
    dh = w.transpose() * (dpooled * w2);
  }
  const MatrixXd dz1 = dh.cwiseProduct(relu_mask(z1));
  slot("phi1.weight") = dz1.transpose() * inputs_;
  slot("phi1.bias") = col_sums(dz1);
  *gradient = std::move(grad);
  return loss;
}

Eigen::RowVectorXd DecoderModel::step_log_probs(int t, const Eigen::RowVectorXd& g,
                                                const std::vector<int>& prefix) const {
  const int f = cfg_.width();
  RowVectorXd u(f + t);
  u.head(f) = g;
  for (int i = 0; i < t; ++i) u(f + i) = prefix[i] ? 1.0 : -1.0;
  const MatrixXd& aw = parameter(step_name(t, "hidden.weight")).value;
  const MatrixXd& ow = parameter(step_name(t, "out.weight")).value;
  const RowVectorXd hs = (u * aw.transpose() + parameter(step_name(t, "hidden.bias")).value.col(0).transpose())
                             .cwiseMax(0.0);
  const RowVectorXd z = hs * ow.transpose() + parameter(step_name(t, "out.bias")).value.col(0).transpose();
  return log_softmax_rows(z).row(0);
}

std::vector<double> DecoderModel::candidate_log_probs(const Eigen::RowVectorXd& pooled) const {
  const RowVectorXd g = trunk(pooled).row(0);
  std::vector<double> out;
  if (cfg_.head == HeadKind::kFlat) {
    const RowVectorXd z = g * parameter("flat.weight").value.transpose() +
                          parameter("flat.bias").value.col(0).transpose();
    const RowVectorXd lp = log_softmax_rows(z).row(0);
    out.assign(lp.data(), lp.data() + lp.size());
    return out;
  }
  for (std::uint64_t r = cfg_.period_lo; r <= cfg_.period_hi; ++r) {
    const auto d = digits_of(r);
    double lp = 0.0;
    for (int t = 0; t < cfg_.digits(); ++t) lp += step_log_probs(t, g, d)(d[t]);
    out.push_back(lp);
  }
  return out;
}

namespace {

BeamResult rank_all(const DecoderModel& model, const RowVectorXd& pooled, int width, bool fallback) {
  const auto& cfg = model.config();
  const auto lp = model.candidate_log_probs(pooled);
  std::vector<std::size_t> order(lp.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lp[a] > lp[b]; });
  BeamResult res;
  res.fallback = fallback;
  for (std::size_t i = 0; i < order.size() && static_cast<int>(i) < width; ++i) {
    res.candidates.push_back(cfg.period_lo + order[i]);
    res.log_probs.push_back(lp[order[i]]);
  }
  return res;
}

}  // namespace

BeamResult beam_decode_pooled(const DecoderModel& model, const Eigen::RowVectorXd& pooled, int beam_width) {
  if (beam_width < 1) throw ParameterError("beam width must be >= 1");
  const auto& cfg = model.config();
  if (cfg.head == HeadKind::kFlat) return rank_all(model, pooled, beam_width, false);

  struct Beam {
    double lp;
    std::vector<int> seq;
  };
  const RowVectorXd g = model.trunk(pooled).row(0);
  std::vector<Beam> beams{{0.0, {}}};
  for (int t = 0; t < cfg.digits(); ++t) {
    std::vector<Beam> next;
    for (const auto& b : beams) {
      const RowVectorXd lp = model.step_log_probs(t, g, b.seq);
      for (int d = 0; d < 2; ++d) {
        Beam e{b.lp + lp(d), b.seq};
        e.seq.push_back(d);
        next.push_back(std::move(e));
      }
    }
    std::stable_sort(next.begin(), next.end(), [](const Beam& a, const Beam& b) {
      if (a.lp != b.lp) return a.lp > b.lp;
      return a.seq < b.seq;
    });
    if (static_cast<int>(next.size()) > beam_width) next.resize(static_cast<std::size_t>(beam_width));
    beams = std::move(next);
  }
  BeamResult res;
  for (const auto& b : beams) {
    std::uint64_t r = 0;
    for (int d : b.seq) r = (r << 1) | static_cast<std::uint64_t>(d);
    if (r < cfg.period_lo || r > cfg.period_hi) continue;
    res.candidates.push_back(r);
    res.log_probs.push_back(b.lp);
  }
  if (res.candidates.empty()) return rank_all(model, pooled, beam_width, true);
  return res;
}

BeamResult beam_decode(const DecoderModel& model, const Counts& bag, int beam_width) {
  return beam_decode_pooled(model, model.aggregate(bag).row(0), beam_width);
}

Adam::Adam(const std::vector<Parameter>& params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params) {
    m_.push_back(MatrixXd::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(MatrixXd::Zero(p.value.rows(), p.value.cols()));
  }
}

void Adam::step(std::vector<Parameter>& params, const std::vector<Eigen::MatrixXd>& grad) {
  if (grad.size() != params.size() || m_.size() != params.size()) {
    throw ParameterError("gradient does not match the parameter list");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i].cwiseProduct(grad[i]);
    params[i].value.array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

namespace {

void put_le(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

double get_le(std::istream& in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) throw IoError("truncated checkpoint array data");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  nlohmann::json arrays = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& p : ckpt.model.parameters()) {
    arrays.push_back({{"name", p.name}, {"shape", {p.value.rows(), p.value.cols()}}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(p.value.size()) * 8;
  }
  const nlohmann::json meta = {{"schema", Checkpoint::kSchemaVersion},
                               {"format", "hpq-decoder"},
                               {"config", to_json(ckpt.model.config())},
                               {"epoch", ckpt.epoch},
                               {"val_top1", ckpt.val_top1},
                               {"rng_digest", ckpt.rng_digest},
                               {"dtype", "float64-le"},
                               {"order", "row-major"},
                               {"arrays", arrays}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << meta.dump() << '\n';
  for (const auto& p : ckpt.model.parameters()) {
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.value.cols(); ++j) put_le(out, p.value(i, j));
    }
  }
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty checkpoint file " + path.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint metadata is not JSON: ") + e.what());
  }
  try {
    if (meta.at("schema").get<int>() != Checkpoint::kSchemaVersion) throw IoError("unsupported checkpoint schema");
    Checkpoint ckpt{DecoderModel(decoder_config_from_json(meta.at("config"))), meta.at("epoch").get<int>(),
                    meta.at("val_top1").get<double>(), meta.at("rng_digest").get<std::uint64_t>()};
    const auto& arrays = meta.at("arrays");
    auto& params = ckpt.model.parameters();
    if (arrays.size() != params.size()) throw IoError("checkpoint array count does not match the model");
    for (std::size_t k = 0; k < params.size(); ++k) {
      const auto& a = arrays[k];
      auto& p = params[k];
      if (a.at("name").get<std::string>() != p.name || a.at("shape")[0].get<Eigen::Index>() != p.value.rows() ||
          a.at("shape")[1].get<Eigen::Index>() != p.value.cols()) {
        throw IoError("checkpoint array " + a.at("name").get<std::string>() + " does not match the model");
      }
      for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.value.cols(); ++j) p.value(i, j) = get_le(in);
      }
    }
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed checkpoint metadata: ") + e.what());
  } catch (const ParameterError& e) {
    throw IoError(std::string("invalid checkpoint: ") + e.what());
  }
}

}  // namespace hpq
