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
#include <cmath>
#include <filesystem>
#include <cstring>

#include "gtest/gtest.h"

#include "hpq/error.hpp"
#include "hpq/rng.hpp"

using namespace hpq;

namespace {

DecoderConfig small_config(HeadKind head = HeadKind::kAutoregressive) {
  DecoderConfig cfg;
  cfg.n = 4;
  cfg.period_lo = 2;
  cfg.period_hi = 4;
  cfg.head = head;
  return cfg;
}

Counts random_bag(int n, int m, Rng& rng) {
  Counts c(std::size_t{1} << n, 0);
  for (int i = 0; i < m; ++i) ++c[rng.below(c.size())];
  return c;
}

void randomize_biases(DecoderModel& model, Rng& rng) {
  for (auto& p : model.parameters()) {
    if (p.name.ends_with("bias")) {
      for (Eigen::Index k = 0; k < p.value.size(); ++k) p.value.data()[k] = 0.2 * rng.normal();
    }
  }
}

std::vector<const Counts*> pointers(const std::vector<Counts>& bags) {
  std::vector<const Counts*> out;
  for (const auto& b : bags) out.push_back(&b);
  return out;
}

}  // namespace

TEST(decoder, shapes) {
  const DecoderModel model(small_config());
  EXPECT_EQ(model.config().width(), 64);
  EXPECT_EQ(model.config().digits(), 3);
  EXPECT_EQ(model.parameter("phi1.weight").value.rows(), 64);
  EXPECT_EQ(model.parameter("phi1.weight").value.cols(), 4);
  EXPECT_EQ(model.parameter("phi2.weight").value.rows(), 64);
  EXPECT_EQ(model.parameter("step2.hidden.weight").value.cols(), 66);
  EXPECT_EQ(model.parameter("step0.out.weight").value.rows(), 2);
  EXPECT_THROW(model.parameter("nope"), ParameterError);

  DecoderConfig c9;
  c9.n = 9;
  c9.period_lo = 9;
  c9.period_hi = 80;
  EXPECT_EQ(c9.width(), 144);
  EXPECT_EQ(c9.candidates(), 72);
  EXPECT_EQ(c9.digits(), 7);
}

TEST(decoder, config_json_round_trip) {
  auto cfg = small_config(HeadKind::kFlat);
  cfg.pooling = Pooling::kSum;
  cfg.output_activation = false;
  cfg.feature_width = 12;
  const auto back = decoder_config_from_json(to_json(cfg));
  EXPECT_EQ(back.n, cfg.n);
  EXPECT_EQ(back.feature_width, 12);
  EXPECT_EQ(back.period_lo, cfg.period_lo);
  EXPECT_EQ(back.period_hi, cfg.period_hi);
  EXPECT_EQ(back.head, HeadKind::kFlat);
  EXPECT_EQ(back.pooling, Pooling::kSum);
  EXPECT_FALSE(back.output_activation);
}

TEST(decoder, permutation_invariance_is_exact) {
  const auto model = DecoderModel::random(small_config(), 3);
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::uint64_t> bag(50);
    for (auto& x : bag) x = rng.below(16);
    const auto a = model.aggregate_outcomes(bag);
    std::reverse(bag.begin(), bag.end());
    for (std::size_t i = bag.size() - 1; i > 0; --i) std::swap(bag[i], bag[rng.below(i + 1)]);
    const auto b = model.aggregate_outcomes(bag);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(0, std::memcmp(a.data(), b.data(), sizeof(double) * a.size()));
  }
}

TEST(decoder, mean_pooling_scale) {
  const auto model = DecoderModel::random(small_config(), 5);
  const std::vector<std::uint64_t> one{7};
  const std::vector<std::uint64_t> many(1000, 7);
  EXPECT_EQ(model.aggregate_outcomes(one), model.aggregate_outcomes(many));

  auto sum_cfg = small_config();
  sum_cfg.pooling = Pooling::kSum;
  auto summed = DecoderModel::random(sum_cfg, 5);
  const auto a = summed.aggregate_outcomes(one), b = summed.aggregate_outcomes(many);
  for (Eigen::Index k = 0; k < a.size(); ++k) EXPECT_NEAR(b(k), 1000 * a(k), 1e-9 * std::max(1.0, b(k)));
}

TEST(decoder, zero_weights_give_bias_logits) {
  for (auto head : {HeadKind::kAutoregressive, HeadKind::kFlat}) {
    DecoderModel model(small_config(head));
    Rng rng(6);
    randomize_biases(model, rng);
    const std::vector<Counts> bags{random_bag(4, 9, rng), random_bag(4, 3, rng)};
    const auto ptrs = pointers(bags);
    const std::vector<std::uint64_t> labels{2, 4};
    const auto logits = model.forward(ptrs, labels);
    for (std::size_t t = 0; t < logits.size(); ++t) {
      const std::string name = head == HeadKind::kFlat ? "flat.bias" : "step" + std::to_string(t) + ".out.bias";
      const auto& bias = model.parameter(name).value;
      for (Eigen::Index b = 0; b < logits[t].rows(); ++b) {
        for (Eigen::Index k = 0; k < logits[t].cols(); ++k) EXPECT_EQ(logits[t](b, k), bias(k, 0));
      }
    }
  }
}

static void check_gradient(HeadKind head, bool output_activation) {
  auto cfg = small_config(head);
  cfg.output_activation = output_activation;
  int checked = 0, bad = 0;
  for (std::uint64_t draw = 0; draw < 100; ++draw) {
    auto model = DecoderModel::random(cfg, draw);
    Rng rng(1000 + draw);
    randomize_biases(model, rng);
    std::vector<Counts> bags;
    std::vector<std::uint64_t> labels;
    for (int b = 0; b < 3; ++b) {
      bags.push_back(random_bag(4, 8, rng));
      labels.push_back(cfg.period_lo + rng.below(cfg.candidates()));
    }
    const auto ptrs = pointers(bags);
    std::vector<Eigen::MatrixXd> grad;
    model.loss_and_gradient(ptrs, labels, &grad);
    ASSERT_EQ(grad.size(), model.parameters().size());
    for (std::size_t p = 0; p < grad.size(); ++p) {
      auto& value = model.parameters()[p].value;
      for (int probe = 0; probe < 3; ++probe) {
        const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(value.size())));
        const double saved = value.data()[k];
        const double h = 1e-6 * std::max(1.0, std::abs(saved));
        value.data()[k] = saved + h;
        const double up = model.loss_and_gradient(ptrs, labels, nullptr);
        value.data()[k] = saved - h;
        const double down = model.loss_and_gradient(ptrs, labels, nullptr);
        value.data()[k] = saved;
        const double fd = (up - down) / (2 * h);
        const double an = grad[p].data()[k];
        ++checked;
        if (std::abs(fd - an) > 1e-4 * std::max(std::abs(fd), std::abs(an)) + 1e-8) ++bad;
      }
    }
  }
  // A probe may straddle a ReLU kink; those are rare and excluded by count.
  EXPECT_LE(bad, checked / 200) << bad << " of " << checked;
}

TEST(decoder, gradient_autoregressive_relu_out) { check_gradient(HeadKind::kAutoregressive, true); }

TEST(decoder, gradient_autoregressive_linear_out) { check_gradient(HeadKind::kAutoregressive, false); }

TEST(decoder, gradient_flat_relu_out) { check_gradient(HeadKind::kFlat, true); }

TEST(decoder, gradient_flat_linear_out) { check_gradient(HeadKind::kFlat, false); }

TEST(decoder, loss_is_summed_digit_cross_entropy) {
  auto model = DecoderModel::random(small_config(), 9);
  Rng rng(2);
  randomize_biases(model, rng);
  const std::vector<Counts> bags{random_bag(4, 8, rng), random_bag(4, 8, rng)};
  const auto ptrs = pointers(bags);
  const std::vector<std::uint64_t> labels{3, 4};
  const auto logits = model.forward(ptrs, labels);
  double oracle = 0;
  for (std::size_t b = 0; b < 2; ++b) {
    const auto d = model.digits_of(labels[b]);
    for (std::size_t t = 0; t < logits.size(); ++t) {
      const double z0 = logits[t](b, 0), z1 = logits[t](b, 1);
      const double mx = std::max(z0, z1);
      const double lse = mx + std::log(std::exp(z0 - mx) + std::exp(z1 - mx));
      oracle += lse - (d[t] ? z1 : z0);
    }
  }
  EXPECT_NEAR(model.loss_and_gradient(ptrs, labels, nullptr), oracle / 2, 1e-12);
  EXPECT_THROW(model.loss_and_gradient(ptrs, std::vector<std::uint64_t>{1, 4}, nullptr), ParameterError);
}

TEST(decoder, adam_step_decreases_loss) {
  auto model = DecoderModel::random(small_config(), 12);
  Rng rng(13);
  std::vector<Counts> bags;
  std::vector<std::uint64_t> labels;
  for (int b = 0; b < 8; ++b) {
    bags.push_back(random_bag(4, 16, rng));
    labels.push_back(2 + b % 3);
  }
  const auto ptrs = pointers(bags);
  std::vector<Eigen::MatrixXd> grad;
  const double before = model.loss_and_gradient(ptrs, labels, &grad);
  Adam adam(model.parameters(), 1e-3);
  adam.step(model.parameters(), grad);
  EXPECT_LT(model.loss_and_gradient(ptrs, labels, nullptr), before);
}

TEST(decoder, beam_width_one_is_greedy) {
  auto cfg = small_config();
  cfg.period_lo = 1;
  cfg.period_hi = 7;
  Rng rng(21);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto model = DecoderModel::random(cfg, seed);
    randomize_biases(model, rng);
    const auto bag = random_bag(4, 16, rng);
    const Eigen::RowVectorXd g = model.trunk(model.aggregate(bag)).row(0);
    std::vector<int> prefix;
    for (int t = 0; t < cfg.digits(); ++t) {
      const auto lp = model.step_log_probs(t, g, prefix);
      prefix.push_back(lp(1) > lp(0) ? 1 : 0);
    }
    std::uint64_t r = 0;
    for (int d : prefix) r = (r << 1) | static_cast<std::uint64_t>(d);
    const auto res = beam_decode(model, bag, 1);
    if (r == 0) {
      EXPECT_TRUE(res.fallback);
    } else {
      ASSERT_EQ(res.candidates.size(), 1u);
      EXPECT_EQ(res.candidates[0], r);
    }
  }
}

TEST(decoder, saturated_beam_is_exhaustive) {
  const auto cfg = small_config();
  Rng rng(31);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto model = DecoderModel::random(cfg, seed);
    randomize_biases(model, rng);
    const auto bag = random_bag(4, 16, rng);
    const auto res = beam_decode(model, bag, 1 << cfg.digits());
    const auto lp = model.candidate_log_probs(model.aggregate(bag).row(0));
    std::vector<std::pair<double, std::uint64_t>> ranked;
    for (std::size_t i = 0; i < lp.size(); ++i) ranked.push_back({-lp[i], cfg.period_lo + i});
    std::sort(ranked.begin(), ranked.end());
    ASSERT_EQ(res.candidates.size(), ranked.size());
    EXPECT_FALSE(res.fallback);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      EXPECT_EQ(res.candidates[i], ranked[i].second);
      EXPECT_NEAR(res.log_probs[i], -ranked[i].first, 1e-12);
    }
    EXPECT_EQ(res.candidates, beam_decode(model, bag, 1 << cfg.digits()).candidates);
  }
}

TEST(decoder, fallback_stays_in_range) {
  auto cfg = small_config();
  cfg.period_lo = 5;
  cfg.period_hi = 5;
  DecoderModel model(cfg);
  // Push every digit toward 0 so the only beam decodes to 0.
  for (int t = 0; t < cfg.digits(); ++t) model.parameter("step" + std::to_string(t) + ".out.bias").value(0, 0) = 5;
  Rng rng(1);
  const auto res = beam_decode(model, random_bag(4, 4, rng), 1);
  EXPECT_TRUE(res.fallback);
  EXPECT_EQ(res.candidates, std::vector<std::uint64_t>{5});
  EXPECT_THROW(beam_decode(model, random_bag(4, 4, rng), 0), ParameterError);
}

TEST(decoder, checkpoint_round_trip_is_bit_exact) {
  for (auto head : {HeadKind::kAutoregressive, HeadKind::kFlat}) {
    auto model = DecoderModel::random(small_config(head), 77);
    Rng rng(78);
    randomize_biases(model, rng);
    const auto path = std::filesystem::path(::testing::TempDir()) / "model.ckpt";
    save_checkpoint({model, 4, 0.875, 0xabcdefu}, path);
    const auto back = load_checkpoint(path);
    EXPECT_EQ(back.epoch, 4);
    EXPECT_EQ(back.val_top1, 0.875);
    EXPECT_EQ(back.rng_digest, 0xabcdefu);
    const std::vector<Counts> bags{random_bag(4, 20, rng)};
    const auto ptrs = pointers(bags);
    const std::vector<std::uint64_t> labels{3};
    const auto a = model.forward(ptrs, labels), b = back.model.forward(ptrs, labels);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
      ASSERT_EQ(0, std::memcmp(a[t].data(), b[t].data(), sizeof(double) * a[t].size()));
    }
  }
  EXPECT_THROW(load_checkpoint("/nonexistent/model.ckpt"), IoError);
}

TEST(decoder, rejects_mismatched_bags) {
  const DecoderModel model(small_config());
  EXPECT_THROW(model.aggregate(Counts(8, 1)), ParameterError);
  EXPECT_THROW(model.aggregate(Counts(16, 0)), ParameterError);
  const std::vector<std::uint64_t> wide{16};
  EXPECT_THROW(model.aggregate_outcomes(wide), ParameterError);
}
