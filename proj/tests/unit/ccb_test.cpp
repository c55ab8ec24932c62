#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ccbfair/ccb.hpp"
#include "ccbfair/error.hpp"
#include "synthetic.hpp"

using namespace ccbfair;

namespace {

std::vector<Example> small_data(std::uint64_t seed = 7) {
  return testkit::make_synthetic({.n = 400, .dim = 4, .seed = seed});
}

TrainingConfig small_config(double lambda, std::size_t steps = 3000) {
  TrainingConfig c;
  c.lambda = lambda;
  c.steps = steps;
  c.hidden_dim = 6;
  c.seed = 3;
  return resolve_config(c, 400);
}

}  // namespace

TEST(Kl, KnownValueAndBasicProperties) {
  const ActionDistribution p{{0.5, 0.5}}, q{{0.25, 0.75}};
  const double expected = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  EXPECT_NEAR(kl_divergence(p, q), expected, 1e-15);
  EXPECT_NEAR(kl_divergence(p, q), 0.143841, 1e-6);
  EXPECT_EQ(kl_divergence(q, q), 0.0);
  EXPECT_NE(kl_divergence(p, q), kl_divergence(q, p));
}

TEST(Kl, NonNegativeSweep) {
  for (int i = 1; i < 200; ++i)
    for (int j = 1; j < 200; j += 7) {
      const double a = i / 200.0, b = j / 200.0;
      ASSERT_GE(kl_divergence({{a, 1 - a}}, {{b, 1 - b}}), 0.0);
    }
}

TEST(Reward, AccuracyMinusPenalty) {
  const ActionDistribution p{{0.5, 0.5}}, q{{0.25, 0.75}};
  EXPECT_DOUBLE_EQ(compute_reward(1, 1, p, q, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(compute_reward(0, 1, p, q, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(compute_reward(1, 1, p, q, 10.0), 1.0 - 10.0 * kl_divergence(p, q));
  EXPECT_DOUBLE_EQ(compute_reward(0, 0, p, p, 50.0), 1.0);
}

TEST(Reward, BoundHoldsAtTheClampLimit) {
  const ActionDistribution lo{{kProbClamp, 1 - kProbClamp}}, hi{{1 - kProbClamp, kProbClamp}};
  for (double lambda : {0.0, 1.0, 10.0, 100.0}) {
    EXPECT_LE(std::abs(compute_reward(0, 1, lo, hi, lambda)), reward_bound(lambda));
  }
  EXPECT_DOUBLE_EQ(reward_bound(0.0), 1.0);
}

TEST(Config, DefaultsAndValidation) {
  TrainingConfig c;
  const auto r = resolve_config(c, 31655);
  EXPECT_EQ(r.steps, 2'000'000u);
  EXPECT_EQ(r.checkpoint_every, 20'000u);
  EXPECT_EQ(resolve_config(c, 700).steps, 70'000u);
  EXPECT_EQ(resolve_config(c, 700).checkpoint_every, 700u);
  c.steps = 50;
  EXPECT_EQ(resolve_config(c, 10).checkpoint_every, 1u);
  TrainingConfig bad = small_config(1.0);
  bad.alpha = 0.0;
  EXPECT_THROW(validate_config(bad), ConfigError);
  bad = small_config(1.0);
  bad.lambda = -1.0;
  EXPECT_THROW(validate_config(bad), ConfigError);
  bad = small_config(1.0);
  bad.checkpoint_every = bad.steps + 1;
  EXPECT_THROW(validate_config(bad), ConfigError);
}

TEST(Init, PoliciesStartIdentical) {
  const auto m = init_model(5, small_config(10.0));
  EXPECT_EQ(m.policy0, m.policy1);
  EXPECT_EQ(m.step, 0u);
}

TEST(TrainStep, OnlyTheSampledGroupMoves) {
  const auto data = small_data();
  auto model = init_model(4, small_config(10.0));
  Rng rng(1);
  for (std::size_t t = 0; t < 2000; ++t) {
    const Example& ex = data[t % data.size()];
    const auto before = model;
    const auto rec = train_step(model, ex, rng);
    const auto& idle = ex.sensitive == 0 ? model.policy1 : model.policy0;
    const auto& idle_before = ex.sensitive == 0 ? before.policy1 : before.policy0;
    ASSERT_EQ(idle, idle_before);
    ASSERT_EQ(rec.sensitive, ex.sensitive);
    ASSERT_EQ(model.step, before.step + 1);
  }
}

TEST(TrainStep, RejectsNonBinarySensitive) {
  auto model = init_model(4, small_config(1.0));
  Example ex = small_data()[0];
  ex.sensitive = 2;
  Rng rng(1);
  EXPECT_THROW(train_step(model, ex, rng), ConfigError);
}

TEST(Train, LogBookkeeping) {
  const auto data = small_data();
  const auto config = small_config(10.0);
  const auto r = train(data, config);
  ASSERT_EQ(r.log.size(), config.steps);
  double prefix = 0.0;
  for (std::size_t t = 0; t < r.log.size(); ++t) {
    const auto& rec = r.log[t];
    prefix += rec.reward;
    ASSERT_EQ(rec.step, t + 1);
    ASSERT_EQ(rec.accumulated, prefix);
    ASSERT_DOUBLE_EQ(rec.reward, rec.acc_reward - config.lambda * rec.kl);
    ASSERT_LE(std::abs(rec.reward), reward_bound(config.lambda));
    ASSERT_GE(rec.kl, 0.0);
    ASSERT_TRUE(rec.action == 0 || rec.action == 1);
  }
}

TEST(Train, CheckpointCadence) {
  const auto data = small_data();
  auto config = small_config(1.0, 1000);
  config.checkpoint_every = 300;
  const auto r = train(data, config);
  std::vector<std::size_t> steps;
  for (const auto& m : r.checkpoints) steps.push_back(m.step);
  EXPECT_EQ(steps, (std::vector<std::size_t>{300, 600, 900, 1000}));
  EXPECT_EQ(r.checkpoints.back().config, config);
}

TEST(Train, DeterministicAndStreamingAgrees) {
  const auto data = small_data();
  const auto config = small_config(20.0);
  const auto a = train(data, config);
  const auto b = train(data, config);
  EXPECT_EQ(a.checkpoints, b.checkpoints);
  std::vector<double> rewards;
  const auto c = train_streaming(data, config, [&](const RewardRecord& r) { rewards.push_back(r.reward); });
  EXPECT_EQ(c, a.checkpoints);
  ASSERT_EQ(rewards.size(), a.log.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) ASSERT_EQ(rewards[i], a.log[i].reward);
  auto other = config;
  other.seed = 4;
  EXPECT_NE(train(data, other).checkpoints.back(), a.checkpoints.back());
}

TEST(Train, ZeroLambdaIgnoresTheOtherPolicy) {
  // With lambda = 0 the reward is pure accuracy, so the KL never feeds back.
  const auto data = small_data();
  const auto r = train(data, small_config(0.0));
  for (const auto& rec : r.log) ASSERT_EQ(rec.reward, rec.acc_reward);
}

TEST(Train, Errors) {
  const auto config = small_config(1.0);
  EXPECT_THROW(train(std::vector<Example>{}, config), ConfigError);
  auto data = small_data();
  data[5].features.push_back(0.0);
  EXPECT_THROW(train(data, config), ConfigError);
}

TEST(Predict, ModesSelectTheRightPolicy) {
  const auto data = small_data();
  const auto model = train(data, small_config(0.0, 4000)).checkpoints.back();
  ASSERT_NE(model.policy0, model.policy1);
  for (const auto& ex : data) {
    const auto& x = ex.features;
    const auto orig1 = predict(model, x, 1, PredictMode::original);
    const auto m1 = predict(model, x, 1, PredictMode::model1);
    ASSERT_EQ(orig1.first, m1.first);
    ASSERT_EQ(orig1.second.probs, m1.second.probs);
    ASSERT_EQ(predict(model, x, 0, PredictMode::reversed).second.probs, m1.second.probs);
    ASSERT_EQ(predict(model, x, 0, PredictMode::model0).second.probs,
              predict(model, x, 1, PredictMode::model0).second.probs);
    ASSERT_EQ(predict(model, x, 0, PredictMode::original).second.probs,
              action_distribution(model.policy0, x).probs);
  }
  EXPECT_THROW(predict(model, data[0].features, 3, PredictMode::original), ConfigError);
}

TEST(Predict, ModeNames) {
  for (auto m : {PredictMode::original, PredictMode::reversed, PredictMode::model0, PredictMode::model1}) {
    EXPECT_EQ(parse_predict_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_predict_mode("both"), ConfigError);
}
