#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "ccbfair/data.hpp"
#include "ccbfair/policy.hpp"

namespace ccbfair {

struct TrainingConfig {
  double lambda = 10.0;  // weight of the KL penalty in the reward
  double alpha = 1e-2;   // step size of the gradient ascent
  std::size_t steps = 0;  // 0 selects default_steps(|train|)
  std::size_t hidden_dim = 20;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;  // 0 selects max(steps / 100, 1)

  bool operator==(const TrainingConfig&) const = default;
};

// 100 steps per training example, capped at 2'000'000.
std::size_t default_steps(std::size_t train_size);

// Fills the defaulted fields and validates. Throws ConfigError.
TrainingConfig resolve_config(TrainingConfig config, std::size_t train_size);
void validate_config(const TrainingConfig& config);

// Two bandits: policy0 serves sensitive value 0, policy1 value 1.
struct CcbModel {
  PolicyParameters policy0;
  PolicyParameters policy1;
  TrainingConfig config;
  std::size_t step = 0;  // updates applied so far

  const PolicyParameters& policy(int sensitive) const { return sensitive == 0 ? policy0 : policy1; }
  PolicyParameters& policy(int sensitive) { return sensitive == 0 ? policy0 : policy1; }
  bool operator==(const CcbModel&) const = default;
};

// Both policies start from the same weights, drawn from config.seed.
CcbModel init_model(std::size_t input_dim, const TrainingConfig& config);

struct RewardRecord {
  std::size_t step = 0;  // 1-based
  int sensitive = 0;
  Action action = 0;
  double acc_reward = 0.0;
  double kl = 0.0;
  double reward = 0.0;
  double accumulated = 0.0;
  double grad_norm_sq = 0.0;  // ||reward * grad log pi||^2 of the applied update
};

using RewardLog = std::vector<RewardRecord>;

// KL(p || q) = sum_a p(a) log(p(a) / q(a)).
double kl_divergence(const ActionDistribution& p, const ActionDistribution& q);

// 1[a == y] - lambda * KL(own || other).
double compute_reward(Action a, int label, const ActionDistribution& own,
                      const ActionDistribution& other, double lambda);

// Largest |reward| any step can produce for the given lambda.
double reward_bound(double lambda);

// One bandit round on `example`: sample from the policy of the example's
// group, score the action, and update that policy only. The record's
// accumulated field is accumulated_before + reward.
RewardRecord train_step(CcbModel& model, const Example& example, Rng& rng,
                        double accumulated_before = 0.0);

struct TrainResult {
  std::vector<CcbModel> checkpoints;  // ascending step, last one at config.steps
  RewardLog log;
};

using RewardSink = std::function<void(const RewardRecord&)>;

// Runs config.steps rounds, each on an example drawn uniformly with
// replacement. Deterministic given the config (including seed).
TrainResult train(std::span<const Example> train_examples, const TrainingConfig& config);
TrainResult train(const SplitDataset& dataset, const TrainingConfig& config);

// As train(), but hands every record to `sink` instead of keeping the log.
std::vector<CcbModel> train_streaming(std::span<const Example> train_examples,
                                      const TrainingConfig& config, const RewardSink& sink);

enum class PredictMode { original, reversed, model0, model1 };

std::string_view to_string(PredictMode mode);
PredictMode parse_predict_mode(std::string_view text);

std::pair<Action, ActionDistribution> predict(const CcbModel& model, std::span<const double> x,
                                              int sensitive, PredictMode mode);

// Greedy predictions for every example.
std::vector<Action> predict_all(const CcbModel& model, std::span<const Example> examples,
                                PredictMode mode);

}  // namespace ccbfair
