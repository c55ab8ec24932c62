#include "ccbfair/ccb.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccbfair/error.hpp"

namespace ccbfair {

std::size_t default_steps(std::size_t train_size) {
  return std::min<std::size_t>(100 * train_size, 2'000'000);
}

void validate_config(const TrainingConfig& c) {
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw ConfigError("lambda must be >= 0");
  if (!(c.alpha > 0.0) || !std::isfinite(c.alpha)) throw ConfigError("alpha must be > 0");
  if (c.steps < 1) throw ConfigError("steps must be >= 1");
  if (c.hidden_dim < 1) throw ConfigError("hidden dimension must be >= 1");
  if (c.checkpoint_every < 1 || c.checkpoint_every > c.steps) {
    throw ConfigError("checkpoint_every must lie in [1, steps]");
  }
}

TrainingConfig resolve_config(TrainingConfig c, std::size_t train_size) {
  if (c.steps == 0) c.steps = default_steps(train_size);
  if (c.checkpoint_every == 0) c.checkpoint_every = std::max<std::size_t>(c.steps / 100, 1);
  validate_config(c);
  return c;
}

CcbModel init_model(std::size_t input_dim, const TrainingConfig& config) {
  CcbModel m;
  m.config = config;
  // Both bandits start from the same draw, so the KL penalty starts at zero.
  m.policy0 = init_policy(input_dim, config.hidden_dim, derive_seed(config.seed, 1));
  m.policy1 = m.policy0;
  return m;
}

double kl_divergence(const ActionDistribution& p, const ActionDistribution& q) {
  double kl = 0.0;
  for (std::size_t a = 0; a < kNumActions; ++a) kl += p.probs[a] * std::log(p.probs[a] / q.probs[a]);
  // Rounding can leave a tiny negative value for near-identical inputs.
  return kl > 0.0 ? kl : 0.0;
}

double compute_reward(Action a, int label, const ActionDistribution& own,
                      const ActionDistribution& other, double lambda) {
  const double acc = a == label ? 1.0 : 0.0;
  return acc - lambda * kl_divergence(own, other);
}

double reward_bound(double lambda) { return 1.0 + lambda * -std::log(kProbClamp); }

RewardRecord train_step(CcbModel& model, const Example& example, Rng& rng, double accumulated_before) {
  if (example.sensitive != 0 && example.sensitive != 1) {
    throw ConfigError("train_step: sensitive attribute must be 0 or 1");
  }
  const int s = example.sensitive;
  PolicyParameters& own_policy = model.policy(s);
  const ActionDistribution own = action_distribution(own_policy, example.features);
  const ActionDistribution other = action_distribution(model.policy(1 - s), example.features);

  RewardRecord rec;
  rec.step = model.step + 1;
  rec.sensitive = s;
  rec.action = sample_action(own, rng);
  rec.acc_reward = rec.action == example.label ? 1.0 : 0.0;
  rec.kl = kl_divergence(own, other);
  rec.reward = rec.acc_reward - model.config.lambda * rec.kl;
  rec.accumulated = accumulated_before + rec.reward;

  // The KL term only scales the update; no gradient flows through it.
  rec.grad_norm_sq =
      apply_policy_gradient(own_policy, example.features, rec.action, rec.reward, model.config.alpha);
  model.step += 1;
  return rec;
}

std::vector<CcbModel> train_streaming(std::span<const Example> examples, const TrainingConfig& config,
                                      const RewardSink& sink) {
  if (examples.empty()) throw ConfigError("train: empty training split");
  validate_config(config);
  const std::size_t input_dim = examples.front().features.size();
  for (const auto& ex : examples) {
    if (ex.features.size() != input_dim) throw ConfigError("train: inconsistent feature dimension");
  }

  CcbModel model = init_model(input_dim, config);
  Rng rng(derive_seed(config.seed, 0));
  std::vector<CcbModel> checkpoints;
  double accumulated = 0.0;
  for (std::size_t t = 1; t <= config.steps; ++t) {
    const Example& ex = examples[rng.below(examples.size())];
    RewardRecord rec;
    try {
      rec = train_step(model, ex, rng, accumulated);
    } catch (const NumericError& e) {
      throw NumericError("train: step " + std::to_string(t) + " (lambda=" + std::to_string(config.lambda) +
                         ", alpha=" + std::to_string(config.alpha) + "): " + e.what());
    }
    accumulated = rec.accumulated;
    if (sink) sink(rec);
    if (t % config.checkpoint_every == 0 || t == config.steps) checkpoints.push_back(model);
  }
  return checkpoints;
}

TrainResult train(std::span<const Example> examples, const TrainingConfig& config) {
  TrainResult out;
  out.log.reserve(config.steps);
  out.checkpoints = train_streaming(examples, config, [&](const RewardRecord& r) { out.log.push_back(r); });
  return out;
}

TrainResult train(const SplitDataset& dataset, const TrainingConfig& config) {
  return train(std::span<const Example>(dataset.train), config);
}

std::string_view to_string(PredictMode mode) {
  switch (mode) {
    case PredictMode::original: return "original";
    case PredictMode::reversed: return "reversed";
    case PredictMode::model0: return "model0";
    case PredictMode::model1: return "model1";
  }
  return "?";
}

PredictMode parse_predict_mode(std::string_view text) {
  if (text == "original") return PredictMode::original;
  if (text == "reversed") return PredictMode::reversed;
  if (text == "model0") return PredictMode::model0;
  if (text == "model1") return PredictMode::model1;
  throw ConfigError("invalid predict mode '" + std::string(text) + "'");
}

std::pair<Action, ActionDistribution> predict(const CcbModel& model, std::span<const double> x,
                                              int sensitive, PredictMode mode) {
  if (sensitive != 0 && sensitive != 1) throw ConfigError("predict: sensitive attribute must be 0 or 1");
  const PolicyParameters* policy = nullptr;
  switch (mode) {
    case PredictMode::original: policy = &model.policy(sensitive); break;
    case PredictMode::reversed: policy = &model.policy(1 - sensitive); break;
    case PredictMode::model0: policy = &model.policy0; break;
    case PredictMode::model1: policy = &model.policy1; break;
  }
  if (!policy) throw ConfigError("predict: invalid mode");
  const ActionDistribution dist = action_distribution(*policy, x);
  return {greedy_action(dist), dist};
}

std::vector<Action> predict_all(const CcbModel& model, std::span<const Example> examples, PredictMode mode) {
  std::vector<Action> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(predict(model, ex.features, ex.sensitive, mode).first);
  return out;
}

}  // namespace ccbfair
