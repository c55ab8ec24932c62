#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ccbfair/data.hpp"
#include "ccbfair/policy.hpp"

namespace ccbfair {

// Unconstrained logistic regression; the no-fairness reference model.
struct LrParameters {
  std::vector<double> weights;
  double bias = 0.0;

  bool operator==(const LrParameters&) const = default;
};

struct LrOptions {
  std::size_t epochs = 500;
  double learning_rate = 1.0;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

// mean log-loss + l2 * ||w||^2 / 2 (bias unpenalized).
double logistic_loss(const LrParameters& params, std::span<const Example> examples, double l2);

// Gradient of logistic_loss, weights first then bias.
std::vector<double> logistic_loss_gradient(const LrParameters& params, std::span<const Example> examples,
                                           double l2);

// Full-batch gradient descent from a small seeded initialization. A step
// that would raise the loss is retried at half the learning rate, so the
// recorded loss never increases. `loss_trace`, when given, receives the
// loss after every epoch.
LrParameters fit_logistic(std::span<const Example> train, const LrOptions& options,
                          std::vector<double>* loss_trace = nullptr);

// sigmoid(w.x + b); the action is 1 iff the probability is >= 0.5.
std::pair<double, Action> predict_logistic(const LrParameters& params, std::span<const double> x);

std::vector<Action> predict_logistic_all(const LrParameters& params, std::span<const Example> examples);

}  // namespace ccbfair
