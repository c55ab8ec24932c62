#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ccbfair/rng.hpp"

namespace ccbfair {

using Action = int;

inline constexpr std::size_t kNumActions = 2;
// Lower bound on every action probability. Bounds |log pi| by -log(1e-6)
// and with it the KL term of the reward.
inline constexpr double kProbClamp = 1e-6;

// One-hidden-layer ReLU scorer. The a-th output is the preference score of
// action a; the policy is the softmax of the scores.
//
//   h = relu(w1 x + b1),   scores = w2 h + b2
//
// Matrices are row-major: w1 is hidden_dim x input_dim, w2 is
// kNumActions x hidden_dim.
struct PolicyParameters {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::uint64_t seed = 0;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  std::vector<double> b2;

  bool operator==(const PolicyParameters&) const = default;
};

// Same shape as the parameters it differentiates.
using Gradient = PolicyParameters;

struct ActionDistribution {
  std::array<double, kNumActions> probs{0.5, 0.5};
};

// Glorot-uniform weights, zero biases.
PolicyParameters init_policy(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed);

// Parameters with every entry zero; the policy is uniform everywhere.
PolicyParameters zero_policy(std::size_t input_dim, std::size_t hidden_dim);

std::array<double, kNumActions> scores(const PolicyParameters& params, std::span<const double> x);

// Softmax, then each probability clamped to [kProbClamp, 1 - kProbClamp]
// and the vector renormalized.
ActionDistribution distribution_from_scores(const std::array<double, kNumActions>& scores);

ActionDistribution action_distribution(const PolicyParameters& params, std::span<const double> x);

Action sample_action(const ActionDistribution& dist, Rng& rng);

// Argmax; an exact tie goes to action 0.
Action greedy_action(const ActionDistribution& dist);
Action greedy_action(const PolicyParameters& params, std::span<const double> x);

// Gradient of log softmax(scores)[a] with respect to every parameter.
Gradient log_prob_gradient(const PolicyParameters& params, std::span<const double> x, Action a);

// params + step * reward * log_prob_gradient(params, x, a).
PolicyParameters policy_gradient_step(const PolicyParameters& params, std::span<const double> x,
                                      Action a, double reward, double step);

// In-place form of policy_gradient_step. Returns the squared L2 norm of
// reward * log_prob_gradient, the stochastic gradient that was applied.
double apply_policy_gradient(PolicyParameters& params, std::span<const double> x, Action a,
                             double reward, double step);

double squared_norm(const PolicyParameters& p);
bool all_finite(const PolicyParameters& p);
std::size_t parameter_count(const PolicyParameters& p);

// Flat views in the order w1, b1, w2, b2; used by tests and serialization.
std::vector<double> flatten(const PolicyParameters& p);
void unflatten(std::span<const double> flat, PolicyParameters& p);

}  // namespace ccbfair
