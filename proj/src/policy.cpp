#include "ccbfair/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccbfair/error.hpp"

namespace ccbfair {
namespace {

void check_input(const PolicyParameters& params, std::span<const double> x) {
  if (x.size() != params.input_dim) {
    throw ConfigError("policy: input has dimension " + std::to_string(x.size()) + ", expected " +
                      std::to_string(params.input_dim));
  }
}

void fill_uniform(std::vector<double>& w, double bound, Rng& rng) {
  for (auto& v : w) v = rng.uniform(-bound, bound);
}

// Forward pass keeping the hidden pre-activations for backprop.
struct Forward {
  std::vector<double> pre;
  std::vector<double> hidden;
  std::array<double, kNumActions> scores{};
};

Forward forward(const PolicyParameters& p, std::span<const double> x) {
  Forward f;
  f.pre.resize(p.hidden_dim);
  f.hidden.resize(p.hidden_dim);
  for (std::size_t j = 0; j < p.hidden_dim; ++j) {
    const double* row = p.w1.data() + j * p.input_dim;
    double acc = p.b1[j];
    for (std::size_t k = 0; k < p.input_dim; ++k) acc += row[k] * x[k];
    f.pre[j] = acc;
    f.hidden[j] = acc > 0.0 ? acc : 0.0;
  }
  for (std::size_t a = 0; a < kNumActions; ++a) {
    const double* row = p.w2.data() + a * p.hidden_dim;
    double acc = p.b2[a];
    for (std::size_t j = 0; j < p.hidden_dim; ++j) acc += row[j] * f.hidden[j];
    f.scores[a] = acc;
  }
  return f;
}

std::array<double, kNumActions> softmax(const std::array<double, kNumActions>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  std::array<double, kNumActions> p{};
  double sum = 0.0;
  for (std::size_t a = 0; a < kNumActions; ++a) {
    p[a] = std::exp(z[a] - m);
    sum += p[a];
  }
  for (auto& v : p) v /= sum;
  return p;
}

// Backprop of log softmax(scores)[a]. score_delta = e_a - pi,
// pre_delta = relu'(pre) * w2^T score_delta. The ReLU derivative at exactly
// zero is taken as 0.
struct Deltas {
  std::array<double, kNumActions> score_delta{};
  std::vector<double> pre_delta;
};

Deltas backward(const PolicyParameters& p, const Forward& f, Action a) {
  Deltas d;
  const auto pi = softmax(f.scores);
  for (std::size_t b = 0; b < kNumActions; ++b) {
    d.score_delta[b] = (static_cast<std::size_t>(a) == b ? 1.0 : 0.0) - pi[b];
  }
  d.pre_delta.assign(p.hidden_dim, 0.0);
  for (std::size_t j = 0; j < p.hidden_dim; ++j) {
    if (f.pre[j] <= 0.0) continue;
    double acc = 0.0;
    for (std::size_t b = 0; b < kNumActions; ++b) acc += p.w2[b * p.hidden_dim + j] * d.score_delta[b];
    d.pre_delta[j] = acc;
  }
  return d;
}

void check_action(Action a) {
  if (a < 0 || static_cast<std::size_t>(a) >= kNumActions) {
    throw ConfigError("policy: invalid action " + std::to_string(a));
  }
}

}  // namespace

PolicyParameters init_policy(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed) {
  if (input_dim == 0 || hidden_dim == 0) throw ConfigError("init_policy: dimensions must be >= 1");
  PolicyParameters p = zero_policy(input_dim, hidden_dim);
  p.seed = seed;
  Rng rng(seed);
  fill_uniform(p.w1, std::sqrt(6.0 / static_cast<double>(input_dim + hidden_dim)), rng);
  fill_uniform(p.w2, std::sqrt(6.0 / static_cast<double>(hidden_dim + kNumActions)), rng);
  return p;
}

PolicyParameters zero_policy(std::size_t input_dim, std::size_t hidden_dim) {
  if (input_dim == 0 || hidden_dim == 0) throw ConfigError("zero_policy: dimensions must be >= 1");
  PolicyParameters p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.w1.assign(hidden_dim * input_dim, 0.0);
  p.b1.assign(hidden_dim, 0.0);
  p.w2.assign(kNumActions * hidden_dim, 0.0);
  p.b2.assign(kNumActions, 0.0);
  return p;
}

std::array<double, kNumActions> scores(const PolicyParameters& params, std::span<const double> x) {
  check_input(params, x);
  return forward(params, x).scores;
}

ActionDistribution distribution_from_scores(const std::array<double, kNumActions>& z) {
  for (double v : z) {
    if (!std::isfinite(v)) throw NumericError("policy: non-finite action score");
  }
  ActionDistribution d;
  d.probs = softmax(z);
  double sum = 0.0;
  for (auto& v : d.probs) {
    v = std::clamp(v, kProbClamp, 1.0 - kProbClamp);
    sum += v;
  }
  for (auto& v : d.probs) v /= sum;
  return d;
}

ActionDistribution action_distribution(const PolicyParameters& params, std::span<const double> x) {
  check_input(params, x);
  for (double v : x) {
    if (!std::isfinite(v)) throw ConfigError("policy: non-finite input");
  }
  return distribution_from_scores(forward(params, x).scores);
}

Action sample_action(const ActionDistribution& dist, Rng& rng) {
  return rng.uniform01() < dist.probs[1] ? 1 : 0;
}

Action greedy_action(const ActionDistribution& dist) { return dist.probs[1] > dist.probs[0] ? 1 : 0; }

Action greedy_action(const PolicyParameters& params, std::span<const double> x) {
  return greedy_action(action_distribution(params, x));
}

Gradient log_prob_gradient(const PolicyParameters& params, std::span<const double> x, Action a) {
  check_input(params, x);
  check_action(a);
  const Forward f = forward(params, x);
  const Deltas d = backward(params, f, a);

  Gradient g = zero_policy(params.input_dim, params.hidden_dim);
  g.seed = params.seed;
  for (std::size_t j = 0; j < params.hidden_dim; ++j) {
    const double dj = d.pre_delta[j];
    g.b1[j] = dj;
    if (dj == 0.0) continue;
    double* row = g.w1.data() + j * params.input_dim;
    for (std::size_t k = 0; k < params.input_dim; ++k) row[k] = dj * x[k];
  }
  for (std::size_t b = 0; b < kNumActions; ++b) {
    g.b2[b] = d.score_delta[b];
    double* row = g.w2.data() + b * params.hidden_dim;
    for (std::size_t j = 0; j < params.hidden_dim; ++j) row[j] = d.score_delta[b] * f.hidden[j];
  }
  return g;
}

double apply_policy_gradient(PolicyParameters& params, std::span<const double> x, Action a,
                             double reward, double step) {
  check_input(params, x);
  check_action(a);
  if (!std::isfinite(reward)) throw NumericError("policy_gradient_step: non-finite reward");
  if (!(step >= 0.0) || !std::isfinite(step)) {
    throw ConfigError("policy_gradient_step: step size must be finite and non-negative");
  }

  const Forward f = forward(params, x);
  const Deltas d = backward(params, f, a);

  // Squared norm of the applied stochastic gradient reward * grad log pi.
  double x_sq = 0.0;
  for (double v : x) x_sq += v * v;
  double h_sq = 0.0;
  for (double v : f.hidden) h_sq += v * v;
  double pre_sq = 0.0;
  for (double v : d.pre_delta) pre_sq += v * v;
  double score_sq = 0.0;
  for (double v : d.score_delta) score_sq += v * v;
  const double grad_sq = reward * reward * (pre_sq * (x_sq + 1.0) + score_sq * (h_sq + 1.0));

  const double scale = step * reward;
  if (scale == 0.0) return grad_sq;
  for (std::size_t j = 0; j < params.hidden_dim; ++j) {
    const double dj = d.pre_delta[j];
    params.b1[j] += scale * dj;
    if (dj == 0.0) continue;
    double* row = params.w1.data() + j * params.input_dim;
    for (std::size_t k = 0; k < params.input_dim; ++k) row[k] += scale * (dj * x[k]);
  }
  for (std::size_t b = 0; b < kNumActions; ++b) {
    params.b2[b] += scale * d.score_delta[b];
    double* row = params.w2.data() + b * params.hidden_dim;
    for (std::size_t j = 0; j < params.hidden_dim; ++j) row[j] += scale * (d.score_delta[b] * f.hidden[j]);
  }
  if (!all_finite(params)) throw NumericError("policy_gradient_step: parameters became non-finite");
  return grad_sq;
}

PolicyParameters policy_gradient_step(const PolicyParameters& params, std::span<const double> x,
                                      Action a, double reward, double step) {
  PolicyParameters out = params;
  apply_policy_gradient(out, x, a, reward, step);
  return out;
}

double squared_norm(const PolicyParameters& p) {
  double s = 0.0;
  for (const auto* v : {&p.w1, &p.b1, &p.w2, &p.b2})
    for (double e : *v) s += e * e;
  return s;
}

bool all_finite(const PolicyParameters& p) {
  for (const auto* v : {&p.w1, &p.b1, &p.w2, &p.b2})
    for (double e : *v)
      if (!std::isfinite(e)) return false;
  return true;
}

std::size_t parameter_count(const PolicyParameters& p) {
  return p.w1.size() + p.b1.size() + p.w2.size() + p.b2.size();
}

std::vector<double> flatten(const PolicyParameters& p) {
  std::vector<double> out;
  out.reserve(parameter_count(p));
  for (const auto* v : {&p.w1, &p.b1, &p.w2, &p.b2}) out.insert(out.end(), v->begin(), v->end());
  return out;
}

void unflatten(std::span<const double> flat, PolicyParameters& p) {
  if (flat.size() != parameter_count(p)) throw ConfigError("unflatten: size mismatch");
  auto it = flat.begin();
  for (auto* v : {&p.w1, &p.b1, &p.w2, &p.b2}) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(v->size()), v->begin());
    it += static_cast<std::ptrdiff_t>(v->size());
  }
}

}  // namespace ccbfair
