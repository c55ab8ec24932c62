#include "ccbfair/baseline.hpp"

#include <cmath>
#include <string>

#include "ccbfair/error.hpp"
#include "ccbfair/rng.hpp"

namespace ccbfair {
namespace {

double dot(const LrParameters& p, std::span<const double> x) {
  if (x.size() != p.weights.size()) {
    throw ConfigError("logistic: input has dimension " + std::to_string(x.size()) + ", expected " +
                      std::to_string(p.weights.size()));
  }
  double z = p.bias;
  for (std::size_t k = 0; k < x.size(); ++k) z += p.weights[k] * x[k];
  return z;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

double logistic_loss(const LrParameters& params, std::span<const Example> examples, double l2) {
  if (examples.empty()) throw ConfigError("logistic_loss: no examples");
  double total = 0.0;
  for (const auto& ex : examples) {
    const double z = dot(params, ex.features);
    // -[y log s(z) + (1 - y) log(1 - s(z))] = softplus(z) - y z
    total += softplus(z) - (ex.label == 1 ? z : 0.0);
  }
  double reg = 0.0;
  for (double w : params.weights) reg += w * w;
  return total / static_cast<double>(examples.size()) + 0.5 * l2 * reg;
}

std::vector<double> logistic_loss_gradient(const LrParameters& params, std::span<const Example> examples,
                                           double l2) {
  if (examples.empty()) throw ConfigError("logistic_loss_gradient: no examples");
  const std::size_t d = params.weights.size();
  std::vector<double> g(d + 1, 0.0);
  for (const auto& ex : examples) {
    const double err = sigmoid(dot(params, ex.features)) - ex.label;
    for (std::size_t k = 0; k < d; ++k) g[k] += err * ex.features[k];
    g[d] += err;
  }
  const double inv_n = 1.0 / static_cast<double>(examples.size());
  for (std::size_t k = 0; k < d; ++k) g[k] = g[k] * inv_n + l2 * params.weights[k];
  g[d] *= inv_n;
  return g;
}

LrParameters fit_logistic(std::span<const Example> train, const LrOptions& options,
                          std::vector<double>* loss_trace) {
  if (train.empty()) throw ConfigError("fit_logistic: empty training split");
  if (!(options.learning_rate > 0.0)) throw ConfigError("fit_logistic: learning rate must be > 0");
  if (!(options.l2 >= 0.0)) throw ConfigError("fit_logistic: l2 must be >= 0");

  const std::size_t d = train.front().features.size();
  LrParameters params;
  params.weights.resize(d);
  Rng rng(options.seed);
  for (auto& w : params.weights) w = rng.uniform(-0.01, 0.01);

  double loss = logistic_loss(params, train, options.l2);
  if (!std::isfinite(loss)) throw NumericError("fit_logistic: non-finite initial loss");
  double lr = options.learning_rate;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const auto g = logistic_loss_gradient(params, train, options.l2);
    LrParameters candidate = params;
    double candidate_loss = loss;
    // Halve until the step does not increase the loss; give up after the
    // step has shrunk to nothing.
    for (int attempt = 0; attempt < 60; ++attempt) {
      for (std::size_t k = 0; k < d; ++k) candidate.weights[k] = params.weights[k] - lr * g[k];
      candidate.bias = params.bias - lr * g[d];
      candidate_loss = logistic_loss(candidate, train, options.l2);
      if (!std::isfinite(candidate_loss)) throw NumericError("fit_logistic: non-finite loss");
      if (candidate_loss <= loss) break;
      lr *= 0.5;
    }
    if (candidate_loss <= loss) {
      params = std::move(candidate);
      loss = candidate_loss;
    }
    if (loss_trace) loss_trace->push_back(loss);
  }
  return params;
}

std::pair<double, Action> predict_logistic(const LrParameters& params, std::span<const double> x) {
  const double p = sigmoid(dot(params, x));
  return {p, p >= 0.5 ? 1 : 0};
}

std::vector<Action> predict_logistic_all(const LrParameters& params, std::span<const Example> examples) {
  std::vector<Action> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(predict_logistic(params, ex.features).second);
  return out;
}

}  // namespace ccbfair
