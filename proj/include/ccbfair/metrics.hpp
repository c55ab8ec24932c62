#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ccbfair/data.hpp"
#include "ccbfair/policy.hpp"

namespace ccbfair {

inline constexpr std::size_t kDefaultNeighbors = 5;

struct EvaluationReport {
  double accuracy = 0.0;
  double discrimination = 0.0;
  double consistency = 0.0;
  double delta = 0.0;  // accuracy - discrimination
  std::string split;
  std::size_t n = 0;
  std::size_t k = 0;  // neighbors used for consistency
};

// k nearest neighbors of every example of one split, row-major n x k,
// most similar first.
struct NeighborIndex {
  std::size_t k = 0;
  std::vector<std::size_t> neighbors;

  std::size_t size() const { return k == 0 ? 0 : neighbors.size() / k; }
  std::span<const std::size_t> of(std::size_t i) const { return {neighbors.data() + i * k, k}; }
};

// Mean over feature columns of the per-column Gower similarity: equality for
// categorical columns, 1 - |a - b| / range for continuous ones (range from
// the fitted training statistics, result clamped to [0, 1], 1 when the range
// is zero). Sensitive and label columns do not take part.
double gower_similarity(std::span<const double> raw_i, std::span<const double> raw_j,
                        const FeatureSchema& schema);

// Exact search over all pairs. Ties go to the lower index. `jobs` > 1 splits
// the rows across threads; the result does not depend on it.
NeighborIndex k_nearest(std::span<const Example> examples, std::size_t k, const FeatureSchema& schema,
                        std::size_t jobs = 1);

// 1 - mean_i |yhat_i - mean_{j in kNN(i)} yhat_j|
double consistency(std::span<const Action> predictions, const NeighborIndex& neighbors);

// |P(yhat = 1 | s = 0) - P(yhat = 1 | s = 1)|. Throws when a group is empty.
double discrimination(std::span<const Action> predictions, std::span<const int> sensitive);

double accuracy(std::span<const Action> predictions, std::span<const int> labels);

// A split bundled with its neighbor index, so repeated evaluations (one per
// checkpoint) share one O(n^2) neighbor search.
struct EvaluationSet {
  std::string name;
  std::vector<Example> examples;
  std::vector<int> sensitive;
  std::vector<int> labels;
  NeighborIndex neighbors;
};

EvaluationSet make_evaluation_set(std::string name, std::span<const Example> examples,
                                  const FeatureSchema& schema, std::size_t k = kDefaultNeighbors,
                                  std::size_t jobs = 1);

EvaluationReport evaluate(std::span<const Action> predictions, const EvaluationSet& set);

EvaluationReport evaluate(std::span<const Action> predictions, std::span<const Example> examples,
                          const FeatureSchema& schema, std::size_t k = kDefaultNeighbors,
                          std::string split_name = "");

}  // namespace ccbfair
