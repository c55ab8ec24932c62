#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccbfair/ccb.hpp"
#include "ccbfair/metrics.hpp"

namespace ccbfair {

// discrimination: minimize validation discrimination.
// delta: maximize validation accuracy - discrimination.
enum class SelectionCriterion { discrimination = 0, delta = 1 };

std::string_view to_string(SelectionCriterion c);
SelectionCriterion parse_criterion(std::string_view text);

// Score to maximize under the criterion.
double criterion_score(const EvaluationReport& report, SelectionCriterion c);

// Index of the best report. Exact ties go to the larger step.
std::size_t select_best(std::span<const EvaluationReport> reports, std::span<const std::size_t> steps,
                        SelectionCriterion criterion);

struct Selection {
  CcbModel model;
  EvaluationReport validation;
  std::size_t checkpoint_index = 0;
};

// Greedy `original`-mode predictions of every checkpoint on the set.
std::vector<EvaluationReport> evaluate_checkpoints(std::span<const CcbModel> checkpoints,
                                                   const EvaluationSet& validation);

Selection select_checkpoint(std::span<const CcbModel> checkpoints, const EvaluationSet& validation,
                            SelectionCriterion criterion);

struct GridPoint {
  double lambda = 0.0;
  std::size_t hidden = 0;
  std::uint64_t seed = 0;

  auto operator<=>(const GridPoint&) const = default;
};

struct GridPointResult {
  GridPoint point;
  std::vector<std::size_t> steps;
  std::vector<EvaluationReport> validation;  // one per checkpoint
  std::array<Selection, 2> selected;         // indexed by criterion

  const Selection& selection(SelectionCriterion c) const { return selected[static_cast<std::size_t>(c)]; }
};

struct GridSearchResult {
  std::vector<GridPointResult> points;  // ordered by (lambda, hidden, seed)

  // Point indices, best first under the criterion. Equal scores are ordered
  // by validation accuracy, then by grid order.
  std::vector<std::size_t> ranking(SelectionCriterion c) const;
  const GridPointResult& best(SelectionCriterion c) const;
};

struct GridOptions {
  std::vector<double> lambdas;
  std::vector<std::size_t> hidden;
  std::vector<std::uint64_t> seeds;
  TrainingConfig base;  // alpha, steps, checkpoint cadence
  std::size_t jobs = 1;
};

// Trains one model per (lambda, hidden, seed) and selects a checkpoint of
// each under both criteria. Each point is trained from its own seed, so the
// outcome does not depend on the order of the grid lists or on `jobs`.
GridSearchResult grid_search(std::span<const Example> train, const EvaluationSet& validation,
                             const GridOptions& options);

struct SubmodelReport {
  EvaluationReport model0;
  EvaluationReport model1;
  EvaluationReport reversed;
  EvaluationReport original;

  struct Row {
    std::string label;
    PredictMode mode;
    const EvaluationReport* report;
  };
  std::array<Row, 4> rows() const;
};

SubmodelReport submodel_report(const CcbModel& model, const EvaluationSet& test);

}  // namespace ccbfair
