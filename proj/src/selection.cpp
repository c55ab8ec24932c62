#include "ccbfair/selection.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "ccbfair/error.hpp"

namespace ccbfair {

std::string_view to_string(SelectionCriterion c) {
  return c == SelectionCriterion::discrimination ? "discrimination" : "delta";
}

SelectionCriterion parse_criterion(std::string_view text) {
  if (text == "discrimination") return SelectionCriterion::discrimination;
  if (text == "delta") return SelectionCriterion::delta;
  throw ConfigError("invalid selection criterion '" + std::string(text) + "'");
}

double criterion_score(const EvaluationReport& report, SelectionCriterion c) {
  return c == SelectionCriterion::discrimination ? -report.discrimination : report.delta;
}

std::size_t select_best(std::span<const EvaluationReport> reports, std::span<const std::size_t> steps,
                        SelectionCriterion criterion) {
  if (reports.empty()) throw ConfigError("select: no checkpoints");
  if (reports.size() != steps.size()) throw ConfigError("select: reports and steps differ in length");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const double a = criterion_score(reports[i], criterion);
    const double b = criterion_score(reports[best], criterion);
    if (a > b || (a == b && steps[i] > steps[best])) best = i;
  }
  return best;
}

std::vector<EvaluationReport> evaluate_checkpoints(std::span<const CcbModel> checkpoints,
                                                   const EvaluationSet& validation) {
  std::vector<EvaluationReport> out;
  out.reserve(checkpoints.size());
  for (const auto& m : checkpoints) {
    out.push_back(evaluate(predict_all(m, validation.examples, PredictMode::original), validation));
  }
  return out;
}

Selection select_checkpoint(std::span<const CcbModel> checkpoints, const EvaluationSet& validation,
                            SelectionCriterion criterion) {
  if (checkpoints.empty()) throw ConfigError("select_checkpoint: empty checkpoint list");
  const auto reports = evaluate_checkpoints(checkpoints, validation);
  std::vector<std::size_t> steps;
  for (const auto& m : checkpoints) steps.push_back(m.step);
  const auto best = select_best(reports, steps, criterion);
  return {checkpoints[best], reports[best], best};
}

std::vector<std::size_t> GridSearchResult::ranking(SelectionCriterion c) const {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = points[a].selection(c).validation;
    const auto& rb = points[b].selection(c).validation;
    const double sa = criterion_score(ra, c);
    const double sb = criterion_score(rb, c);
    if (sa != sb) return sa > sb;
    return ra.accuracy > rb.accuracy;
  });
  return order;
}

const GridPointResult& GridSearchResult::best(SelectionCriterion c) const {
  if (points.empty()) throw ConfigError("grid search: no grid points");
  return points[ranking(c).front()];
}

GridSearchResult grid_search(std::span<const Example> train, const EvaluationSet& validation,
                             const GridOptions& options) {
  if (options.lambdas.empty() || options.hidden.empty() || options.seeds.empty()) {
    throw ConfigError("grid_search: empty grid");
  }
  std::vector<GridPoint> grid;
  for (double l : options.lambdas)
    for (std::size_t h : options.hidden)
      for (std::uint64_t s : options.seeds) grid.push_back({l, h, s});
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  GridSearchResult result;
  result.points.resize(grid.size());

  auto run_point = [&](std::size_t i) {
    TrainingConfig config = options.base;
    config.lambda = grid[i].lambda;
    config.hidden_dim = grid[i].hidden;
    config.seed = grid[i].seed;
    config = resolve_config(config, train.size());
    const auto checkpoints = train_streaming(train, config, {});

    GridPointResult& r = result.points[i];
    r.point = grid[i];
    r.validation = evaluate_checkpoints(checkpoints, validation);
    for (const auto& m : checkpoints) r.steps.push_back(m.step);
    for (auto c : {SelectionCriterion::discrimination, SelectionCriterion::delta}) {
      const auto best = select_best(r.validation, r.steps, c);
      r.selected[static_cast<std::size_t>(c)] = {checkpoints[best], r.validation[best], best};
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, grid.size());
  if (jobs == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) run_point(i);
    return result;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < grid.size(); i = next++) {
        try {
          run_point(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
  return result;
}

std::array<SubmodelReport::Row, 4> SubmodelReport::rows() const {
  return {{{"Model 0", PredictMode::model0, &model0},
           {"Model 1", PredictMode::model1, &model1},
           {"Reversed Model", PredictMode::reversed, &reversed},
           {"Original Model", PredictMode::original, &original}}};
}

SubmodelReport submodel_report(const CcbModel& model, const EvaluationSet& test) {
  auto eval = [&](PredictMode mode) { return evaluate(predict_all(model, test.examples, mode), test); };
  SubmodelReport r;
  r.model0 = eval(PredictMode::model0);
  r.model1 = eval(PredictMode::model1);
  r.reversed = eval(PredictMode::reversed);
  r.original = eval(PredictMode::original);
  return r;
}

}  // namespace ccbfair
