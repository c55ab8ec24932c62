#include "ccbfair/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "ccbfair/error.hpp"

namespace ccbfair {
namespace {

// Per feature column: categorical, or the training range (0 when constant).
struct GowerColumns {
  std::vector<bool> categorical;
  std::vector<double> range;

  explicit GowerColumns(const FeatureSchema& schema) {
    if (!schema.fitted) throw ConfigError("gower: schema statistics are not fitted");
    for (auto c : schema.feature_columns()) {
      const Column& col = schema.columns[c];
      categorical.push_back(col.kind == ColumnKind::categorical);
      const double r = col.kind == ColumnKind::continuous ? col.stats.range() : 0.0;
      range.push_back(r > 0.0 ? r : 0.0);
    }
    if (categorical.empty()) throw ConfigError("gower: schema has no feature columns");
  }

  std::size_t size() const { return categorical.size(); }

  double similarity(const double* a, const double* b) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < categorical.size(); ++k) {
      if (categorical[k]) {
        sum += a[k] == b[k] ? 1.0 : 0.0;
      } else if (range[k] == 0.0) {
        sum += 1.0;
      } else {
        const double s = 1.0 - std::abs(a[k] - b[k]) / range[k];
        sum += std::clamp(s, 0.0, 1.0);
      }
    }
    return sum / static_cast<double>(categorical.size());
  }
};

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ConfigError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                      std::to_string(b) + ")");
  }
}

}  // namespace

double gower_similarity(std::span<const double> raw_i, std::span<const double> raw_j,
                        const FeatureSchema& schema) {
  const GowerColumns cols(schema);
  if (raw_i.size() != cols.size() || raw_j.size() != cols.size()) {
    throw ConfigError("gower: raw feature rows do not match the schema");
  }
  return cols.similarity(raw_i.data(), raw_j.data());
}

NeighborIndex k_nearest(std::span<const Example> examples, std::size_t k, const FeatureSchema& schema,
                        std::size_t jobs) {
  const std::size_t n = examples.size();
  if (k == 0) throw ConfigError("k_nearest: k must be >= 1");
  if (k >= n) {
    throw ConfigError("k_nearest: k = " + std::to_string(k) + " needs more than " + std::to_string(n) +
                      " examples");
  }
  const GowerColumns cols(schema);
  const std::size_t m = cols.size();
  std::vector<double> raw(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    if (examples[i].raw.size() != m) throw ConfigError("k_nearest: raw feature rows do not match the schema");
    std::copy(examples[i].raw.begin(), examples[i].raw.end(), raw.begin() + static_cast<std::ptrdiff_t>(i * m));
  }

  NeighborIndex index;
  index.k = k;
  index.neighbors.assign(n * k, 0);

  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> best_sim(k);
    std::vector<std::size_t> best_idx(k);
    for (std::size_t i = begin; i < end; ++i) {
      std::size_t filled = 0;
      const double* row_i = raw.data() + i * m;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double s = cols.similarity(row_i, raw.data() + j * m);
        // Candidates arrive in ascending index, so an equal similarity never
        // displaces an entry already kept.
        if (filled == k && s <= best_sim[k - 1]) continue;
        std::size_t pos = filled < k ? filled++ : k - 1;
        while (pos > 0 && best_sim[pos - 1] < s) {
          best_sim[pos] = best_sim[pos - 1];
          best_idx[pos] = best_idx[pos - 1];
          --pos;
        }
        best_sim[pos] = s;
        best_idx[pos] = j;
      }
      std::copy(best_idx.begin(), best_idx.end(), index.neighbors.begin() + static_cast<std::ptrdiff_t>(i * k));
    }
  };

  jobs = std::clamp<std::size_t>(jobs, 1, n);
  if (jobs == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (n + jobs - 1) / jobs;
    for (std::size_t b = 0; b < n; b += chunk) threads.emplace_back(work, b, std::min(n, b + chunk));
    for (auto& t : threads) t.join();
  }
  return index;
}

double consistency(std::span<const Action> predictions, const NeighborIndex& neighbors) {
  check_lengths(predictions.size(), neighbors.size(), "consistency");
  if (predictions.empty()) throw ConfigError("consistency: no predictions");
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    double mean = 0.0;
    for (auto j : neighbors.of(i)) mean += predictions[j];
    mean /= static_cast<double>(neighbors.k);
    total += std::abs(predictions[i] - mean);
  }
  return 1.0 - total / static_cast<double>(predictions.size());
}

double discrimination(std::span<const Action> predictions, std::span<const int> sensitive) {
  check_lengths(predictions.size(), sensitive.size(), "discrimination");
  std::size_t count[2] = {0, 0};
  std::size_t positive[2] = {0, 0};
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int s = sensitive[i];
    if (s != 0 && s != 1) throw ConfigError("discrimination: sensitive values must be 0 or 1");
    ++count[s];
    if (predictions[i] == 1) ++positive[s];
  }
  if (count[0] == 0 || count[1] == 0) {
    throw ConfigError("discrimination: undefined, a sensitive group is empty");
  }
  const double r0 = static_cast<double>(positive[0]) / static_cast<double>(count[0]);
  const double r1 = static_cast<double>(positive[1]) / static_cast<double>(count[1]);
  return std::abs(r0 - r1);
}

double accuracy(std::span<const Action> predictions, std::span<const int> labels) {
  check_lengths(predictions.size(), labels.size(), "accuracy");
  if (predictions.empty()) throw ConfigError("accuracy: no predictions");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

EvaluationSet make_evaluation_set(std::string name, std::span<const Example> examples,
                                  const FeatureSchema& schema, std::size_t k, std::size_t jobs) {
  EvaluationSet set;
  set.name = std::move(name);
  set.examples.assign(examples.begin(), examples.end());
  for (const auto& ex : examples) {
    set.sensitive.push_back(ex.sensitive);
    set.labels.push_back(ex.label);
  }
  set.neighbors = k_nearest(examples, k, schema, jobs);
  return set;
}

EvaluationReport evaluate(std::span<const Action> predictions, const EvaluationSet& set) {
  EvaluationReport r;
  r.accuracy = accuracy(predictions, set.labels);
  r.discrimination = discrimination(predictions, set.sensitive);
  r.consistency = consistency(predictions, set.neighbors);
  r.delta = r.accuracy - r.discrimination;
  r.split = set.name;
  r.n = predictions.size();
  r.k = set.neighbors.k;
  return r;
}

EvaluationReport evaluate(std::span<const Action> predictions, std::span<const Example> examples,
                          const FeatureSchema& schema, std::size_t k, std::string split_name) {
  check_lengths(predictions.size(), examples.size(), "evaluate");
  return evaluate(predictions, make_evaluation_set(std::move(split_name), examples, schema, k));
}

}  // namespace ccbfair
