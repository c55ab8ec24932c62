#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ccbfair/baseline.hpp"
#include "ccbfair/ccb.hpp"
#include "ccbfair/metrics.hpp"
#include "ccbfair/selection.hpp"

namespace ccbfair {

inline constexpr int kCheckpointFormatVersion = 1;

// Text checkpoint: a version tag, the training config, then both policies
// (dims, seed, w1, b1, w2, b2). Reals are written in shortest round-trip
// form, so loading restores every parameter bit for bit.
std::string checkpoint_to_text(const CcbModel& model);
CcbModel checkpoint_from_text(std::string_view text);
void save_checkpoint(const std::filesystem::path& path, const CcbModel& model);
CcbModel load_checkpoint(const std::filesystem::path& path);

std::string lr_to_text(const LrParameters& params);
LrParameters lr_from_text(std::string_view text);

// Fixed four decimals, computed from the value rounded to 1e-4 so that
// printed differences of printed values are exact.
std::string fixed4(double value);

// `step,sensitive,action,acc_reward,kl,reward,accumulated`
std::string reward_log_header();
std::string reward_log_row(const RewardRecord& r);

// One result row per (dataset, method, criterion, seed).
struct ReportRow {
  std::string dataset;
  std::string method;
  std::string criterion;
  std::uint64_t seed = 0;
  std::string mode;
  EvaluationReport report;
};

std::string report_csv_header();
std::string report_csv_row(const ReportRow& row);
std::string report_json_line(const ReportRow& row);

// `lambda,hidden,seed,step,val_acc,val_discr,val_delta,selected`; one row per
// grid point at its selected checkpoint, selected = 1 on the overall best.
std::string grid_table_csv(const GridSearchResult& grid, SelectionCriterion criterion);

std::string submodel_csv(const SubmodelReport& report);

}  // namespace ccbfair
