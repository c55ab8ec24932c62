#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccbfair/csv.hpp"

namespace ccbfair {

enum class ColumnKind { categorical, continuous, sensitive, label };

std::string_view to_string(ColumnKind kind);
ColumnKind parse_column_kind(std::string_view text);

struct ContinuousStats {
  double mean = 0.0;
  double stddev = 0.0;  // population estimator
  double min = 0.0;
  double max = 0.0;
  bool constant = false;  // stddev == 0; encodes to 0

  double range() const { return max - min; }
};

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  // Levels listed in the schema file. They come first in the one-hot block,
  // followed by any further levels observed in training rows.
  std::vector<std::string> declared_levels;
  std::vector<std::string> levels;
  ContinuousStats stats;

  bool is_feature() const {
    return kind == ColumnKind::categorical || kind == ColumnKind::continuous;
  }
};

// Column kinds, binarization rules and (after fitting) encoding statistics.
// Drives encoding as well as the Gower similarity.
struct FeatureSchema {
  std::vector<Column> columns;
  std::string positive_label;
  std::string sensitive_group_1;
  bool fitted = false;

  std::size_t sensitive_index() const;
  std::size_t label_index() const;
  // Indices into `columns` of the categorical/continuous columns, in order.
  std::vector<std::size_t> feature_columns() const;
  // Number of encoded features: one per continuous column plus one per
  // known categorical level. Before fitting, categorical columns without
  // declared levels contribute nothing.
  std::size_t encoded_dim() const;
  std::optional<std::size_t> find(std::string_view name) const;
};

// One individual. `raw` holds one value per feature column (schema order):
// the numeric value for continuous columns, the level index for categorical.
struct Example {
  std::vector<double> features;
  int sensitive = 0;
  int label = 0;
  std::vector<double> raw;
  std::size_t row = 0;  // data-row index in the source CSV (header excluded)
};

struct SplitDataset {
  std::vector<Example> train;
  std::vector<Example> validation;
  std::vector<Example> test;
  std::uint64_t seed = 0;
  static constexpr double kTrainRatio = 0.70;
  static constexpr double kValidationRatio = 0.15;
  static constexpr double kTestRatio = 0.15;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Schema file format, one entry per line, '#' starts a comment:
//   <column> = categorical | continuous | sensitive | label
//   <column>.levels = a | b | c
//   positive_label = <raw label value mapped to 1>
//   sensitive_group_1 = <raw sensitive value mapped to 1>
FeatureSchema parse_schema(std::string_view schema_text);
FeatureSchema read_schema(const std::filesystem::path& path);

// Rows are in schema column order. Only training rows may be passed.
FeatureSchema fit_encoding(std::span<const std::vector<std::string>> raw_rows,
                           const FeatureSchema& schema);

Example encode(std::span<const std::string> raw_row, const FeatureSchema& schema);

SplitIndices split_indices(std::size_t n, std::uint64_t seed);
SplitDataset split(std::span<const Example> examples, std::uint64_t seed);

// CSV rows reordered to schema column order. Rows with an empty cell are
// dropped and counted.
struct RawDataset {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> source_rows;
  std::size_t dropped = 0;
};

RawDataset select_columns(const CsvTable& table, const FeatureSchema& schema);

struct PreparedData {
  FeatureSchema schema;  // fitted on the training part
  SplitDataset data;
  SplitIndices manifest;  // source-row indices per part
  std::size_t dropped = 0;
};

// split -> fit on training rows -> encode all parts.
PreparedData prepare(const RawDataset& raw, const FeatureSchema& schema, std::uint64_t seed);

// Rebuilds the encoded parts from a stored manifest and fitted schema.
SplitDataset apply_manifest(const RawDataset& raw, const FeatureSchema& fitted,
                            const SplitIndices& manifest, std::uint64_t seed);

std::string schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(std::string_view text);
std::string manifest_to_json(const SplitIndices& manifest, std::uint64_t seed);
SplitIndices manifest_from_json(std::string_view text, std::uint64_t* seed = nullptr);

}  // namespace ccbfair
