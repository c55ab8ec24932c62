#include "ccbfair/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "ccbfair/error.hpp"
#include "ccbfair/rng.hpp"

namespace ccbfair {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_levels(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto bar = text.find('|', start);
    const auto piece = trim(text.substr(start, bar == std::string_view::npos ? bar : bar - start));
    if (!piece.empty()) out.emplace_back(piece);
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return out;
}

double parse_number(std::string_view text, std::string_view column) {
  text = trim(text);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ConfigError("non-numeric value '" + std::string(text) + "' in continuous column '" +
                      std::string(column) + "'");
  }
  return value;
}

}  // namespace

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::continuous: return "continuous";
    case ColumnKind::sensitive: return "sensitive";
    case ColumnKind::label: return "label";
  }
  return "?";
}

ColumnKind parse_column_kind(std::string_view text) {
  if (text == "categorical") return ColumnKind::categorical;
  if (text == "continuous") return ColumnKind::continuous;
  if (text == "sensitive") return ColumnKind::sensitive;
  if (text == "label") return ColumnKind::label;
  throw ConfigError("unknown column kind '" + std::string(text) + "'");
}

std::size_t FeatureSchema::sensitive_index() const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].kind == ColumnKind::sensitive) return i;
  throw ConfigError("schema has no sensitive column");
}

std::size_t FeatureSchema::label_index() const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].kind == ColumnKind::label) return i;
  throw ConfigError("schema has no label column");
}

std::vector<std::size_t> FeatureSchema::feature_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].is_feature()) out.push_back(i);
  return out;
}

std::size_t FeatureSchema::encoded_dim() const {
  std::size_t dim = 0;
  for (const auto& c : columns) {
    if (c.kind == ColumnKind::continuous) dim += 1;
    if (c.kind == ColumnKind::categorical)
      dim += fitted ? c.levels.size() : c.declared_levels.size();
  }
  return dim;
}

std::optional<std::size_t> FeatureSchema::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return i;
  return std::nullopt;
}

FeatureSchema parse_schema(std::string_view schema_text) {
  FeatureSchema schema;
  std::vector<std::pair<std::string, std::vector<std::string>>> level_decls;
  bool have_positive = false;
  bool have_group = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= schema_text.size()) {
    const auto nl = schema_text.find('\n', pos);
    std::string_view line =
        schema_text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? schema_text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("schema line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("schema line " + std::to_string(line_no) + ": empty key");

    if (key == "positive_label") {
      schema.positive_label = std::string(value);
      have_positive = true;
    } else if (key == "sensitive_group_1") {
      schema.sensitive_group_1 = std::string(value);
      have_group = true;
    } else if (key.size() > 7 && key.ends_with(".levels")) {
      level_decls.emplace_back(key.substr(0, key.size() - 7), split_levels(value));
    } else {
      if (schema.find(key)) throw ConfigError("duplicate column name '" + key + "'");
      Column col;
      col.name = key;
      col.kind = parse_column_kind(value);
      schema.columns.push_back(std::move(col));
    }
  }

  const auto count = [&](ColumnKind k) {
    return std::count_if(schema.columns.begin(), schema.columns.end(),
                         [k](const Column& c) { return c.kind == k; });
  };
  if (count(ColumnKind::label) > 1) throw ConfigError("multiple label columns");
  if (count(ColumnKind::label) == 0) throw ConfigError("no label column");
  if (count(ColumnKind::sensitive) > 1) throw ConfigError("multiple sensitive columns");
  if (count(ColumnKind::sensitive) == 0) throw ConfigError("no sensitive column");
  if (!have_positive) throw ConfigError("schema is missing positive_label");
  if (!have_group) throw ConfigError("schema is missing sensitive_group_1");

  for (auto& [name, levels] : level_decls) {
    const auto idx = schema.find(name);
    if (!idx || schema.columns[*idx].kind != ColumnKind::categorical) {
      throw ConfigError("levels declared for '" + name + "', which is not a categorical column");
    }
    std::unordered_set<std::string> seen;
    for (const auto& l : levels) {
      if (!seen.insert(l).second) throw ConfigError("duplicate level '" + l + "' in " + name);
    }
    schema.columns[*idx].declared_levels = std::move(levels);
  }
  return schema;
}

FeatureSchema read_schema(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("schema file not found: " + path.string());
  return parse_schema(read_text_file(path));
}

FeatureSchema fit_encoding(std::span<const std::vector<std::string>> raw_rows,
                           const FeatureSchema& schema) {
  if (raw_rows.empty()) throw ConfigError("fit_encoding: empty training set");
  FeatureSchema out = schema;
  const double n = static_cast<double>(raw_rows.size());
  for (std::size_t c = 0; c < out.columns.size(); ++c) {
    Column& col = out.columns[c];
    if (col.kind == ColumnKind::categorical) {
      col.levels = col.declared_levels;
      std::unordered_set<std::string> known(col.levels.begin(), col.levels.end());
      for (const auto& row : raw_rows) {
        if (known.insert(row.at(c)).second) col.levels.push_back(row[c]);
      }
    } else if (col.kind == ColumnKind::continuous) {
      std::vector<double> values;
      values.reserve(raw_rows.size());
      for (const auto& row : raw_rows) values.push_back(parse_number(row.at(c), col.name));
      double sum = 0.0;
      for (double v : values) sum += v;
      const double mean = sum / n;
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      col.stats.mean = mean;
      col.stats.stddev = std::sqrt(ss / n);
      const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      col.stats.min = *lo;
      col.stats.max = *hi;
      col.stats.constant = col.stats.stddev == 0.0;
    }
  }
  out.fitted = true;
  return out;
}

Example encode(std::span<const std::string> raw_row, const FeatureSchema& schema) {
  if (!schema.fitted) throw ConfigError("encode: schema statistics are not fitted");
  if (raw_row.size() != schema.columns.size()) {
    throw ConfigError("encode: row has " + std::to_string(raw_row.size()) + " values, schema has " +
                      std::to_string(schema.columns.size()) + " columns");
  }
  Example ex;
  ex.features.reserve(schema.encoded_dim());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const Column& col = schema.columns[c];
    const std::string& value = raw_row[c];
    switch (col.kind) {
      case ColumnKind::categorical: {
        const auto it = std::find(col.levels.begin(), col.levels.end(), value);
        if (it == col.levels.end()) {
          throw ConfigError("unseen level '" + value + "' in categorical column '" + col.name + "'");
        }
        const auto level = static_cast<std::size_t>(it - col.levels.begin());
        for (std::size_t l = 0; l < col.levels.size(); ++l) ex.features.push_back(l == level ? 1.0 : 0.0);
        ex.raw.push_back(static_cast<double>(level));
        break;
      }
      case ColumnKind::continuous: {
        const double v = parse_number(value, col.name);
        ex.features.push_back(col.stats.constant ? 0.0 : (v - col.stats.mean) / col.stats.stddev);
        ex.raw.push_back(v);
        break;
      }
      case ColumnKind::sensitive:
        ex.sensitive = value == schema.sensitive_group_1 ? 1 : 0;
        break;
      case ColumnKind::label:
        ex.label = value == schema.positive_label ? 1 : 0;
        break;
    }
  }
  return ex;
}

SplitIndices split_indices(std::size_t n, std::uint64_t seed) {
  if (n < 10) throw ConfigError("split: need at least 10 examples, got " + std::to_string(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.below(i + 1)]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(SplitDataset::kTrainRatio * n));
  const auto n_val = static_cast<std::size_t>(std::llround(SplitDataset::kValidationRatio * n));
  SplitIndices out;
  out.train.assign(perm.begin(), perm.begin() + n_train);
  out.validation.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
  out.test.assign(perm.begin() + n_train + n_val, perm.end());
  return out;
}

SplitDataset split(std::span<const Example> examples, std::uint64_t seed) {
  const auto idx = split_indices(examples.size(), seed);
  SplitDataset out;
  out.seed = seed;
  for (auto i : idx.train) out.train.push_back(examples[i]);
  for (auto i : idx.validation) out.validation.push_back(examples[i]);
  for (auto i : idx.test) out.test.push_back(examples[i]);
  return out;
}

RawDataset select_columns(const CsvTable& table, const FeatureSchema& schema) {
  std::vector<std::size_t> source(schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const auto& name = schema.columns[c].name;
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw ConfigError("missing column '" + name + "' in CSV");
    source[c] = static_cast<std::size_t>(it - table.header.begin());
  }
  for (const auto& h : table.header) {
    if (!schema.find(h)) throw ConfigError("CSV column '" + h + "' is not named in the schema");
  }

  RawDataset raw;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::vector<std::string> row;
    row.reserve(source.size());
    bool missing = false;
    for (auto s : source) {
      if (table.rows[r][s].empty()) missing = true;
      row.push_back(table.rows[r][s]);
    }
    if (missing) {
      ++raw.dropped;
      continue;
    }
    raw.rows.push_back(std::move(row));
    raw.source_rows.push_back(r);
  }
  return raw;
}

namespace {

std::vector<Example> encode_part(const RawDataset& raw, const FeatureSchema& fitted,
                                 std::span<const std::size_t> positions) {
  std::vector<Example> out;
  out.reserve(positions.size());
  for (auto p : positions) {
    Example ex = encode(raw.rows[p], fitted);
    ex.row = raw.source_rows[p];
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<std::size_t> to_source(const RawDataset& raw, std::span<const std::size_t> positions) {
  std::vector<std::size_t> out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back(raw.source_rows[p]);
  return out;
}

}  // namespace

PreparedData prepare(const RawDataset& raw, const FeatureSchema& schema, std::uint64_t seed) {
  const auto idx = split_indices(raw.rows.size(), seed);
  std::vector<std::vector<std::string>> train_rows;
  train_rows.reserve(idx.train.size());
  for (auto p : idx.train) train_rows.push_back(raw.rows[p]);

  PreparedData out;
  out.schema = fit_encoding(train_rows, schema);
  out.data.seed = seed;
  out.data.train = encode_part(raw, out.schema, idx.train);
  out.data.validation = encode_part(raw, out.schema, idx.validation);
  out.data.test = encode_part(raw, out.schema, idx.test);
  out.manifest = {to_source(raw, idx.train), to_source(raw, idx.validation), to_source(raw, idx.test)};
  out.dropped = raw.dropped;
  return out;
}

SplitDataset apply_manifest(const RawDataset& raw, const FeatureSchema& fitted,
                            const SplitIndices& manifest, std::uint64_t seed) {
  std::unordered_map<std::size_t, std::size_t> position;
  for (std::size_t p = 0; p < raw.source_rows.size(); ++p) position.emplace(raw.source_rows[p], p);
  const auto lookup = [&](std::span<const std::size_t> rows) {
    std::vector<std::size_t> out;
    out.reserve(rows.size());
    for (auto r : rows) {
      const auto it = position.find(r);
      if (it == position.end()) {
        throw ConfigError("manifest row " + std::to_string(r) + " is not present in the data");
      }
      out.push_back(it->second);
    }
    return out;
  };
  SplitDataset out;
  out.seed = seed;
  out.train = encode_part(raw, fitted, lookup(manifest.train));
  out.validation = encode_part(raw, fitted, lookup(manifest.validation));
  out.test = encode_part(raw, fitted, lookup(manifest.test));
  return out;
}

std::string schema_to_json(const FeatureSchema& schema) {
  json j;
  j["format"] = "ccbfair-schema-v1";
  j["fitted"] = schema.fitted;
  j["positive_label"] = schema.positive_label;
  j["sensitive_group_1"] = schema.sensitive_group_1;
  j["columns"] = json::array();
  for (const auto& c : schema.columns) {
    json col;
    col["name"] = c.name;
    col["kind"] = std::string(to_string(c.kind));
    if (c.kind == ColumnKind::categorical) {
      col["declared_levels"] = c.declared_levels;
      col["levels"] = c.levels;
    }
    if (c.kind == ColumnKind::continuous) {
      col["mean"] = c.stats.mean;
      col["stddev"] = c.stats.stddev;
      col["min"] = c.stats.min;
      col["max"] = c.stats.max;
      col["constant"] = c.stats.constant;
    }
    j["columns"].push_back(std::move(col));
  }
  return j.dump(2) + "\n";
}

FeatureSchema schema_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "ccbfair-schema-v1") throw ConfigError("unsupported schema format");
    FeatureSchema s;
    s.fitted = j.at("fitted").get<bool>();
    s.positive_label = j.at("positive_label").get<std::string>();
    s.sensitive_group_1 = j.at("sensitive_group_1").get<std::string>();
    for (const auto& col : j.at("columns")) {
      Column c;
      c.name = col.at("name").get<std::string>();
      c.kind = parse_column_kind(col.at("kind").get<std::string>());
      if (c.kind == ColumnKind::categorical) {
        c.declared_levels = col.at("declared_levels").get<std::vector<std::string>>();
        c.levels = col.at("levels").get<std::vector<std::string>>();
      }
      if (c.kind == ColumnKind::continuous) {
        c.stats.mean = col.at("mean").get<double>();
        c.stats.stddev = col.at("stddev").get<double>();
        c.stats.min = col.at("min").get<double>();
        c.stats.max = col.at("max").get<double>();
        c.stats.constant = col.at("constant").get<bool>();
      }
      s.columns.push_back(std::move(c));
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed schema json: ") + e.what());
  }
}

std::string manifest_to_json(const SplitIndices& manifest, std::uint64_t seed) {
  json j;
  j["format"] = "ccbfair-split-v1";
  j["seed"] = seed;
  j["ratios"] = {SplitDataset::kTrainRatio, SplitDataset::kValidationRatio, SplitDataset::kTestRatio};
  j["train"] = manifest.train;
  j["validation"] = manifest.validation;
  j["test"] = manifest.test;
  return j.dump() + "\n";
}

SplitIndices manifest_from_json(std::string_view text, std::uint64_t* seed) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "ccbfair-split-v1") throw ConfigError("unsupported manifest format");
    if (seed) *seed = j.at("seed").get<std::uint64_t>();
    return {j.at("train").get<std::vector<std::size_t>>(),
            j.at("validation").get<std::vector<std::size_t>>(),
            j.at("test").get<std::vector<std::size_t>>()};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed split manifest: ") + e.what());
  }
}

}  // namespace ccbfair
