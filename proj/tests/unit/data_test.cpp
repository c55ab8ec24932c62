#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "ccbfair/csv.hpp"
#include "ccbfair/data.hpp"
#include "ccbfair/error.hpp"

using namespace ccbfair;

namespace {

const char* kToySchema = R"(
age = continuous
color = categorical
sex = sensitive
income = label
positive_label = yes
sensitive_group_1 = F
)";

std::vector<std::vector<std::string>> toy_rows() {
  return {{"2", "a", "F", "yes"}, {"4", "b", "M", "no"}, {"6", "a", "M", "yes"}};
}

std::vector<Example> numbered(std::size_t n) {
  std::vector<Example> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].row = i;
    out[i].features = {static_cast<double>(i)};
  }
  return out;
}

}  // namespace

TEST(Csv, QuotedFieldsAndEscapes) {
  const auto t = parse_csv("a,b,c\n1,\"x,y\",\"say \"\"hi\"\"\"\n 2 ,z,\n");
  ASSERT_EQ(t.header, (std::vector<std::string>{"a", "b", "c"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][1], "x,y");
  EXPECT_EQ(t.rows[0][2], "say \"hi\"");
  EXPECT_EQ(t.rows[1][0], "2");
  EXPECT_EQ(t.rows[1][2], "");
}

TEST(Csv, RaggedRowIsAnError) {
  EXPECT_THROW(parse_csv("a,b\n1,2,3\n"), ConfigError);
}

TEST(Schema, ThreeColumnSchema) {
  const auto s = parse_schema("age = continuous\nsex = sensitive\nincome = label\n"
                              "positive_label = >50K\nsensitive_group_1 = Female\n");
  ASSERT_EQ(s.columns.size(), 3u);
  EXPECT_EQ(s.columns[0].name, "age");
  EXPECT_EQ(s.encoded_dim(), 1u);
  EXPECT_EQ(s.sensitive_index(), 1u);
  EXPECT_EQ(s.label_index(), 2u);
  EXPECT_EQ(s.positive_label, ">50K");
  EXPECT_FALSE(s.fitted);
}

TEST(Schema, Errors) {
  const std::string tail = "positive_label = 1\nsensitive_group_1 = 1\n";
  try {
    parse_schema("a = label\nb = label\ns = sensitive\n" + tail);
    FAIL() << "expected an error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("multiple label columns"), std::string::npos);
  }
  EXPECT_THROW(parse_schema("a = continuous\na = continuous\ny = label\ns = sensitive\n" + tail), ConfigError);
  EXPECT_THROW(parse_schema("a = continuous\ny = label\n" + tail), ConfigError);
  EXPECT_THROW(parse_schema("a = continuous\ny = label\ns = sensitive\nt = sensitive\n" + tail), ConfigError);
  EXPECT_THROW(parse_schema("a = ordinal\ny = label\ns = sensitive\n" + tail), ConfigError);
  EXPECT_THROW(parse_schema("a = continuous\ny = label\ns = sensitive\n"), ConfigError);
  EXPECT_THROW(parse_schema("a = continuous\na.levels = x | y\ny = label\ns = sensitive\n" + tail), ConfigError);
}

TEST(Schema, MissingFileNamesThePath) {
  try {
    read_schema("/nonexistent/dir/x.schema");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/x.schema"), std::string::npos);
  }
}

TEST(Schema, AdultHeader) {
  const auto s = read_schema(std::string(CCBFAIR_DATA_DIR) + "/adult.schema");
  EXPECT_EQ(s.feature_columns().size(), 13u);
  EXPECT_EQ(s.columns[s.sensitive_index()].name, "sex");
  EXPECT_EQ(s.columns[s.label_index()].name, "income");
  const auto table = read_csv(std::string(CCBFAIR_DATA_DIR) + "/adult.csv");
  EXPECT_EQ(table.header.size(), s.columns.size());
}

TEST(Fit, ContinuousStatistics) {
  const auto s = fit_encoding(toy_rows(), parse_schema(kToySchema));
  const auto& age = s.columns[0].stats;
  EXPECT_DOUBLE_EQ(age.mean, 4.0);
  EXPECT_NEAR(age.stddev, std::sqrt(8.0 / 3.0), 1e-12);
  EXPECT_NEAR(age.stddev, 1.63299, 1e-5);
  EXPECT_DOUBLE_EQ(age.range(), 4.0);
  EXPECT_FALSE(age.constant);
}

TEST(Fit, CategoricalLevelsInFirstAppearanceOrder) {
  const auto s = fit_encoding(toy_rows(), parse_schema(kToySchema));
  EXPECT_EQ(s.columns[1].levels, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(s.encoded_dim(), 3u);
}

TEST(Fit, DeclaredLevelsComeFirst) {
  const auto schema = parse_schema(std::string(kToySchema) + "color.levels = c | b\n");
  const auto s = fit_encoding(toy_rows(), schema);
  EXPECT_EQ(s.columns[1].levels, (std::vector<std::string>{"c", "b", "a"}));
}

TEST(Fit, ConstantColumn) {
  std::vector<std::vector<std::string>> rows = {{"5", "a", "F", "yes"}, {"5", "b", "M", "no"}, {"5", "a", "M", "no"}};
  const auto s = fit_encoding(rows, parse_schema(kToySchema));
  EXPECT_TRUE(s.columns[0].stats.constant);
  EXPECT_EQ(s.columns[0].stats.stddev, 0.0);
  const auto ex = encode(rows[0], s);
  EXPECT_EQ(ex.features[0], 0.0);
}

TEST(Fit, Errors) {
  const auto schema = parse_schema(kToySchema);
  EXPECT_THROW(fit_encoding(std::vector<std::vector<std::string>>{}, schema), ConfigError);
  std::vector<std::vector<std::string>> bad = {{"two", "a", "F", "yes"}};
  EXPECT_THROW(fit_encoding(bad, schema), ConfigError);
}

TEST(Encode, ZScoreOneHotAndBinarization) {
  auto s = fit_encoding(toy_rows(), parse_schema(kToySchema));
  s.columns[0].stats.mean = 5.0;
  s.columns[0].stats.stddev = 5.0;
  const std::vector<std::string> row = {"10", "b", "F", "no"};
  const auto ex = encode(row, s);
  ASSERT_EQ(ex.features.size(), 3u);
  EXPECT_DOUBLE_EQ(ex.features[0], 1.0);
  EXPECT_EQ(ex.features[1], 0.0);
  EXPECT_EQ(ex.features[2], 1.0);
  EXPECT_EQ(ex.sensitive, 1);
  EXPECT_EQ(ex.label, 0);
  EXPECT_EQ(ex.raw, (std::vector<double>{10.0, 1.0}));
}

TEST(Encode, ThreeLevelBlock) {
  const auto schema = parse_schema(std::string(kToySchema) + "color.levels = a | b | c\n");
  const auto s = fit_encoding(toy_rows(), schema);
  const std::vector<std::string> row = {"4", "b", "M", "yes"};
  const auto ex = encode(row, s);
  EXPECT_EQ(std::vector<double>(ex.features.begin() + 1, ex.features.end()), (std::vector<double>{0, 1, 0}));
}

TEST(Encode, UnseenLevelAndWrongWidth) {
  const auto s = fit_encoding(toy_rows(), parse_schema(kToySchema));
  const std::vector<std::string> unseen = {"4", "z", "M", "no"};
  EXPECT_THROW(encode(unseen, s), ConfigError);
  const std::vector<std::string> short_row = {"4", "a", "M"};
  EXPECT_THROW(encode(short_row, s), ConfigError);
  EXPECT_THROW(encode(toy_rows()[0], parse_schema(kToySchema)), ConfigError);
}

TEST(Encode, TrainingRoundTripProperties) {
  const auto schema = read_schema(std::string(CCBFAIR_DATA_DIR) + "/adult.schema");
  const auto raw = select_columns(read_csv(std::string(CCBFAIR_DATA_DIR) + "/adult.csv"), schema);
  const auto prep = prepare(raw, schema, 3);
  const auto dim = prep.schema.encoded_dim();
  const auto cols = prep.schema.feature_columns();
  std::vector<double> sums(dim, 0.0);
  for (const auto& ex : prep.data.train) {
    ASSERT_EQ(ex.features.size(), dim);
    std::size_t offset = 0;
    for (auto c : cols) {
      const auto& col = prep.schema.columns[c];
      if (col.kind == ColumnKind::categorical) {
        double block = 0.0;
        for (std::size_t l = 0; l < col.levels.size(); ++l) block += ex.features[offset + l];
        ASSERT_EQ(block, 1.0);
        offset += col.levels.size();
      } else {
        ASSERT_TRUE(std::isfinite(ex.features[offset]));
        sums[offset] += ex.features[offset];
        offset += 1;
      }
    }
  }
  std::size_t offset = 0;
  for (auto c : cols) {
    const auto& col = prep.schema.columns[c];
    if (col.kind == ColumnKind::continuous) {
      EXPECT_LT(std::abs(sums[offset] / prep.data.train.size()), 1e-9) << col.name;
      EXPECT_GE(col.stats.stddev, 0.0);
      EXPECT_GE(col.stats.max, col.stats.min);
      offset += 1;
    } else {
      offset += col.levels.size();
    }
  }
}

TEST(Split, SizesFollowRatios) {
  auto check = [](std::size_t n, std::size_t a, std::size_t b, std::size_t c) {
    const auto d = split(numbered(n), 11);
    EXPECT_EQ(d.train.size(), a);
    EXPECT_EQ(d.validation.size(), b);
    EXPECT_EQ(d.test.size(), c);
  };
  check(100, 70, 15, 15);
  check(1000, 700, 150, 150);
  for (std::size_t n = 10; n < 200; ++n) {
    const auto idx = split_indices(n, n);
    EXPECT_LE(std::abs(static_cast<double>(idx.train.size()) - 0.70 * n), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(idx.validation.size()) - 0.15 * n), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(idx.test.size()) - 0.15 * n), 1.0);
    EXPECT_EQ(idx.train.size() + idx.validation.size() + idx.test.size(), n);
  }
}

TEST(Split, PartitionAndDeterminism) {
  const auto a = split(numbered(500), 5);
  const auto b = split(numbered(500), 5);
  const auto c = split(numbered(500), 6);
  std::multiset<std::size_t> rows;
  for (const auto* part : {&a.train, &a.validation, &a.test})
    for (const auto& ex : *part) rows.insert(ex.row);
  EXPECT_EQ(rows.size(), 500u);
  EXPECT_EQ(std::set<std::size_t>(rows.begin(), rows.end()).size(), 500u);
  auto ids = [](const std::vector<Example>& v) {
    std::vector<std::size_t> out;
    for (const auto& e : v) out.push_back(e.row);
    return out;
  };
  EXPECT_EQ(ids(a.train), ids(b.train));
  EXPECT_EQ(ids(a.test), ids(b.test));
  EXPECT_NE(ids(a.train), ids(c.train));
}

TEST(Split, TooFewExamples) {
  EXPECT_THROW(split(numbered(9), 1), ConfigError);
}

TEST(SelectColumns, ReordersAndDropsMissing) {
  const auto schema = parse_schema(kToySchema);
  const auto table = parse_csv("income,sex,color,age\nyes,F,a,1\nno,,b,2\nno,M,b,3\n");
  const auto raw = select_columns(table, schema);
  ASSERT_EQ(raw.rows.size(), 2u);
  EXPECT_EQ(raw.dropped, 1u);
  EXPECT_EQ(raw.rows[1], (std::vector<std::string>{"3", "b", "M", "no"}));
  EXPECT_EQ(raw.source_rows, (std::vector<std::size_t>{0, 2}));
  EXPECT_THROW(select_columns(parse_csv("income,sex,age\nyes,F,1\n"), schema), ConfigError);
  EXPECT_THROW(select_columns(parse_csv("income,sex,color,age,extra\nyes,F,a,1,0\n"), schema), ConfigError);
}

TEST(Manifest, RoundTripRebuildsTheSameParts) {
  const auto schema = read_schema(std::string(CCBFAIR_DATA_DIR) + "/german.schema");
  const auto raw = select_columns(read_csv(std::string(CCBFAIR_DATA_DIR) + "/german.csv"), schema);
  const auto prep = prepare(raw, schema, 9);
  std::uint64_t seed = 0;
  const auto manifest = manifest_from_json(manifest_to_json(prep.manifest, 9), &seed);
  EXPECT_EQ(seed, 9u);
  const auto fitted = schema_from_json(schema_to_json(prep.schema));
  EXPECT_EQ(schema_to_json(fitted), schema_to_json(prep.schema));
  const auto rebuilt = apply_manifest(raw, fitted, manifest, seed);
  ASSERT_EQ(rebuilt.test.size(), prep.data.test.size());
  for (std::size_t i = 0; i < rebuilt.test.size(); ++i) {
    EXPECT_EQ(rebuilt.test[i].features, prep.data.test[i].features);
    EXPECT_EQ(rebuilt.test[i].label, prep.data.test[i].label);
  }
  EXPECT_EQ(prep.data.train.size() + prep.data.validation.size() + prep.data.test.size(), 1000u);
  EXPECT_EQ(prep.data.train.size(), 700u);
}

TEST(Prepare, StatisticsComeFromTrainingRowsOnly) {
  const auto schema = parse_schema(kToySchema);
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < 40; ++i) rows.push_back({std::to_string(i), i % 2 ? "a" : "b", i % 3 ? "F" : "M", "yes"});
  RawDataset raw;
  raw.rows = rows;
  for (std::size_t i = 0; i < rows.size(); ++i) raw.source_rows.push_back(i);
  const auto prep = prepare(raw, schema, 4);
  std::vector<std::vector<std::string>> train_rows;
  for (auto r : prep.manifest.train) train_rows.push_back(rows[r]);
  const auto expected = fit_encoding(train_rows, schema);
  EXPECT_EQ(prep.schema.columns[0].stats.mean, expected.columns[0].stats.mean);
  EXPECT_EQ(prep.schema.columns[0].stats.max, expected.columns[0].stats.max);
}
