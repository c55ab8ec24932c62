// ccbfair command-line tool: prepare -> train -> report.
//
//   ccbfair prepare --data adult.csv --schema adult.schema --seed 1 --out work
//   ccbfair train   --out work --lambda 10,50 --hidden 20,40 --jobs 2
//   ccbfair train   --out work --method lr
//   ccbfair report  --out work
//
// Everything written under --out is a pure function of the inputs and
// seeds, except run.json, which holds wall-clock timestamps.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccbfair/baseline.hpp"
#include "ccbfair/ccb.hpp"
#include "ccbfair/csv.hpp"
#include "ccbfair/data.hpp"
#include "ccbfair/error.hpp"
#include "ccbfair/io.hpp"
#include "ccbfair/metrics.hpp"
#include "ccbfair/selection.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace ccbfair;

namespace {

constexpr SelectionCriterion kCriteria[] = {SelectionCriterion::discrimination, SelectionCriterion::delta};
constexpr std::size_t kCurvePoints = 1000;

struct Options {
  std::string data;
  std::string schema;
  std::uint64_t seed = 1;
  std::vector<double> lambdas = {10.0};
  std::vector<std::size_t> hidden = {20};
  std::vector<std::uint64_t> train_seeds;
  double alpha = 1e-2;
  std::size_t steps = 0;
  std::size_t checkpoint_every = 0;
  std::string criterion;
  std::size_t k = kDefaultNeighbors;
  std::string mode = "original";
  std::string method = "ccb";
  std::string out;
  std::size_t jobs = 1;
  std::size_t epochs = 500;
  double l2 = 1e-4;
};

std::string iso_time(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("malformed " + path.string() + ": " + e.what());
  }
}

// Short, filesystem-safe form of a real, e.g. 0.01 -> "0.01", 10 -> "10".
std::string tag(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

template <class T>
std::string joined(const std::vector<T>& v, std::string (*fmt)(T)) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "_" : "") + fmt(v[i]);
  return out;
}

std::string dataset_name(const std::string& data_path) { return fs::path(data_path).stem().string(); }

// ---------------------------------------------------------------- prepare

struct Workspace {
  fs::path root;
  std::string data;
  std::string schema_path;
  std::uint64_t seed = 0;
  FeatureSchema schema;
  SplitDataset parts;
};

int cmd_prepare(const Options& o) {
  if (o.data.empty() || o.schema.empty()) throw ConfigError("prepare needs --data and --schema");
  if (!fs::exists(o.data)) throw ConfigError("data file not found: " + o.data);
  const auto schema = read_schema(o.schema);
  const auto raw = select_columns(read_csv(o.data), schema);
  const auto prep = prepare(raw, schema, o.seed);

  const fs::path root(o.out);
  fs::create_directories(root);
  write_text_file(root / "schema.json", schema_to_json(prep.schema));
  write_text_file(root / "split.json", manifest_to_json(prep.manifest, o.seed));
  json info;
  info["data"] = o.data;
  info["schema"] = o.schema;
  info["seed"] = o.seed;
  info["rows"] = raw.rows.size();
  info["dropped"] = raw.dropped;
  info["encoded_dim"] = prep.schema.encoded_dim();
  info["train"] = prep.data.train.size();
  info["validation"] = prep.data.validation.size();
  info["test"] = prep.data.test.size();
  write_json(root / "prepare.json", info);
  std::cout << "prepared " << dataset_name(o.data) << ": " << raw.rows.size() << " rows (" << raw.dropped
            << " dropped), split " << prep.data.train.size() << "/" << prep.data.validation.size() << "/"
            << prep.data.test.size() << ", encoded dim " << prep.schema.encoded_dim() << "\n";
  return 0;
}

Workspace load_workspace(const Options& o) {
  Workspace w;
  w.root = o.out;
  const auto info_path = w.root / "prepare.json";
  if (!fs::exists(info_path)) {
    throw ConfigError("no prepared data in " + w.root.string() + " (run 'ccbfair prepare' first)");
  }
  const auto info = read_json(info_path);
  w.data = o.data.empty() ? info.at("data").get<std::string>() : o.data;
  w.schema_path = info.at("schema").get<std::string>();
  w.schema = schema_from_json(read_text_file(w.root / "schema.json"));
  const auto manifest = manifest_from_json(read_text_file(w.root / "split.json"), &w.seed);
  const auto raw = select_columns(read_csv(w.data), w.schema);
  w.parts = apply_manifest(raw, w.schema, manifest, w.seed);
  return w;
}

// ------------------------------------------------------------------ train

std::string run_id(const Options& o, const std::vector<std::uint64_t>& seeds) {
  if (o.method == "lr") return "lr-s" + std::to_string(o.seed);
  auto fmt_d = +[](double v) { return tag(v); };
  auto fmt_z = +[](std::size_t v) { return std::to_string(v); };
  auto fmt_u = +[](std::uint64_t v) { return std::to_string(v); };
  return "ccb-l" + joined(o.lambdas, fmt_d) + "-h" + joined(o.hidden, fmt_z) + "-a" + tag(o.alpha) + "-s" +
         joined(seeds, fmt_u);
}

json config_echo(const Options& o, const Workspace& w, const std::vector<std::uint64_t>& seeds,
                 const TrainingConfig& resolved) {
  json c;
  c["method"] = o.method;
  c["dataset"] = dataset_name(w.data);
  c["split_seed"] = w.seed;
  if (o.method == "lr") {
    c["epochs"] = o.epochs;
    c["learning_rate"] = LrOptions{}.learning_rate;
    c["l2"] = o.l2;
    c["seed"] = o.seed;
    return c;
  }
  c["lambda"] = o.lambdas;
  c["hidden"] = o.hidden;
  c["seeds"] = seeds;
  c["alpha"] = resolved.alpha;
  c["steps"] = resolved.steps;
  c["checkpoint_every"] = resolved.checkpoint_every;
  c["k"] = o.k;
  return c;
}

void write_selection(const fs::path& dir, const Selection& sel, SelectionCriterion c) {
  save_checkpoint(dir / ("selected-" + std::string(to_string(c)) + ".ckpt"), sel.model);
}

int cmd_train(const Options& o) {
  if (o.method != "ccb" && o.method != "lr") throw ConfigError("--method must be ccb or lr");
  const auto started = std::chrono::system_clock::now();
  const Workspace w = load_workspace(o);
  const auto seeds = o.train_seeds.empty() ? std::vector<std::uint64_t>{o.seed} : o.train_seeds;
  const auto id = run_id(o, seeds);
  const fs::path dir = w.root / "runs" / id;
  fs::create_directories(dir);

  TrainingConfig base;
  base.alpha = o.alpha;
  base.steps = o.steps;
  base.checkpoint_every = o.checkpoint_every;
  base.lambda = o.lambdas.front();
  base.hidden_dim = o.hidden.front();
  base.seed = seeds.front();
  const TrainingConfig resolved = o.method == "ccb" ? resolve_config(base, w.parts.train.size()) : base;
  write_json(dir / "config.json", config_echo(o, w, seeds, resolved));

  if (o.method == "lr") {
    const auto params = fit_logistic(w.parts.train, {.epochs = o.epochs, .l2 = o.l2, .seed = o.seed});
    write_text_file(dir / "lr.model", lr_to_text(params));
  } else {
    const auto validation = make_evaluation_set("validation", w.parts.validation, w.schema, o.k, o.jobs);
    const bool single = o.lambdas.size() == 1 && o.hidden.size() == 1 && seeds.size() == 1;
    if (single) {
      std::ofstream rewards(dir / "rewards.csv", std::ios::binary);
      if (!rewards) throw ConfigError("cannot write " + (dir / "rewards.csv").string());
      rewards << reward_log_header();
      const auto checkpoints =
          train_streaming(w.parts.train, resolved, [&](const RewardRecord& r) { rewards << reward_log_row(r); });
      rewards.close();
      if (!rewards) throw ConfigError("write failed: " + (dir / "rewards.csv").string());
      for (const auto& m : checkpoints) save_checkpoint(dir / ("step-" + std::to_string(m.step) + ".ckpt"), m);

      GridSearchResult g;
      GridPointResult& p = g.points.emplace_back();
      p.point = {resolved.lambda, resolved.hidden_dim, resolved.seed};
      p.validation = evaluate_checkpoints(checkpoints, validation);
      for (const auto& m : checkpoints) p.steps.push_back(m.step);
      for (auto c : kCriteria) {
        const auto best = select_best(p.validation, p.steps, c);
        p.selected[static_cast<std::size_t>(c)] = {checkpoints[best], p.validation[best], best};
      }
      for (auto c : kCriteria) {
        write_text_file(dir / ("grid-" + std::string(to_string(c)) + ".csv"), grid_table_csv(g, c));
        write_selection(dir, p.selection(c), c);
      }
    } else {
      GridOptions go{.lambdas = o.lambdas, .hidden = o.hidden, .seeds = seeds, .base = base, .jobs = o.jobs};
      const auto g = grid_search(w.parts.train, validation, go);
      for (auto c : kCriteria) {
        write_text_file(dir / ("grid-" + std::string(to_string(c)) + ".csv"), grid_table_csv(g, c));
        write_selection(dir, g.best(c).selection(c), c);
      }
    }
  }

  const auto finished = std::chrono::system_clock::now();
  json meta;
  meta["run"] = id;
  meta["started"] = iso_time(started);
  meta["finished"] = iso_time(finished);
  meta["seconds"] = std::chrono::duration<double>(finished - started).count();
  write_json(dir / "run.json", meta);
  std::cout << "trained " << id << " -> " << dir.string() << "\n";
  return 0;
}

// ----------------------------------------------------------------- report

// Every `every`-th row of rewards.csv (plus the last), as step,accumulated.
void write_reward_curve(const fs::path& rewards, const fs::path& out) {
  std::ifstream in(rewards);
  if (!in) throw ConfigError("cannot open " + rewards.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(std::move(line));
  const std::size_t every = std::max<std::size_t>(1, (rows.size() + kCurvePoints - 1) / kCurvePoints);
  std::string csv = "step,accumulated\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if ((i + 1) % every != 0 && i + 1 != rows.size()) continue;
    const auto& r = rows[i];
    const auto first = r.find(',');
    const auto last = r.rfind(',');
    csv += r.substr(0, first) + "," + r.substr(last + 1) + "\n";
  }
  write_text_file(out, csv);
}

int cmd_report(const Options& o) {
  const Workspace w = load_workspace(o);
  const auto runs_dir = w.root / "runs";
  if (!fs::exists(runs_dir)) throw ConfigError("no runs in " + w.root.string() + " (run 'ccbfair train' first)");
  std::vector<fs::path> runs;
  for (const auto& e : fs::directory_iterator(runs_dir))
    if (e.is_directory()) runs.push_back(e.path());
  std::sort(runs.begin(), runs.end());
  if (runs.empty()) throw ConfigError("no runs in " + runs_dir.string());

  std::vector<SelectionCriterion> criteria(std::begin(kCriteria), std::end(kCriteria));
  if (!o.criterion.empty()) criteria = {parse_criterion(o.criterion)};
  const PredictMode mode = parse_predict_mode(o.mode);
  const auto test = make_evaluation_set("test", w.parts.test, w.schema, o.k, o.jobs);
  const auto dataset = dataset_name(w.data);

  std::string csv = report_csv_header();
  std::string jsonl;
  for (const auto& dir : runs) {
    const auto cfg = read_json(dir / "config.json");
    const auto method = cfg.at("method").get<std::string>();
    if (method == "lr") {
      const auto params = lr_from_text(read_text_file(dir / "lr.model"));
      const ReportRow row{dataset, "lr", "none", cfg.at("seed").get<std::uint64_t>(), "original",
                          evaluate(predict_logistic_all(params, test.examples), test)};
      csv += report_csv_row(row);
      jsonl += report_json_line(row);
      continue;
    }
    for (auto c : criteria) {
      const auto name = std::string(to_string(c));
      const auto model = load_checkpoint(dir / ("selected-" + name + ".ckpt"));
      const ReportRow row{dataset, "ccb", name, model.config.seed, std::string(to_string(mode)),
                          evaluate(predict_all(model, test.examples, mode), test)};
      csv += report_csv_row(row);
      jsonl += report_json_line(row);
      write_text_file(dir / ("submodels-" + name + ".csv"), submodel_csv(submodel_report(model, test)));
    }
    if (fs::exists(dir / "rewards.csv")) write_reward_curve(dir / "rewards.csv", dir / "reward-curve.csv");
  }
  write_text_file(w.root / "report.csv", csv);
  write_text_file(w.root / "report.jsonl", jsonl);
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fair classification with cooperative contextual bandits"};
  app.require_subcommand(1);
  Options o;

  auto* prep = app.add_subcommand("prepare", "Split a dataset and fit the encoding on its training part");
  prep->add_option("--data", o.data, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  prep->add_option("--schema", o.schema, "Schema file")->required();
  prep->add_option("--seed", o.seed, "Split seed")->capture_default_str();
  prep->add_option("--out", o.out, "Output directory")->required();

  auto* train_cmd = app.add_subcommand("train", "Train CCB (single run or grid) or the LR baseline");
  train_cmd->add_option("--out", o.out, "Prepared directory")->required();
  train_cmd->add_option("--data", o.data, "Override the CSV recorded by prepare");
  train_cmd->add_option("--method", o.method, "ccb or lr")->check(CLI::IsMember({"ccb", "lr"}))->capture_default_str();
  train_cmd->add_option("--seed", o.seed, "Training seed")->capture_default_str();
  train_cmd->add_option("--seeds", o.train_seeds, "Several training seeds (grid)")->delimiter(',');
  train_cmd->add_option("--lambda", o.lambdas, "Fairness weight(s)")->delimiter(',')->capture_default_str();
  train_cmd->add_option("--hidden", o.hidden, "Hidden layer size(s)")->delimiter(',')->capture_default_str();
  train_cmd->add_option("--alpha", o.alpha, "Step size")->capture_default_str();
  train_cmd->add_option("--steps", o.steps, "Training steps (0: 100 x |train|, at most 2e6)")->capture_default_str();
  train_cmd->add_option("--checkpoint-every", o.checkpoint_every, "Checkpoint cadence (0: steps / 100)");
  train_cmd->add_option("--k", o.k, "Neighbors for consistency")->capture_default_str();
  train_cmd->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();
  train_cmd->add_option("--epochs", o.epochs, "LR epochs")->capture_default_str();
  train_cmd->add_option("--l2", o.l2, "LR l2 penalty")->capture_default_str();

  auto* report = app.add_subcommand("report", "Evaluate selected models on the test split");
  report->add_option("--out", o.out, "Prepared directory")->required();
  report->add_option("--data", o.data, "Override the CSV recorded by prepare");
  report->add_option("--criterion", o.criterion, "Only this criterion")
      ->check(CLI::IsMember({"discrimination", "delta"}));
  report->add_option("--mode", o.mode, "Prediction mode")
      ->check(CLI::IsMember({"original", "reversed", "model0", "model1"}))
      ->capture_default_str();
  report->add_option("--k", o.k, "Neighbors for consistency")->capture_default_str();
  report->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*prep) return cmd_prepare(o);
    if (*train_cmd) return cmd_train(o);
    if (*report) return cmd_report(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
