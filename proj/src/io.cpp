#include "ccbfair/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "ccbfair/csv.hpp"
#include "ccbfair/error.hpp"

namespace ccbfair {
namespace {

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw NumericError("cannot format value");
  return std::string(buf, ptr);
}

void write_vector(std::ostringstream& out, std::string_view name, const std::vector<double>& v) {
  out << name << ' ' << v.size();
  for (double e : v) out << ' ' << shortest(e);
  out << '\n';
}

// Whitespace-separated token reader over a checkpoint body.
class Tokens {
 public:
  explicit Tokens(std::string_view text) : text_(text) {}

  std::string_view next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ >= text_.size()) throw ConfigError("checkpoint: unexpected end of file");
    const auto start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  void expect(std::string_view word) {
    const auto t = next();
    if (t != word) {
      throw ConfigError("checkpoint: expected '" + std::string(word) + "', found '" + std::string(t) + "'");
    }
  }

  double real() {
    const auto t = next();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      throw ConfigError("checkpoint: bad number '" + std::string(t) + "'");
    }
    return v;
  }

  std::uint64_t integer() {
    const auto t = next();
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      throw ConfigError("checkpoint: bad integer '" + std::string(t) + "'");
    }
    return v;
  }

  std::vector<double> vector(std::string_view name, std::size_t expected) {
    expect(name);
    const auto n = integer();
    if (n != expected) throw ConfigError("checkpoint: " + std::string(name) + " has the wrong size");
    std::vector<double> v(n);
    for (auto& e : v) e = real();
    return v;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

void write_policy(std::ostringstream& out, int index, const PolicyParameters& p) {
  out << "policy " << index << '\n';
  out << "input_dim " << p.input_dim << '\n';
  out << "hidden_dim " << p.hidden_dim << '\n';
  out << "seed " << p.seed << '\n';
  write_vector(out, "w1", p.w1);
  write_vector(out, "b1", p.b1);
  write_vector(out, "w2", p.w2);
  write_vector(out, "b2", p.b2);
}

PolicyParameters read_policy(Tokens& in, int index) {
  in.expect("policy");
  if (in.integer() != static_cast<std::uint64_t>(index)) throw ConfigError("checkpoint: policies out of order");
  in.expect("input_dim");
  const auto input_dim = in.integer();
  in.expect("hidden_dim");
  const auto hidden_dim = in.integer();
  PolicyParameters p = zero_policy(input_dim, hidden_dim);
  in.expect("seed");
  p.seed = in.integer();
  p.w1 = in.vector("w1", p.w1.size());
  p.b1 = in.vector("b1", p.b1.size());
  p.w2 = in.vector("w2", p.w2.size());
  p.b2 = in.vector("b2", p.b2.size());
  if (!all_finite(p)) throw NumericError("checkpoint: non-finite parameters");
  return p;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

long long round4(double v) { return std::llround(v * 1e4); }

std::string fixed4_from_units(long long units) {
  const bool negative = units < 0;
  const unsigned long long a = negative ? static_cast<unsigned long long>(-units) : units;
  char frac[8];
  std::snprintf(frac, sizeof frac, "%04llu", a % 10000);
  return (negative ? "-" : "") + std::to_string(a / 10000) + "." + frac;
}

}  // namespace

std::string checkpoint_to_text(const CcbModel& m) {
  std::ostringstream out;
  out << "ccbfair-checkpoint " << kCheckpointFormatVersion << '\n';
  out << "step " << m.step << '\n';
  out << "lambda " << shortest(m.config.lambda) << '\n';
  out << "alpha " << shortest(m.config.alpha) << '\n';
  out << "steps " << m.config.steps << '\n';
  out << "hidden " << m.config.hidden_dim << '\n';
  out << "config_seed " << m.config.seed << '\n';
  out << "checkpoint_every " << m.config.checkpoint_every << '\n';
  write_policy(out, 0, m.policy0);
  write_policy(out, 1, m.policy1);
  out << "end\n";
  return out.str();
}

CcbModel checkpoint_from_text(std::string_view text) {
  Tokens in(text);
  in.expect("ccbfair-checkpoint");
  const auto version = in.integer();
  if (version != kCheckpointFormatVersion) {
    throw ConfigError("checkpoint: unsupported format version " + std::to_string(version));
  }
  CcbModel m;
  in.expect("step");
  m.step = in.integer();
  in.expect("lambda");
  m.config.lambda = in.real();
  in.expect("alpha");
  m.config.alpha = in.real();
  in.expect("steps");
  m.config.steps = in.integer();
  in.expect("hidden");
  m.config.hidden_dim = in.integer();
  in.expect("config_seed");
  m.config.seed = in.integer();
  in.expect("checkpoint_every");
  m.config.checkpoint_every = in.integer();
  m.policy0 = read_policy(in, 0);
  m.policy1 = read_policy(in, 1);
  in.expect("end");
  if (m.policy0.input_dim != m.policy1.input_dim || m.policy0.hidden_dim != m.policy1.hidden_dim) {
    throw ConfigError("checkpoint: policies differ in shape");
  }
  return m;
}

void save_checkpoint(const std::filesystem::path& path, const CcbModel& model) {
  write_text_file(path, checkpoint_to_text(model));
}

CcbModel load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_text(read_text_file(path));
}

std::string lr_to_text(const LrParameters& p) {
  std::ostringstream out;
  out << "ccbfair-lr " << kCheckpointFormatVersion << '\n';
  write_vector(out, "weights", p.weights);
  out << "bias " << shortest(p.bias) << '\n';
  out << "end\n";
  return out.str();
}

LrParameters lr_from_text(std::string_view text) {
  Tokens in(text);
  in.expect("ccbfair-lr");
  if (in.integer() != static_cast<std::uint64_t>(kCheckpointFormatVersion)) {
    throw ConfigError("lr checkpoint: unsupported format version");
  }
  LrParameters p;
  in.expect("weights");
  const auto n = in.integer();
  p.weights.resize(n);
  for (auto& w : p.weights) w = in.real();
  in.expect("bias");
  p.bias = in.real();
  in.expect("end");
  return p;
}

std::string fixed4(double value) { return fixed4_from_units(round4(value)); }

std::string reward_log_header() { return "step,sensitive,action,acc_reward,kl,reward,accumulated\n"; }

std::string reward_log_row(const RewardRecord& r) {
  std::string out = std::to_string(r.step);
  out += ',';
  out += std::to_string(r.sensitive);
  out += ',';
  out += std::to_string(r.action);
  for (double v : {r.acc_reward, r.kl, r.reward, r.accumulated}) {
    out += ',';
    out += fixed4(v);
  }
  out += '\n';
  return out;
}

std::string report_csv_header() {
  return "dataset,method,criterion,seed,split,mode,k,n,acc,discr,consist,delta\n";
}

std::string report_csv_row(const ReportRow& row) {
  const auto& r = row.report;
  std::ostringstream out;
  out << csv_field(row.dataset) << ',' << csv_field(row.method) << ',' << csv_field(row.criterion) << ','
      << row.seed << ',' << csv_field(r.split) << ',' << csv_field(row.mode) << ',' << r.k << ',' << r.n
      << ',' << fixed4(r.accuracy) << ',' << fixed4(r.discrimination) << ',' << fixed4(r.consistency) << ','
      << fixed4_from_units(round4(r.accuracy) - round4(r.discrimination)) << '\n';
  return out.str();
}

std::string report_json_line(const ReportRow& row) {
  const auto& r = row.report;
  const auto units = [](long long u) { return static_cast<double>(u) / 1e4; };
  nlohmann::ordered_json j;
  j["dataset"] = row.dataset;
  j["method"] = row.method;
  j["criterion"] = row.criterion;
  j["seed"] = row.seed;
  j["split"] = r.split;
  j["mode"] = row.mode;
  j["k"] = r.k;
  j["n"] = r.n;
  j["acc"] = units(round4(r.accuracy));
  j["discr"] = units(round4(r.discrimination));
  j["consist"] = units(round4(r.consistency));
  j["delta"] = units(round4(r.accuracy) - round4(r.discrimination));
  return j.dump() + "\n";
}

std::string grid_table_csv(const GridSearchResult& grid, SelectionCriterion criterion) {
  std::ostringstream out;
  out << "lambda,hidden,seed,step,val_acc,val_discr,val_delta,selected\n";
  const auto ranking = grid.ranking(criterion);
  const std::size_t winner = ranking.empty() ? grid.points.size() : ranking.front();
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    const auto& p = grid.points[i];
    const auto& sel = p.selection(criterion);
    const auto& v = sel.validation;
    out << shortest(p.point.lambda) << ',' << p.point.hidden << ',' << p.point.seed << ',' << sel.model.step
        << ',' << fixed4(v.accuracy) << ',' << fixed4(v.discrimination) << ','
        << fixed4_from_units(round4(v.accuracy) - round4(v.discrimination)) << ',' << (i == winner ? 1 : 0)
        << '\n';
  }
  return out.str();
}

std::string submodel_csv(const SubmodelReport& report) {
  std::ostringstream out;
  out << "model,mode,acc,discr,consist,delta\n";
  for (const auto& row : report.rows()) {
    const auto& r = *row.report;
    out << row.label << ',' << to_string(row.mode) << ',' << fixed4(r.accuracy) << ',' << fixed4(r.discrimination)
        << ',' << fixed4(r.consistency) << ','
        << fixed4_from_units(round4(r.accuracy) - round4(r.discrimination)) << '\n';
  }
  return out.str();
}

}  // namespace ccbfair
