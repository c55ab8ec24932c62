#include "ccbfair/csv.hpp"

#include <fstream>
#include <sstream>

#include "ccbfair/error.hpp"

namespace ccbfair {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;       // inside a quoted field
  bool was_quoted = false;   // current field started with a quote
  bool any_content = false;  // current record has at least one character
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(was_quoted ? field : trim(field));
    field.clear();
    was_quoted = false;
  };
  auto end_record = [&] {
    if (any_content) {
      end_field();
      records.push_back(std::move(record));
    }
    record.clear();
    field.clear();
    was_quoted = false;
    any_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (trim(field).empty()) {
          field.clear();
          quoted = true;
          was_quoted = true;
          any_content = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        any_content = true;
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        any_content = true;
        field.push_back(c);
    }
  }
  if (quoted) {
    throw ConfigError("csv: unterminated quoted field near line " + std::to_string(line));
  }
  end_record();

  if (records.empty()) throw ConfigError("csv: missing header row");
  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw ConfigError("csv: row " + std::to_string(r) + " has " +
                        std::to_string(records[r].size()) + " fields, header has " +
                        std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw ConfigError("write failed: " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text_file(path)); }

}  // namespace ccbfair
