#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ccbfair {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Comma-delimited, header row required. Fields may be double-quoted, with ""
// as an escaped quote inside a quoted field. Unquoted fields are trimmed.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace ccbfair
