#pragma once

// Minimal RFC 4180 reader shared by the corpus and annotation loaders.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace triage::detail {

struct CsvRow {
  std::size_t line = 0;  // 1-based line where the row starts
  std::vector<std::string> fields;
};

/// Splits `content` into rows. Quoted fields may hold commas, doubled quotes
/// and newlines. Blank lines are skipped. A quote left open at end of input
/// is reported through `unterminated_line` (0 when none).
std::vector<CsvRow> parse_csv_rows(std::string_view content, std::size_t* unterminated_line);

std::string csv_escape(std::string_view field);

std::vector<std::string> split_list(std::string_view joined, char sep = ';');

std::string read_file(const std::string& path);

}  // namespace triage::detail
