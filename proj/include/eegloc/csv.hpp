#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace eegloc::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by name, or -1.
  int column(std::string_view name) const;
};

/// Plain comma-separated text: no quoting, '#' comment lines and blank lines
/// skipped, surrounding whitespace trimmed. Rows must match the header width.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text, const std::string& source = "<memory>");

/// Requires the given columns to be present; throws ParseError otherwise.
void require_columns(const Table& t, const std::vector<std::string>& names,
                     const std::string& source);

/// Shortest round-trip decimal form.
std::string format_double(double v);
double parse_double(const std::string& s, const std::string& source);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace eegloc::csv
