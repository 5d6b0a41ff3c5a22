#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rampsim::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

/// Comma-separated, no quoting. Blank lines and '#' comment lines are skipped.
Table read(const std::filesystem::path& path);

std::vector<std::string> split(std::string_view line, char sep = ',');

double to_double(const std::string& text);
long long to_integer(const std::string& text);

/// Shortest text that parses back to the same double.
std::string format_double(double value);

}  // namespace rampsim::csv
