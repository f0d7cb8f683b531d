#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace exhawkes::io {

// Header plus rows of raw string fields. Quoted fields may contain commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // throws std::runtime_error naming the missing column
  [[nodiscard]] std::size_t column(const std::string& name) const;
  [[nodiscard]] bool has(const std::string& name) const;
};

[[nodiscard]] std::vector<std::string> split_csv_line(const std::string& line);
// Blank lines are skipped; a row with a field count different from the header throws.
[[nodiscard]] CsvTable read_csv(std::istream& in);
[[nodiscard]] CsvTable read_csv(const std::string& path);

}  // namespace exhawkes::io
