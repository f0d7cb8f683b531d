#include "exhawkes/io/csv.hpp"

#include <algorithm>
#include <boost/tokenizer.hpp>
#include <fstream>
#include <stdexcept>

namespace exhawkes::io {

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::runtime_error("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::string text = line;
  if (!text.empty() && text.back() == '\r') text.pop_back();
  using Sep = boost::escaped_list_separator<char>;
  boost::tokenizer<Sep> tok(text, Sep('\\', ',', '"'));
  std::vector<std::string> out;
  for (const auto& field : tok) {
    const auto b = field.find_first_not_of(" \t");
    const auto e = field.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return out;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (table.header.empty()) {
      if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      table.header = split_csv_line(line);
      continue;
    }
    auto row = split_csv_line(line);
    if (row.size() != table.header.size())
      throw std::runtime_error("CSV row " + std::to_string(table.rows.size() + 1) + " has " + std::to_string(row.size()) +
                               " fields, expected " + std::to_string(table.header.size()));
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw std::runtime_error("CSV input is empty");
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_csv(in);
}

}  // namespace exhawkes::io
