#include "exhawkes/core/chain.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "exhawkes/core/stats.hpp"

namespace exhawkes {

std::size_t PosteriorChain::index_of(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("chain has no column '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

bool PosteriorChain::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<double> PosteriorChain::column(const std::string& name) const { return column(index_of(name)); }

std::vector<double> PosteriorChain::column(std::size_t j) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(j));
  return out;
}

std::size_t retained_count(std::size_t n_samples, std::size_t burn_in, std::size_t thin) {
  if (thin == 0) throw std::invalid_argument("thin must be at least 1");
  if (n_samples <= burn_in) return 0;
  return (n_samples - burn_in) / thin;
}

bool is_retained(std::size_t iteration, std::size_t burn_in, std::size_t thin) {
  return iteration >= burn_in && (iteration - burn_in + 1) % thin == 0;
}

void write_chain_csv(std::ostream& out, const PosteriorChain& chain) {
  out << "#meta,seed," << chain.seed << '\n';
  out << "#meta,n_samples," << chain.n_samples << '\n';
  out << "#meta,burn_in," << chain.burn_in << '\n';
  out << "#meta,thin," << chain.thin << '\n';
  for (const auto& [block, acc] : chain.acceptance)
    out << "#acceptance," << block << ',' << acc.proposed << ',' << acc.accepted << '\n';
  for (std::size_t j = 0; j < chain.names.size(); ++j) out << (j ? "," : "") << chain.names[j];
  out << '\n';
  for (const auto& row : chain.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << stats::format_double(row[j]);
    out << '\n';
  }
}

void write_chain_csv(const std::string& path, const PosteriorChain& chain) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_chain_csv(out, chain);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

PosteriorChain read_chain_csv(std::istream& in) {
  PosteriorChain chain;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (line[0] == '#') {
      if (cells[0] == "#meta" && cells.size() == 3) {
        const auto v = std::stoull(cells[2]);
        if (cells[1] == "seed") chain.seed = v;
        else if (cells[1] == "n_samples") chain.n_samples = v;
        else if (cells[1] == "burn_in") chain.burn_in = v;
        else if (cells[1] == "thin") chain.thin = v;
      } else if (cells[0] == "#acceptance" && cells.size() == 4) {
        chain.acceptance[cells[1]] = BlockAcceptance{std::stoull(cells[2]), std::stoull(cells[3])};
      }
      continue;
    }
    if (!have_header) {
      chain.names = cells;
      have_header = true;
      continue;
    }
    if (cells.size() != chain.names.size())
      throw std::runtime_error("chain csv line " + std::to_string(line_no) + " has the wrong number of cells");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(stats::parse_double(c));
    chain.rows.push_back(std::move(row));
  }
  if (!have_header) throw std::runtime_error("chain csv has no header");
  return chain;
}

PosteriorChain read_chain_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_chain_csv(in);
}

const ParameterSummary& PosteriorSummary::at(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p;
  throw std::out_of_range("no summary for '" + name + "'");
}

PosteriorSummary summarize(const PosteriorChain& chain) {
  if (chain.empty()) throw std::invalid_argument("cannot summarize an empty chain");
  std::ptrdiff_t map_row = -1;
  if (chain.has("log_post")) {
    const auto lp = chain.column("log_post");
    map_row = std::max_element(lp.begin(), lp.end()) - lp.begin();
  }
  PosteriorSummary out;
  for (std::size_t j = 0; j < chain.names.size(); ++j) {
    const auto col = chain.column(j);
    ParameterSummary s;
    s.name = chain.names[j];
    s.mean = stats::mean(col);
    s.lower = stats::quantile(col, 0.025);
    s.upper = stats::quantile(col, 0.975);
    s.mode = map_row >= 0 ? col[static_cast<std::size_t>(map_row)] : stats::histogram_mode(col);
    out.parameters.push_back(s);
  }
  return out;
}

}  // namespace exhawkes
