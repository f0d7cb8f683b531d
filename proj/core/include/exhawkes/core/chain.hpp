#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace exhawkes {

struct BlockAcceptance {
  std::uint64_t proposed{0};
  std::uint64_t accepted{0};

  [[nodiscard]] double rate() const { return proposed == 0 ? 0.0 : double(accepted) / double(proposed); }
  void record(bool ok) {
    ++proposed;
    accepted += ok ? 1 : 0;
  }
};

// Retained MCMC draws, one row per kept iteration.
struct PosteriorChain {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::map<std::string, BlockAcceptance> acceptance;
  std::uint64_t seed{0};
  std::size_t n_samples{0};
  std::size_t burn_in{0};
  std::size_t thin{1};
  std::string config_snapshot;

  [[nodiscard]] std::size_t size() const { return rows.size(); }
  [[nodiscard]] bool empty() const { return rows.empty(); }
  [[nodiscard]] std::size_t index_of(const std::string& name) const;
  [[nodiscard]] bool has(const std::string& name) const;
  [[nodiscard]] std::vector<double> column(const std::string& name) const;
  [[nodiscard]] std::vector<double> column(std::size_t j) const;
};

// iteration i (0-based) is retained when i >= burn_in and (i - burn_in + 1) % thin == 0
[[nodiscard]] std::size_t retained_count(std::size_t n_samples, std::size_t burn_in, std::size_t thin);
[[nodiscard]] bool is_retained(std::size_t iteration, std::size_t burn_in, std::size_t thin);

void write_chain_csv(std::ostream& out, const PosteriorChain& chain);
void write_chain_csv(const std::string& path, const PosteriorChain& chain);
[[nodiscard]] PosteriorChain read_chain_csv(std::istream& in);
[[nodiscard]] PosteriorChain read_chain_csv(const std::string& path);

struct ParameterSummary {
  std::string name;
  double mode{0.0};
  double mean{0.0};
  double lower{0.0};  // 2.5%
  double upper{0.0};  // 97.5%
};

struct PosteriorSummary {
  std::vector<ParameterSummary> parameters;
  [[nodiscard]] const ParameterSummary& at(const std::string& name) const;
};

// The mode is the value of each parameter at the retained row with the highest
// "log_post" column when present, otherwise the peak of a histogram of the column.
[[nodiscard]] PosteriorSummary summarize(const PosteriorChain& chain);

}  // namespace exhawkes
