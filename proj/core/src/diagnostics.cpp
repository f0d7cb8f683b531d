#include "exhawkes/inference/diagnostics.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "exhawkes/core/stats.hpp"

namespace exhawkes::inference {

nlohmann::json chain_diagnostics(const PosteriorChain& chain) {
  nlohmann::json j;
  j["iterations"] = chain.n_samples;
  j["burn_in"] = chain.burn_in;
  j["thin"] = chain.thin;
  j["retained"] = chain.size();
  j["seed"] = chain.seed;
  nlohmann::json acc = nlohmann::json::object();
  for (const auto& [block, a] : chain.acceptance)
    acc[block] = {{"proposed", a.proposed}, {"accepted", a.accepted}, {"rate", a.rate()}};
  j["acceptance"] = acc;
  nlohmann::json ess = nlohmann::json::object();
  nlohmann::json summary = nlohmann::json::object();
  if (!chain.empty()) {
    const auto s = summarize(chain);
    for (std::size_t c = 0; c < chain.names.size(); ++c) {
      const auto col = chain.column(c);
      ess[chain.names[c]] = stats::effective_sample_size(col);
      const auto& p = s.parameters[c];
      summary[chain.names[c]] = {{"mode", p.mode}, {"mean", p.mean}, {"lower", p.lower}, {"upper", p.upper}};
    }
  }
  j["ess"] = ess;
  j["summary"] = summary;
  return j;
}

void write_traces(const PosteriorChain& chain, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t c = 0; c < chain.names.size(); ++c) {
    std::string safe = chain.names[c];
    for (char& ch : safe)
      if (ch == '/' || ch == '\\' || ch == ' ') ch = '_';
    const auto path = std::filesystem::path(dir) / ("trace_" + safe + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "row," << chain.names[c] << '\n';
    for (std::size_t r = 0; r < chain.rows.size(); ++r) out << r << ',' << stats::format_double(chain.rows[r][c]) << '\n';
  }
}

}  // namespace exhawkes::inference
