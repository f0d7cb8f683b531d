#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "exhawkes/core/chain.hpp"

namespace exhawkes::inference {

// {"iterations", "retained", "acceptance": {block: {proposed, accepted, rate}},
//  "ess": {column: value}, "summary": {column: {mode, mean, lower, upper}}}
[[nodiscard]] nlohmann::json chain_diagnostics(const PosteriorChain& chain);

// One CSV per column with (row, value) for trace plots, written to dir/trace_<column>.csv.
void write_traces(const PosteriorChain& chain, const std::string& dir);

}  // namespace exhawkes::inference
