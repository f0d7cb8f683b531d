#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "exhawkes/baseline/covariates.hpp"
#include "exhawkes/core/branching.hpp"
#include "exhawkes/core/pattern.hpp"

namespace exhawkes::io {

struct IngestOptions {
  Interval lon{60.5, 75.0};
  Interval lat{29.4, 38.5};
  double start{2013.0};  // decimal years, [start, end)
  double end{2019.0};
  bool jitter_time{true};         // uniform within the recorded day
  double jitter_space_sd{0.01};   // Gaussian, degrees; 0 disables
  double mark_ceiling{0.0};  // 0: largest kept mark + 1; otherwise every mark must lie below it
  std::uint64_t seed{1};
  void validate() const;
};

struct IngestReport {
  std::size_t rows{0};
  std::size_t kept{0};
  std::map<std::string, std::size_t> dropped;  // reason -> rows
  std::size_t imputed_month{0};
  std::size_t imputed_day{0};
  std::size_t imputed_deaths{0};
  std::size_t imputed_injuries{0};
  std::size_t rejittered{0};
  std::vector<std::pair<std::string, std::string>> flags;  // (id, flag) per imputed or dropped row

  [[nodiscard]] std::size_t dropped_total() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

struct IngestResult {
  PointPattern pattern;  // x longitude, y latitude, t decimal years, m casualties
  IngestReport report;
};

// Event CSV with header id,date,lat,lon,deaths,injuries. Rows outside the box or date range,
// with missing coordinates or unparseable fields are dropped and itemized. A missing month
// or day is drawn uniformly within the year or month; missing deaths or injuries count as 0.
// Equal times are separated by re-drawing within the day (or by whole seconds without
// time jitter). Throws std::runtime_error on a bad header or when no row survives.
[[nodiscard]] IngestResult ingest_events(std::istream& in, const IngestOptions& options);
[[nodiscard]] IngestResult ingest_events(const std::string& path, const IngestOptions& options);

// Writes deaths = mark and injuries = 0, with ISO dates (times of day when not at midnight).
void write_events_csv(std::ostream& out, const PointPattern& original);
void write_events_csv(const std::string& path, const PointPattern& original);

// child_id,parent_id with BACKGROUND for immigrants.
void write_parents_csv(std::ostream& out, const PointPattern& pattern, const BranchingStructure& branching);
[[nodiscard]] BranchingStructure read_parents_csv(std::istream& in, const PointPattern& pattern);

// Covariate CSV with header name,lat,lon,year,value.
[[nodiscard]] std::vector<baseline::CovariateRecord> read_covariates(std::istream& in);
[[nodiscard]] std::vector<baseline::CovariateRecord> read_covariates(const std::string& path);
void write_covariates(std::ostream& out, const std::vector<baseline::CovariateRecord>& records);
// Throws std::runtime_error naming the first covariate of names missing from fields.
void require_covariates(const std::map<std::string, baseline::CovariateField>& fields,
                        const std::vector<std::string>& names);

}  // namespace exhawkes::io
