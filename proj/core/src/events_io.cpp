#include "exhawkes/io/events.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "exhawkes/core/stats.hpp"
#include "exhawkes/io/csv.hpp"
#include "exhawkes/io/dates.hpp"

namespace exhawkes::io {

void IngestOptions::validate() const {
  if (!(lon.hi > lon.lo) || !(lat.hi > lat.lo)) throw std::invalid_argument("empty bounding box");
  if (!(end > start)) throw std::invalid_argument("empty date range");
  if (!(jitter_space_sd >= 0.0)) throw std::invalid_argument("spatial jitter must be non-negative");
  if (!(mark_ceiling >= 0.0)) throw std::invalid_argument("mark ceiling must be non-negative (0: automatic)");
}

std::size_t IngestReport::dropped_total() const {
  std::size_t n = 0;
  for (const auto& [reason, count] : dropped) n += count;
  return n;
}

nlohmann::json IngestReport::to_json() const {
  nlohmann::json j;
  j["rows"] = rows;
  j["kept"] = kept;
  j["dropped"] = dropped;
  j["imputed"] = {{"month", imputed_month},
                  {"day", imputed_day},
                  {"deaths", imputed_deaths},
                  {"injuries", imputed_injuries}};
  j["rejittered"] = rejittered;
  nlohmann::json f = nlohmann::json::array();
  for (const auto& [id, flag] : flags) f.push_back({{"id", id}, {"flag", flag}});
  j["flags"] = f;
  return j;
}

namespace {

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  try {
    out = stats::parse_double(s);
  } catch (const std::exception&) {
    return false;
  }
  return std::isfinite(out);
}

struct Kept {
  MarkedEvent event;
  double day_start{0.0};
  double day_length{0.0};
  bool jittered{false};
  std::size_t row{0};
};

}  // namespace

IngestResult ingest_events(std::istream& in, const IngestOptions& options) {
  options.validate();
  CsvTable table;
  try {
    table = read_csv(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("unparseable event CSV: ") + e.what());
  }
  for (const char* col : {"id", "date", "lat", "lon", "deaths", "injuries"})
    if (!table.has(col))
      throw std::runtime_error("event CSV header must contain id,date,lat,lon,deaths,injuries; missing " +
                               std::string(col));
  const std::size_t c_id = table.column("id"), c_date = table.column("date"), c_lat = table.column("lat"),
                    c_lon = table.column("lon"), c_d = table.column("deaths"), c_i = table.column("injuries");

  IngestResult result;
  auto& report = result.report;
  report.rows = table.rows.size();
  Rng rng(options.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Kept> kept;

  auto drop = [&](const std::string& id, const std::string& reason) {
    ++report.dropped[reason];
    report.flags.emplace_back(id, "dropped: " + reason);
  };

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string id = row[c_id].empty() ? "row" + std::to_string(r + 1) : row[c_id];
    ParsedDate date;
    try {
      date = parse_iso_date(row[c_date]);
    } catch (const std::exception&) {
      drop(id, "bad_date");
      continue;
    }
    double lat = 0.0, lon = 0.0;
    const bool has_lat = parse_number(row[c_lat], lat);
    const bool has_lon = parse_number(row[c_lon], lon);
    if (!has_lat || !has_lon) {
      drop(id, "missing_coordinates");
      continue;
    }
    if (!options.lon.contains(lon) || !options.lat.contains(lat)) {
      drop(id, "outside_box");
      continue;
    }
    double deaths = 0.0, injuries = 0.0;
    const bool has_d = parse_number(row[c_d], deaths);
    const bool has_i = parse_number(row[c_i], injuries);
    if ((!has_d && !row[c_d].empty()) || (!has_i && !row[c_i].empty()) || deaths < 0.0 || injuries < 0.0) {
      drop(id, "bad_casualties");
      continue;
    }
    // year-level range check before drawing anything for the row
    if (double(date.year + 1) <= options.start || double(date.year) >= options.end) {
      drop(id, "outside_dates");
      continue;
    }

    Kept k;
    k.row = r;
    int month = date.month.value_or(0);
    int day = date.day.value_or(0);
    if (month == 0) {
      const int doy = 1 + static_cast<int>(u01(rng) * days_in_year(date.year));
      const auto d0 = decimal_year(date.year, 1, 1);
      k.day_start = d0 + double(std::min(doy, days_in_year(date.year)) - 1) / days_in_year(date.year);
      ++report.imputed_month;
      report.flags.emplace_back(id, "imputed: month and day");
    } else {
      if (day == 0) {
        day = 1 + std::min(days_in_month(date.year, month) - 1, static_cast<int>(u01(rng) * days_in_month(date.year, month)));
        ++report.imputed_day;
        report.flags.emplace_back(id, "imputed: day");
      }
      k.day_start = decimal_year(date.year, month, day);
    }
    k.day_length = 1.0 / days_in_year(date.year);
    if (date.seconds) {
      k.event.t = k.day_start + *date.seconds / 86400.0 * k.day_length;
    } else if (options.jitter_time) {
      k.event.t = k.day_start + u01(rng) * k.day_length;
      k.jittered = true;
    } else {
      k.event.t = k.day_start;
    }
    if (!has_d) {
      ++report.imputed_deaths;
      report.flags.emplace_back(id, "imputed: deaths = 0");
    }
    if (!has_i) {
      ++report.imputed_injuries;
      report.flags.emplace_back(id, "imputed: injuries = 0");
    }
    if (options.jitter_space_sd > 0.0) {
      // redraw until the jittered point stays in the box
      double jl = lon, jt = lat;
      for (int tries = 0; tries < 1000; ++tries) {
        jl = lon + options.jitter_space_sd * z(rng);
        jt = lat + options.jitter_space_sd * z(rng);
        if (options.lon.contains(jl) && options.lat.contains(jt)) break;
        jl = lon;
        jt = lat;
      }
      lon = jl;
      lat = jt;
    }
    if (!(k.event.t >= options.start && k.event.t < options.end)) {
      drop(id, "outside_dates");
      continue;
    }
    k.event.id = id;
    k.event.s = {lon, lat};
    k.event.m = deaths + injuries;
    kept.push_back(std::move(k));
  }

  if (kept.empty()) throw std::runtime_error("no usable event rows after filtering");
  std::stable_sort(kept.begin(), kept.end(), [](const Kept& a, const Kept& b) { return a.event.t < b.event.t; });
  // strict order: later duplicates are moved within their day
  std::set<double> used;
  for (auto& k : kept) {
    if (used.insert(k.event.t).second) continue;
    ++report.rejittered;
    report.flags.emplace_back(k.event.id, "rejittered: time collision");
    if (k.jittered) {
      do {
        k.event.t = k.day_start + u01(rng) * k.day_length;
      } while (!used.insert(k.event.t).second);
    } else {
      double t = k.event.t;
      do {
        t += k.day_length / 86400.0;
      } while (!used.insert(t).second);
      k.event.t = t;
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [](const Kept& a, const Kept& b) { return a.event.t < b.event.t; });

  ObservationDomain dom;
  dom.x = options.lon;
  dom.y = options.lat;
  dom.t = {options.start, options.end};
  double max_mark = 0.0;
  for (const auto& k : kept) max_mark = std::max(max_mark, k.event.m);
  if (options.mark_ceiling > 0.0 && max_mark >= options.mark_ceiling)
    throw std::runtime_error("mark " + stats::format_double(max_mark) + " reaches the configured mark ceiling " +
                             stats::format_double(options.mark_ceiling));
  dom.mark_ceiling = options.mark_ceiling > 0.0 ? options.mark_ceiling : max_mark + 1.0;
  std::vector<MarkedEvent> events;
  events.reserve(kept.size());
  for (auto& k : kept) events.push_back(std::move(k.event));
  result.pattern = PointPattern(std::move(events), dom);
  report.kept = result.pattern.size();
  return result;
}

IngestResult ingest_events(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return ingest_events(in, options);
}

void write_events_csv(std::ostream& out, const PointPattern& original) {
  out << "id,date,lat,lon,deaths,injuries\n";
  for (const auto& e : original.events())
    out << e.id << ',' << format_decimal_year(e.t) << ',' << stats::format_double(e.s.y) << ','
        << stats::format_double(e.s.x) << ',' << stats::format_double(e.m) << ",0\n";
}

void write_events_csv(const std::string& path, const PointPattern& original) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_events_csv(out, original);
}

void write_parents_csv(std::ostream& out, const PointPattern& pattern, const BranchingStructure& branching) {
  if (branching.size() != pattern.size()) throw std::invalid_argument("branching does not match the pattern");
  out << "child_id,parent_id\n";
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    out << pattern[i].id << ',';
    if (branching.is_background(i)) out << "BACKGROUND";
    else out << pattern[static_cast<std::size_t>(branching.parent(i))].id;
    out << '\n';
  }
}

BranchingStructure read_parents_csv(std::istream& in, const PointPattern& pattern) {
  const auto table = read_csv(in);
  const std::size_t c = table.column("child_id"), p = table.column("parent_id");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < pattern.size(); ++i) index[pattern[i].id] = i;
  std::vector<std::ptrdiff_t> parents(pattern.size(), kBackground);
  std::vector<bool> seen(pattern.size(), false);
  for (const auto& row : table.rows) {
    const auto it = index.find(row[c]);
    if (it == index.end()) throw std::runtime_error("parents CSV names an unknown event " + row[c]);
    seen[it->second] = true;
    if (row[p] == "BACKGROUND") continue;
    const auto jt = index.find(row[p]);
    if (jt == index.end()) throw std::runtime_error("parents CSV names an unknown parent " + row[p]);
    parents[it->second] = static_cast<std::ptrdiff_t>(jt->second);
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw std::runtime_error("parents CSV does not cover every event");
  BranchingStructure b(std::move(parents));
  const auto times = pattern.times();
  b.validate(times);
  return b;
}

std::vector<baseline::CovariateRecord> read_covariates(std::istream& in) {
  const auto table = read_csv(in);
  const std::size_t cn = table.column("name"), clat = table.column("lat"), clon = table.column("lon"),
                    cy = table.column("year"), cv = table.column("value");
  std::vector<baseline::CovariateRecord> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    baseline::CovariateRecord rec;
    rec.name = row[cn];
    double lat = 0.0, lon = 0.0, year = 0.0, value = 0.0;
    if (rec.name.empty() || !parse_number(row[clat], lat) || !parse_number(row[clon], lon) ||
        !parse_number(row[cy], year) || !parse_number(row[cv], value) || year != std::floor(year))
      throw std::runtime_error("malformed covariate row " + std::to_string(r + 1));
    rec.location = {lon, lat};
    rec.year = static_cast<int>(year);
    rec.value = value;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<baseline::CovariateRecord> read_covariates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_covariates(in);
}

void write_covariates(std::ostream& out, const std::vector<baseline::CovariateRecord>& records) {
  out << "name,lat,lon,year,value\n";
  for (const auto& r : records)
    out << r.name << ',' << stats::format_double(r.location.y) << ',' << stats::format_double(r.location.x) << ','
        << r.year << ',' << stats::format_double(r.value) << '\n';
}

void require_covariates(const std::map<std::string, baseline::CovariateField>& fields,
                        const std::vector<std::string>& names) {
  for (const auto& n : names)
    if (!fields.count(n)) throw std::runtime_error("covariate '" + n + "' is not in the covariate file");
}

}  // namespace exhawkes::io
