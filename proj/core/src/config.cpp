#include "exhawkes/io/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "exhawkes/io/dates.hpp"

namespace exhawkes::io {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("expected a number");
  return v;
}

template <typename Int>
Int to_int(const std::string& s) {
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("expected an integer");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("expected true or false");
}

std::string fmt(bool b) { return b ? "true" : "false"; }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

template <typename E>
struct EnumNames {
  std::vector<std::pair<E, std::string>> names;
  E parse(const std::string& s) const {
    for (const auto& [e, n] : names)
      if (n == s) return e;
    std::string allowed;
    for (const auto& [e, n] : names) allowed += (allowed.empty() ? "" : "|") + n;
    throw std::invalid_argument("expected one of " + allowed);
  }
  std::string name(E e) const {
    for (const auto& [v, n] : names)
      if (v == e) return n;
    throw std::logic_error("unnamed enum value");
  }
};

const EnumNames<sim::OffspringMode> kOffspring{{{sim::OffspringMode::root_relative, "root_relative"},
                                                {sim::OffspringMode::chain, "chain"}}};
const EnumNames<inference::HyperMove> kHyperMove{{{inference::HyperMove::centered, "centered"},
                                                  {inference::HyperMove::whitened, "whitened"}}};
const EnumNames<inference::BaselineUpdate> kBaselineUpdate{{{inference::BaselineUpdate::metropolis, "metropolis"},
                                                            {inference::BaselineUpdate::conjugate, "conjugate"}}};
const EnumNames<inference::PairStructure> kPairs{{{inference::PairStructure::parent, "parent"},
                                                  {inference::PairStructure::adjacent, "adjacent"}}};
const EnumNames<marks::BodyFamily> kBody{{{marks::BodyFamily::zip, "zip"}, {marks::BodyFamily::zinb, "zinb"}}};
const EnumNames<marks::TailFamily> kTail{{{marks::TailFamily::gzd, "gzd"}, {marks::TailFamily::gpd, "gpd"}}};
const EnumNames<marks::GpdMode> kGpdMode{{{marks::GpdMode::density, "density"},
                                          {marks::GpdMode::cdf_difference, "cdf_difference"}}};
const EnumNames<predict::ChainEstimate> kEstimate{{{predict::ChainEstimate::average, "average"},
                                                   {predict::ChainEstimate::mode, "mode"}}};
const EnumNames<predict::ColorRamp> kRamp{{{predict::ColorRamp::linear, "linear"}, {predict::ColorRamp::log, "log"}}};

struct Binding {
  std::string section;
  std::string key;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

#define EXH_DOUBLE(sec, key, field)                                              \
  Binding {                                                                      \
    sec, key, [](PipelineConfig& c, const std::string& v) { c.field = to_double(v); }, \
        [](const PipelineConfig& c) { return fmt(double(c.field)); }            \
  }
#define EXH_INT(sec, key, field, type)                                                \
  Binding {                                                                           \
    sec, key, [](PipelineConfig& c, const std::string& v) { c.field = to_int<type>(v); }, \
        [](const PipelineConfig& c) { return std::to_string(c.field); }              \
  }
#define EXH_BOOL(sec, key, field)                                              \
  Binding {                                                                    \
    sec, key, [](PipelineConfig& c, const std::string& v) { c.field = to_bool(v); }, \
        [](const PipelineConfig& c) { return fmt(bool(c.field)); }            \
  }
#define EXH_ENUM(sec, key, field, table)                                           \
  Binding {                                                                        \
    sec, key, [](PipelineConfig& c, const std::string& v) { c.field = table.parse(v); }, \
        [](const PipelineConfig& c) { return table.name(c.field); }               \
  }
#define EXH_STRING(sec, key, field)                                       \
  Binding {                                                               \
    sec, key, [](PipelineConfig& c, const std::string& v) { c.field = v; }, \
        [](const PipelineConfig& c) { return c.field; }                  \
  }

Binding time_binding(const char* key, double IngestOptions::*field) {
  return Binding{"data", key, [field](PipelineConfig& c, const std::string& v) { c.ingest.*field = parse_time_value(v); },
                 [field](const PipelineConfig& c) { return fmt(c.ingest.*field); }};
}

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = [] {
    std::vector<Binding> b{
        EXH_DOUBLE("data", "lon_min", ingest.lon.lo),
        EXH_DOUBLE("data", "lon_max", ingest.lon.hi),
        EXH_DOUBLE("data", "lat_min", ingest.lat.lo),
        EXH_DOUBLE("data", "lat_max", ingest.lat.hi),
        time_binding("start", &IngestOptions::start),
        time_binding("end", &IngestOptions::end),
        EXH_BOOL("data", "jitter_time", ingest.jitter_time),
        EXH_DOUBLE("data", "jitter_space_sd", ingest.jitter_space_sd),
        EXH_DOUBLE("data", "mark_ceiling", ingest.mark_ceiling),
        EXH_INT("data", "seed", ingest.seed, std::uint64_t),

        Binding{"baseline", "terms",
                [](PipelineConfig& c, const std::string& v) { c.baseline_terms = split_list(v); },
                [](const PipelineConfig& c) { return join(c.baseline_terms); }},
        EXH_DOUBLE("baseline", "covariate_decay", covariate_decay),
        EXH_INT("baseline", "quadrature_nt", quadrature.nt, int),
        EXH_INT("baseline", "quadrature_nx", quadrature.nx, int),
        EXH_INT("baseline", "quadrature_ny", quadrature.ny, int),

        Binding{"trigger", "kernel",
                [](PipelineConfig& c, const std::string& v) { c.trigger.kernel = gp::CovarianceKernel::parse(v); },
                [](const PipelineConfig& c) { return c.trigger.kernel.describe(); }},
        Binding{"trigger", "grid",
                [](PipelineConfig& c, const std::string& v) {
                  c.trigger.grid = gp::InducingGrid::uniform(to_int<int>(v));
                },
                [](const PipelineConfig& c) { return std::to_string(c.trigger.grid.r_t); }},
        EXH_INT("trigger", "rank", trigger.rank, std::size_t),
        EXH_BOOL("trigger", "fixed_rank", trigger.decompose.fixed_rank),

        EXH_INT("mcmc", "samples", mcmc.n_samples, std::size_t),
        EXH_INT("mcmc", "burn_in", mcmc.burn_in, std::size_t),
        EXH_INT("mcmc", "thin", mcmc.thin, std::size_t),
        EXH_INT("mcmc", "seed", mcmc.seed, std::uint64_t),
        EXH_INT("mcmc", "particles", mcmc.particles, std::size_t),
        EXH_INT("mcmc", "leapfrog", mcmc.leapfrog, int),
        EXH_DOUBLE("mcmc", "step_size", mcmc.step_size),
        EXH_BOOL("mcmc", "adapt_step", mcmc.adapt_step),
        Binding{"mcmc", "momentum",
                [](PipelineConfig& c, const std::string& v) {
                  if (v == "prior") c.mcmc.momentum_from_prior = true;
                  else if (v == "identity") c.mcmc.momentum_from_prior = false;
                  else throw std::invalid_argument("expected one of identity|prior");
                },
                [](const PipelineConfig& c) { return std::string(c.mcmc.momentum_from_prior ? "prior" : "identity"); }},
        EXH_INT("mcmc", "am_start", mcmc.am_start, std::size_t),
        EXH_DOUBLE("mcmc", "am_epsilon", mcmc.am_epsilon),
        EXH_DOUBLE("mcmc", "am_initial_sd", mcmc.am_initial_sd),
        EXH_BOOL("mcmc", "sample_kernel", mcmc.sample_kernel),
        EXH_ENUM("mcmc", "hyper_move", mcmc.hyper_move, kHyperMove),
        EXH_ENUM("mcmc", "baseline_update", mcmc.baseline_update, kBaselineUpdate),
        EXH_DOUBLE("mcmc", "mh_initial_scale", mcmc.mh_initial_scale),
        EXH_INT("mcmc", "adapt_every", mcmc.adapt_every, std::size_t),
        EXH_ENUM("mcmc", "pairs", mcmc.pairs, kPairs),
        EXH_INT("mcmc", "checkpoint_every", mcmc.checkpoint_every, std::size_t),

        EXH_INT("marks", "threshold", marks.spec.u, int),
        EXH_ENUM("marks", "body", marks.spec.body, kBody),
        EXH_ENUM("marks", "tail", marks.spec.tail, kTail),
        EXH_ENUM("marks", "gpd_mode", marks.spec.gpd_mode, kGpdMode),
        EXH_INT("marks", "n_beta", marks.spec.n_beta, std::size_t),
        EXH_INT("marks", "n_xi", marks.spec.n_xi, std::size_t),
        EXH_INT("marks", "n_sigma", marks.spec.n_sigma, std::size_t),
        EXH_STRING("marks", "population_covariate", marks.population_covariate),
        EXH_INT("marks", "samples", marks.mh.n_samples, std::size_t),
        EXH_INT("marks", "burn_in", marks.mh.burn_in, std::size_t),
        EXH_INT("marks", "thin", marks.mh.thin, std::size_t),
        EXH_INT("marks", "seed", marks.mh.seed, std::uint64_t),
        EXH_DOUBLE("marks", "initial_step", marks.mh.initial_step),
        EXH_INT("marks", "adapt_every", marks.mh.adapt_every, std::size_t),
        EXH_INT("marks", "stall_window", marks.mh.stall_window, std::size_t),

        EXH_DOUBLE("simulate", "mu", simulate.mu),
        EXH_DOUBLE("simulate", "a", simulate.a),
        EXH_DOUBLE("simulate", "gamma", simulate.gamma),
        EXH_STRING("simulate", "kernel", simulate.kernel),
        EXH_INT("simulate", "grid", simulate.grid, int),
        EXH_INT("simulate", "rank", simulate.rank, std::size_t),
        EXH_ENUM("simulate", "mode", simulate.mode, kOffspring),
        EXH_DOUBLE("simulate", "nu_min", simulate.nu_min),
        EXH_DOUBLE("simulate", "nu_max", simulate.nu_max),
        EXH_INT("simulate", "nu_sources", simulate.nu_sources, std::size_t),
        EXH_INT("simulate", "max_tries", simulate.max_tries, std::size_t),
        EXH_INT("simulate", "seed", simulate.seed, std::uint64_t),
        EXH_BOOL("simulate", "uniform_marks", simulate.uniform_marks),
        EXH_DOUBLE("simulate", "mark_ceiling", simulate.mark_ceiling),
        EXH_INT("simulate", "integral_particles", simulate.integral_particles, std::size_t),
        EXH_DOUBLE("simulate", "pi_m", simulate.mixture.pi_m),
        EXH_INT("simulate", "threshold", simulate.mixture.u, int),
        EXH_ENUM("simulate", "body", simulate.mixture.body.family, kBody),
        EXH_DOUBLE("simulate", "alpha", simulate.mixture.body.alpha),
        EXH_DOUBLE("simulate", "beta", simulate.mixture.body.beta),
        EXH_DOUBLE("simulate", "r", simulate.mixture.body.r),
        EXH_DOUBLE("simulate", "p", simulate.mixture.body.p),
        EXH_ENUM("simulate", "tail", simulate.mixture.tail.family, kTail),
        EXH_DOUBLE("simulate", "xi", simulate.mixture.tail.xi),
        EXH_DOUBLE("simulate", "sigma", simulate.mixture.tail.sigma),
        EXH_ENUM("simulate", "gpd_mode", simulate.mixture.tail.gpd_mode, kGpdMode),

        EXH_DOUBLE("predict", "dx", predict.grid.dx),
        EXH_DOUBLE("predict", "dy", predict.grid.dy),
        EXH_INT("predict", "time_samples", predict.grid.n_time_samples, std::size_t),
        EXH_INT("predict", "seed", predict.grid.seed, std::uint64_t),
        Binding{"predict", "years",
                [](PipelineConfig& c, const std::string& v) {
                  c.predict.years.clear();
                  for (const auto& s : split_list(v)) c.predict.years.push_back(to_int<int>(s));
                },
                [](const PipelineConfig& c) {
                  std::vector<std::string> s;
                  for (int y : c.predict.years) s.push_back(std::to_string(y));
                  return join(s);
                }},
        EXH_INT("predict", "mark_threshold", predict.mark_threshold, long),
        EXH_ENUM("predict", "estimate", predict.estimate, kEstimate),
        EXH_INT("predict", "max_draws", predict.max_draws, std::size_t),
        EXH_DOUBLE("predict", "horizon_end", predict.horizon_end),
        EXH_ENUM("predict", "ramp", predict.ramp, kRamp),
        EXH_INT("predict", "pixel_size", predict.pixel_size, std::size_t),
    };
    return b;
  }();
  return table;
}

#undef EXH_DOUBLE
#undef EXH_INT
#undef EXH_BOOL
#undef EXH_ENUM
#undef EXH_STRING

const Binding* find_binding(const std::string& section, const std::string& key) {
  for (const auto& b : bindings())
    if (b.section == section && b.key == key) return &b;
  return nullptr;
}

}  // namespace

void PipelineConfig::validate() const {
  ingest.validate();
  if (baseline_terms.empty()) throw std::invalid_argument("baseline.terms is empty");
  if (!(covariate_decay > 0.0)) throw std::invalid_argument("baseline.covariate_decay must be positive");
  if (quadrature.nt < 1 || quadrature.nx < 1 || quadrature.ny < 1)
    throw std::invalid_argument("baseline quadrature sizes must be positive");
  trigger.kernel.validate();
  trigger.grid.validate();
  if (trigger.rank == 0 || trigger.rank > trigger.grid.size())
    throw std::invalid_argument("trigger.rank must lie in [1, grid^3]");
  mcmc.validate();
  marks.spec.validate();
  if (marks.mh.burn_in >= marks.mh.n_samples) throw std::invalid_argument("marks.burn_in must be below marks.samples");
  if (marks.mh.thin == 0) throw std::invalid_argument("marks.thin must be positive");
  if (!(simulate.mu > 0.0) || !(simulate.a > 0.0) || !(simulate.gamma > 0.0))
    throw std::invalid_argument("simulate.mu, a and gamma must be positive");
  gp::CovarianceKernel::parse(simulate.kernel).validate();
  const auto sim_grid = gp::InducingGrid::uniform(simulate.grid);
  sim_grid.validate();
  if (simulate.rank == 0 || simulate.rank > sim_grid.size())
    throw std::invalid_argument("simulate.rank must lie in [1, grid^3]");
  if (!(simulate.nu_min >= 0.0) || !(simulate.nu_max > simulate.nu_min))
    throw std::invalid_argument("simulate.nu_min must be below simulate.nu_max");
  if (simulate.max_tries == 0 || simulate.nu_sources == 0)
    throw std::invalid_argument("simulate.max_tries and nu_sources must be positive");
  if (!(simulate.mark_ceiling > 0.0)) throw std::invalid_argument("simulate.mark_ceiling must be positive");
  if (!simulate.uniform_marks) simulate.mixture.validate();
  if (!(predict.grid.dx > 0.0) || !(predict.grid.dy > 0.0) || predict.grid.n_time_samples == 0)
    throw std::invalid_argument("predict.dx, dy and time_samples must be positive");
  if (predict.max_draws == 0 || predict.pixel_size == 0)
    throw std::invalid_argument("predict.max_draws and pixel_size must be positive");
  if (predict.horizon_end != 0.0 && predict.horizon_end < ingest.end)
    throw std::invalid_argument("predict.horizon_end precedes data.end");
}

PipelineConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument("config: " + e.message() + " at line " + std::to_string(e.line()));
  }
  PipelineConfig config;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) throw std::invalid_argument("config: key '" + section + "' outside a section");
    const bool known = std::any_of(bindings().begin(), bindings().end(), [&](const Binding& b) { return b.section == section; });
    if (!known) throw std::invalid_argument("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      const auto* b = find_binding(section, key);
      if (!b) throw std::invalid_argument("config: unknown key " + section + "." + key);
      try {
        b->set(config, value.data());
      } catch (const std::exception& e) {
        throw std::invalid_argument("config: " + section + "." + key + " = '" + value.data() + "': " + e.what());
      }
    }
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return parse_config(in);
}

std::string to_ini(const PipelineConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& b : bindings()) {
    if (b.section != section) {
      if (!section.empty()) out << "\n";
      section = b.section;
      out << "[" << section << "]\n";
    }
    out << b.key << " = " << b.get(config) << "\n";
  }
  return out.str();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& b : bindings()) keys.push_back(b.section + "." + b.key);
  return keys;
}

}  // namespace exhawkes::io
