#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "exhawkes/core/log.hpp"
#include "exhawkes/core/scaler.hpp"
#include "exhawkes/core/stats.hpp"
#include "exhawkes/gp/basis.hpp"
#include "exhawkes/gp/trigger.hpp"
#include "exhawkes/inference/diagnostics.hpp"
#include "exhawkes/inference/hybrid.hpp"
#include "exhawkes/io/config.hpp"
#include "exhawkes/io/events.hpp"
#include "exhawkes/marks/fit.hpp"
#include "exhawkes/marks/sampler.hpp"
#include "exhawkes/predict/heatmap.hpp"
#include "exhawkes/predict/predict.hpp"
#include "exhawkes/sim/simulate.hpp"

namespace fs = std::filesystem;

namespace exhawkes::cli {

namespace {

using nlohmann::json;

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void make_dir(const std::string& dir) {
  if (dir.empty()) throw std::invalid_argument("an output directory is required");
  fs::create_directories(dir);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

io::PipelineConfig config_or_default(const std::string& path) {
  return path.empty() ? io::PipelineConfig{} : io::load_config(path);
}

void snapshot(const std::string& dir, io::PipelineConfig& config) {
  config.validate();
  write_text(join_path(dir, "config.ini"), io::to_ini(config));
}

io::IngestResult ingest(const std::string& events, const io::PipelineConfig& config) {
  if (events.empty()) throw std::invalid_argument("an events file is required");
  return io::ingest_events(events, config.ingest);
}

std::map<std::string, baseline::CovariateField> load_fields(const std::string& path, double decay) {
  if (path.empty()) return {};
  const auto records = io::read_covariates(path);
  std::map<std::string, double> decays;
  for (const auto& r : records) decays[r.name] = decay;
  return baseline::build_fields(records, decays);
}

baseline::BaselineDesign make_design(const io::PipelineConfig& config,
                                     const std::map<std::string, baseline::CovariateField>& fields,
                                     const UnitScaler& scaler) {
  std::vector<std::string> needed;
  for (const auto& name : config.baseline_terms) {
    const auto term = baseline::DesignTerm::parse(name);
    if (term.kind == baseline::TermKind::covariate) needed.push_back(term.covariate);
  }
  io::require_covariates(fields, needed);
  return baseline::BaselineDesign::from_names(config.baseline_terms, fields, scaler);
}

bool needs_population(const marks::MarkModelSpec& spec) { return spec.n_beta >= 3 || spec.n_sigma >= 3; }

predict::MarkCovariateFn mark_covariates(const io::PipelineConfig& config,
                                         const std::map<std::string, baseline::CovariateField>& fields,
                                         const UnitScaler& scaler) {
  if (!needs_population(config.marks.spec)) return predict::time_only_covariates();
  const auto& name = config.marks.population_covariate;
  if (name.empty()) throw std::invalid_argument("the mark model uses a population term but marks.population_covariate is empty");
  io::require_covariates(fields, {name});
  return predict::population_covariates(fields.at(name).rescaled(scaler), scaler);
}

std::vector<long> integer_marks(const PointPattern& pattern) {
  std::vector<long> out;
  out.reserve(pattern.size());
  for (const auto& e : pattern.events()) out.push_back(std::lround(e.m));
  return out;
}

json summary_json(const PosteriorChain& chain) {
  json j = json::object();
  const auto s = summarize(chain);
  for (const auto& p : s.parameters)
    j[p.name] = {{"mode", p.mode}, {"mean", p.mean}, {"lower", p.lower}, {"upper", p.upper}};
  return j;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<int> data_years(const io::IngestOptions& o) {
  std::vector<int> years;
  for (int y = static_cast<int>(std::floor(o.start)); y < static_cast<int>(std::ceil(o.end)); ++y) years.push_back(y);
  return years;
}

void write_grid(const std::string& dir, const std::string& stem, const predict::IntensityGrid& grid,
                const io::PredictSettings& settings) {
  predict::write_grid_csv(join_path(dir, stem + ".csv"), std::span<const predict::IntensityGrid>(&grid, 1));
  predict::write_heatmap(join_path(dir, stem + ".ppm"), predict::render_heatmap(grid, settings.ramp, settings.pixel_size),
                         grid);
}

}  // namespace

void run_simulate(const SimulateArgs& args) {
  auto config = config_or_default(args.config);
  if (args.seed) config.simulate.seed = *args.seed;
  const auto& s = config.simulate;
  make_dir(args.out);

  const auto kernel = gp::CovarianceKernel::parse(s.kernel);
  auto basis = std::make_shared<const gp::EigenBasis>(gp::decompose(kernel, gp::InducingGrid::uniform(s.grid), s.rank));
  sim::SimConfig sc;
  sc.mu_constant = s.mu;
  sc.basis = basis;
  sc.trigger.a = s.a;
  sc.trigger.gamma = s.gamma;
  sc.mode = s.mode;
  sc.seed = s.seed;
  sc.integral_particles = s.integral_particles;
  sc.marks.uniform = s.uniform_marks;
  sc.marks.mixture = s.mixture;
  sc.marks.ceiling = s.mark_ceiling;

  // omega from its prior, redrawn until the offspring mean falls in the configured band
  Rng rng(s.seed);
  std::size_t tries = 0;
  sim::OffspringEstimate nu;
  for (;;) {
    if (++tries > s.max_tries)
      throw std::runtime_error("no omega draw in " + std::to_string(s.max_tries) +
                               " tries gave an offspring mean inside [nu_min, nu_max)");
    sc.trigger.omega = gp::sample_omega_prior(*basis, s.a, s.gamma, rng);
    nu = sim::estimate_offspring_mean(sc, rng, s.nu_sources);
    if (nu.mean >= s.nu_min && nu.mean < s.nu_max) break;
  }
  const auto result = sim::simulate_hawkes(sc);

  ObservationDomain original;
  original.x = config.ingest.lon;
  original.y = config.ingest.lat;
  original.t = {config.ingest.start, config.ingest.end};
  original.mark_ceiling = s.mark_ceiling;
  const UnitScaler scaler(original);
  std::vector<MarkedEvent> events;
  for (std::size_t i = 0; i < result.pattern.size(); ++i) {
    auto e = scaler.unscale(result.pattern[i]);
    if (!s.uniform_marks) e.m = double(result.counts[i]);
    events.push_back(std::move(e));
  }
  const PointPattern pattern(std::move(events), original);

  io::write_events_csv(join_path(args.out, "events.csv"), pattern);
  {
    std::ofstream out(join_path(args.out, "parents.csv"), std::ios::binary);
    io::write_parents_csv(out, pattern, result.truth);
  }
  json truth;
  truth["mu"] = s.mu;
  truth["theta_mu"] = std::log(s.mu);
  truth["mu_original_units"] = scaler.unscale_intensity(s.mu);
  truth["a"] = s.a;
  truth["gamma"] = s.gamma;
  truth["log_a"] = std::log(s.a);
  truth["log_gamma"] = std::log(s.gamma);
  truth["kernel"] = kernel.describe();
  const auto names = kernel.hyperparameter_names();
  const auto theta = kernel.log_hyperparameters();
  for (std::size_t i = 0; i < names.size(); ++i) truth[names[i]] = theta[i];
  truth["rank"] = basis->rank();
  truth["omega"] = std::vector<double>(sc.trigger.omega.data(), sc.trigger.omega.data() + sc.trigger.omega.size());
  truth["omega_draws"] = tries;
  truth["offspring_mean"] = {{"mean", nu.mean}, {"standard_error", nu.standard_error}};
  truth["events"] = pattern.size();
  truth["background_events"] = result.background_count;
  truth["supercritical"] = result.supercritical;
  truth["mode"] = s.mode == sim::OffspringMode::chain ? "chain" : "root_relative";
  truth["seed"] = s.seed;
  write_json(join_path(args.out, "truth.json"), truth);
  snapshot(args.out, config);
  log::info("simulate: " + std::to_string(pattern.size()) + " events (" + std::to_string(result.background_count) +
            " background) written to " + args.out);
}

void run_fit_marks(const FitMarksArgs& args) {
  auto config = config_or_default(args.config);
  if (args.threshold) config.marks.spec.u = *args.threshold;
  if (args.samples) config.marks.mh.n_samples = *args.samples;
  if (args.burn_in) config.marks.mh.burn_in = *args.burn_in;
  if (args.thin) config.marks.mh.thin = *args.thin;
  if (args.seed) config.marks.mh.seed = *args.seed;
  if (args.body) config.marks.spec.body = marks::parse_body_family(*args.body);
  if (args.tail) config.marks.spec.tail = marks::parse_tail_family(*args.tail);
  config.validate();
  make_dir(args.out);

  const auto ingested = ingest(args.events, config);
  const auto [unit, scaler] = scale_to_unit(ingested.pattern);
  const auto fields = load_fields(args.covariates, config.covariate_decay);
  const auto cov = mark_covariates(config, fields, scaler);

  marks::MarkData data;
  data.marks = integer_marks(ingested.pattern);
  if (needs_population(config.marks.spec) || config.marks.spec.n_beta >= 2 || config.marks.spec.n_xi >= 2 ||
      config.marks.spec.n_sigma >= 2)
    for (const auto& e : unit.events()) data.covariates.push_back(cov(e.t, e.s));

  const auto chain = marks::mark_mh_sampler(data, config.marks.spec, config.marks.mh);
  write_chain_csv(join_path(args.out, "chain.csv"), chain);
  json summary;
  summary["parameters"] = summary_json(chain);
  summary["dic"] = marks::dic(chain, data, config.marks.spec);
  summary["observations"] = data.marks.size();
  summary["acceptance"] = json::object();
  for (const auto& [block, acc] : chain.acceptance)
    summary["acceptance"][block] = {{"proposed", acc.proposed}, {"accepted", acc.accepted}, {"rate", acc.rate()}};
  write_json(join_path(args.out, "summary.json"), summary);
  write_json(join_path(args.out, "ingest_report.json"), ingested.report.to_json());
  snapshot(args.out, config);
  log::info("fit-marks: " + std::to_string(chain.size()) + " retained draws, DIC " +
            stats::format_double(summary["dic"].get<double>()));
}

void run_select_marks(const SelectMarksArgs& args) {
  const auto config = config_or_default(args.config);
  if (args.out.empty()) throw std::invalid_argument("an output file is required");
  if (args.thresholds.empty()) throw std::invalid_argument("at least one threshold is required");
  const auto ingested = ingest(args.events, config);
  const auto values = integer_marks(ingested.pattern);
  const std::vector<marks::BodyFamily> bodies{marks::BodyFamily::zip, marks::BodyFamily::zinb};
  const std::vector<marks::TailFamily> tails{marks::TailFamily::gzd, marks::TailFamily::gpd};
  marks::MleOptions options;
  options.gpd_mode = config.marks.spec.gpd_mode;
  const auto table = marks::aic_table(values, args.thresholds, bodies, tails, options);

  std::ostringstream out;
  out << "body,tail,u,ok,log_likelihood,n_params,aic,selected,pi_m,alpha,beta,r,p,xi,sigma,message\n";
  for (const auto& row : table) {
    const auto& f = row.fit;
    const auto& m = f.params;
    out << marks::to_string(row.body) << ',' << marks::to_string(row.tail) << ',' << row.u << ','
        << (row.ok ? "true" : "false") << ',';
    if (row.ok)
      out << stats::format_double(f.log_likelihood) << ',' << f.n_params << ',' << stats::format_double(f.aic()) << ','
          << (row.selected ? "true" : "false") << ',' << stats::format_double(m.pi_m) << ','
          << stats::format_double(m.body.alpha) << ',' << stats::format_double(m.body.beta) << ','
          << stats::format_double(m.body.r) << ',' << stats::format_double(m.body.p) << ','
          << stats::format_double(m.tail.xi) << ',' << stats::format_double(m.tail.sigma) << ',';
    else
      out << ",,,false,,,,,,,,";
    std::string message = row.ok ? f.note : row.message;
    std::replace(message.begin(), message.end(), ',', ';');
    out << message << '\n';
  }
  const auto parent = fs::path(args.out).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  write_text(args.out, out.str());
  for (const auto& row : table)
    if (row.selected)
      std::cout << "selected " << marks::to_string(row.body) << '+' << marks::to_string(row.tail) << " u=" << row.u
                << " aic=" << stats::format_double(row.fit.aic()) << '\n';
}

void run_fit_intensity(const FitIntensityArgs& args) {
  auto config = config_or_default(args.config);
  if (args.seed) config.mcmc.seed = *args.seed;
  if (args.samples) config.mcmc.n_samples = *args.samples;
  config.validate();
  make_dir(args.out);

  const auto ingested = ingest(args.events, config);
  const auto [unit, scaler] = scale_to_unit(ingested.pattern);
  const auto fields = load_fields(args.covariates, config.covariate_decay);
  const auto design = make_design(config, fields, scaler);

  auto mcmc = config.mcmc;
  mcmc.checkpoint_path = join_path(args.out, "checkpoint.txt");
  inference::HybridSampler sampler(unit, design, config.trigger, mcmc, config.quadrature);
  if (args.resume && fs::exists(mcmc.checkpoint_path)) {
    sampler.load_checkpoint(mcmc.checkpoint_path);
    log::info("fit-intensity: resuming at iteration " + std::to_string(sampler.iteration()));
  }
  const auto chain = sampler.run();
  sampler.save_checkpoint(mcmc.checkpoint_path);
  write_chain_csv(join_path(args.out, "chain.csv"), chain);
  auto diag = sampler.diagnostics();
  diag["events"] = unit.size();
  diag["domain"] = {{"lon", {scaler.original().x.lo, scaler.original().x.hi}},
                    {"lat", {scaler.original().y.lo, scaler.original().y.hi}},
                    {"time", {scaler.original().t.lo, scaler.original().t.hi}},
                    {"mark_ceiling", scaler.original().mark_ceiling}};
  write_json(join_path(args.out, "diagnostics.json"), diag);
  write_json(join_path(args.out, "ingest_report.json"), ingested.report.to_json());
  snapshot(args.out, config);
  log::info("fit-intensity: " + std::to_string(chain.size()) + " retained draws written to " + args.out);
}

void run_predict(const PredictArgs& args) {
  if (args.chain.empty()) throw std::invalid_argument("a chain directory is required");
  const std::string config_path = args.config.empty() ? join_path(args.chain, "config.ini") : args.config;
  auto config = io::load_config(config_path);
  if (args.years) {
    config.predict.years.clear();
    for (const auto& y : split(*args.years, ',')) config.predict.years.push_back(std::stoi(y));
  }
  if (args.mark_threshold) config.predict.mark_threshold = *args.mark_threshold;
  if (args.grid) {
    const auto parts = split(*args.grid, 'x');
    if (parts.size() != 2) throw std::invalid_argument("--grid expects DXxDY, e.g. 0.06x0.1");
    config.predict.grid.dx = stats::parse_double(parts[0]);
    config.predict.grid.dy = stats::parse_double(parts[1]);
  }
  if (args.horizon) config.predict.horizon_end = *args.horizon;
  if (args.time_samples) config.predict.grid.n_time_samples = *args.time_samples;
  config.validate();
  make_dir(args.out);

  const auto chain = read_chain_csv(join_path(args.chain, "chain.csv"));
  const auto ingested = ingest(args.events, config);
  const auto [unit, scaler] = scale_to_unit(ingested.pattern);
  const auto fields = load_fields(args.covariates, config.covariate_decay);
  const auto design = make_design(config, fields, scaler);
  const auto models = predict::models_from_chain(chain, config.trigger, config.predict.estimate, config.predict.max_draws);
  const predict::PredictContext ctx{&unit, &scaler, &design};

  marks::MarkModel mark_model;
  predict::MarkCovariateFn cov = predict::time_only_covariates();
  json mark_source;
  if (!args.marks.empty()) {
    const auto mark_config = io::load_config(join_path(args.marks, "config.ini"));
    const auto mark_chain = read_chain_csv(join_path(args.marks, "chain.csv"));
    if (mark_chain.empty()) throw std::runtime_error("the mark chain has no rows");
    const auto lp = mark_chain.column("log_post");
    const auto best = static_cast<std::size_t>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    std::vector<double> natural;
    for (const auto& name : marks::mark_parameter_names(mark_config.marks.spec))
      natural.push_back(mark_chain.rows[best][mark_chain.index_of(name)]);
    mark_model = marks::model_from_natural(mark_config.marks.spec, natural);
    auto with_marks = config;
    with_marks.marks = mark_config.marks;
    cov = mark_covariates(with_marks, fields, scaler);
    mark_source = {{"chain", args.marks}, {"row", best}};
  } else {
    const auto fit = marks::mle_fit(integer_marks(ingested.pattern), config.marks.spec.body, config.marks.spec.tail,
                                    config.marks.spec.u, marks::MleOptions{.gpd_mode = config.marks.spec.gpd_mode});
    mark_model = marks::MarkModel::from_mixture(fit.params);
    mark_source = {{"mle", marks::to_string(fit.body) + "+" + marks::to_string(fit.tail)},
                   {"u", fit.u},
                   {"aic", fit.aic()}};
  }

  const auto years = config.predict.years.empty() ? data_years(config.ingest) : config.predict.years;
  const long k = config.predict.mark_threshold;
  json index;
  index["models"] = models.size();
  index["marks"] = mark_source;
  index["mark_threshold"] = k;
  for (const int year : years) {
    const auto yearly = predict::yearly_grid(models, ctx, year, config.predict.grid);
    const auto extreme = predict::extreme_grid(models, ctx, year, k, mark_model, cov, config.predict.grid);
    write_grid(args.out, "yearly_" + std::to_string(year), yearly, config.predict);
    write_grid(args.out, "extreme_" + std::to_string(year), extreme, config.predict);
    index["years"][std::to_string(year)] = {{"yearly_total", yearly.total()}, {"extreme_total", extreme.total()}};
  }
  if (config.predict.horizon_end > 0.0) {
    const auto grids = predict::forecast(models, ctx, config.ingest.end, config.predict.horizon_end, config.predict.grid);
    predict::write_grid_csv(join_path(args.out, "forecast.csv"), grids);
    for (const auto& g : grids) {
      predict::write_heatmap(join_path(args.out, "forecast_" + std::to_string(g.year) + ".ppm"),
                             predict::render_heatmap(g, config.predict.ramp, config.predict.pixel_size), g);
      index["forecast"][std::to_string(g.year)] = g.total();
    }
  }
  write_json(join_path(args.out, "predict.json"), index);
  snapshot(args.out, config);
  log::info("predict: " + std::to_string(years.size()) + " years from " + std::to_string(models.size()) +
            " posterior draws written to " + args.out);
}

void run_diagnose(const DiagnoseArgs& args) {
  if (args.chain.empty()) throw std::invalid_argument("a chain directory is required");
  const std::string out = args.out.empty() ? join_path(args.chain, "diagnose") : args.out;
  make_dir(out);
  const auto chain = read_chain_csv(join_path(args.chain, "chain.csv"));
  const auto diag = inference::chain_diagnostics(chain);
  write_json(join_path(out, "diagnostics.json"), diag);
  inference::write_traces(chain, out);
  std::ostringstream ess;
  ess << "parameter,ess\n";
  for (const auto& [name, value] : diag["ess"].items()) ess << name << ',' << stats::format_double(value.get<double>()) << '\n';
  write_text(join_path(out, "ess.csv"), ess.str());
  log::info("diagnose: " + std::to_string(chain.size()) + " rows, " + std::to_string(chain.names.size()) +
            " columns written to " + out);
}

void run_explore(const ExploreArgs& args) {
  const auto config = config_or_default(args.config);
  make_dir(args.out);
  const auto ingested = ingest(args.events, config);
  auto values = integer_marks(ingested.pattern);
  std::sort(values.begin(), values.end());
  const double n = double(values.size());

  std::map<long, std::size_t> counts;
  for (long v : values) ++counts[v];
  std::ostringstream hist, ecdf;
  hist << "casualties,count,fraction\n";
  ecdf << "casualties,ecdf,survival\n";
  std::size_t cumulative = 0;
  for (const auto& [v, c] : counts) {
    cumulative += c;
    hist << v << ',' << c << ',' << stats::format_double(double(c) / n) << '\n';
    ecdf << v << ',' << stats::format_double(double(cumulative) / n) << ','
         << stats::format_double(1.0 - double(cumulative) / n) << '\n';
  }
  write_text(join_path(args.out, "histogram.csv"), hist.str());
  write_text(join_path(args.out, "ecdf.csv"), ecdf.str());

  std::vector<double> as_double(values.begin(), values.end());
  std::ostringstream q;
  q << "probability,casualties\n";
  for (double p : {0.5, 0.75, 0.9, 0.95, 0.99, 0.999})
    q << stats::format_double(p) << ',' << stats::format_double(stats::quantile(as_double, p)) << '\n';
  write_text(join_path(args.out, "quantiles.csv"), q.str());

  std::map<int, std::pair<std::size_t, double>> per_year;
  for (const auto& e : ingested.pattern.events()) {
    auto& slot = per_year[static_cast<int>(std::floor(e.t))];
    ++slot.first;
    slot.second += e.m;
  }
  std::ostringstream yearly;
  yearly << "year,events,casualties\n";
  for (const auto& [y, v] : per_year) yearly << y << ',' << v.first << ',' << stats::format_double(v.second) << '\n';
  write_text(join_path(args.out, "yearly_counts.csv"), yearly.str());
  write_json(join_path(args.out, "ingest_report.json"), ingested.report.to_json());
  log::info("explore: " + std::to_string(values.size()) + " events summarized in " + args.out);
}

}  // namespace exhawkes::cli
