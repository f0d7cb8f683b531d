#include "exhawkes/predict/predict.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "exhawkes/core/stats.hpp"
#include "exhawkes/marks/distributions.hpp"

namespace exhawkes::predict {

double conditional_intensity(double t, Point2 s, std::span<const MarkedEvent> history, const IntensityModel& model,
                             const baseline::BaselineDesign& design, std::span<const double> phi_marks) {
  if (!phi_marks.empty() && phi_marks.size() != history.size())
    throw std::invalid_argument("phi_marks must match the history length");
  for (const auto& e : history)
    if (!(e.t < t)) throw std::invalid_argument("history event at or after the evaluation time");
  double lambda = baseline::mu_star(t, s, model.theta_mu, design);
  if (!model.basis || model.trigger.omega.size() == 0 || history.empty()) return lambda;
  std::vector<gp::TriggerInput> xs;
  xs.reserve(history.size());
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& e = history[i];
    xs.push_back({t - e.t, distance(s, e.s), phi_marks.empty() ? e.m : phi_marks[i]});
  }
  Eigen::MatrixXd features;
  model.basis->features(xs, features);
  const Eigen::VectorXd f = features * model.trigger.omega;
  return lambda + model.trigger.a * f.squaredNorm();
}

namespace {

std::vector<std::size_t> columns_with_prefix(const PosteriorChain& chain, const std::string& prefix) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < chain.names.size(); ++c)
    if (chain.names[c].rfind(prefix, 0) == 0) out.push_back(c);
  return out;
}

}  // namespace

std::vector<IntensityModel> models_from_chain(const PosteriorChain& chain, const inference::TriggerSpec& trigger,
                                              ChainEstimate estimate, std::size_t max_draws) {
  if (chain.empty()) throw std::invalid_argument("the intensity chain has no retained rows");
  const auto mu_cols = columns_with_prefix(chain, "theta_mu_");
  const auto omega_cols = columns_with_prefix(chain, "omega_");
  if (mu_cols.empty()) throw std::invalid_argument("the chain has no theta_mu columns");
  if (omega_cols.size() != trigger.rank) throw std::invalid_argument("omega columns do not match the trigger rank");
  const std::size_t log_a = chain.index_of("log_a");
  std::vector<std::size_t> k_cols;
  for (const auto& n : trigger.kernel.hyperparameter_names()) k_cols.push_back(chain.index_of(n));

  std::vector<std::size_t> rows;
  if (estimate == ChainEstimate::mode) {
    const std::size_t lp = chain.index_of("log_post");
    std::size_t best = 0;
    for (std::size_t r = 1; r < chain.size(); ++r)
      if (chain.rows[r][lp] > chain.rows[best][lp]) best = r;
    rows.push_back(best);
  } else if (max_draws == 0 || max_draws >= chain.size()) {
    for (std::size_t r = 0; r < chain.size(); ++r) rows.push_back(r);
  } else {
    for (std::size_t i = 0; i < max_draws; ++i) rows.push_back(i * chain.size() / max_draws);
  }

  gp::DecomposeOptions options = trigger.decompose;
  options.fixed_rank = true;
  std::map<std::vector<double>, std::shared_ptr<const gp::EigenBasis>> bases;
  std::vector<IntensityModel> models;
  models.reserve(rows.size());
  for (const std::size_t r : rows) {
    const auto& row = chain.rows[r];
    IntensityModel m;
    m.theta_mu.resize(static_cast<Eigen::Index>(mu_cols.size()));
    for (std::size_t i = 0; i < mu_cols.size(); ++i) m.theta_mu[static_cast<Eigen::Index>(i)] = row[mu_cols[i]];
    m.trigger.omega.resize(static_cast<Eigen::Index>(omega_cols.size()));
    for (std::size_t i = 0; i < omega_cols.size(); ++i) m.trigger.omega[static_cast<Eigen::Index>(i)] = row[omega_cols[i]];
    m.trigger.a = std::exp(row[log_a]);
    std::vector<double> theta_k;
    for (const std::size_t c : k_cols) theta_k.push_back(row[c]);
    auto& basis = bases[theta_k];
    if (!basis)
      basis = std::make_shared<const gp::EigenBasis>(
          gp::decompose(trigger.kernel.with_log_hyperparameters(theta_k), trigger.grid, trigger.rank, options));
    m.basis = basis;
    models.push_back(std::move(m));
  }
  return models;
}

Point2 IntensityGrid::center(std::size_t ix, std::size_t iy) const {
  return {x0 + (double(ix) + 0.5) * dx, y0 + (double(iy) + 0.5) * dy};
}

double IntensityGrid::total() const {
  double s = 0.0;
  for (const double v : values) s += v;
  return s * cell_area();
}

IntensityGrid make_grid(const ObservationDomain& original, const GridSpec& spec) {
  if (!(spec.dx > 0.0) || !(spec.dy > 0.0)) throw std::invalid_argument("grid cells must have positive size");
  if (spec.n_time_samples == 0) throw std::invalid_argument("n_time_samples must be positive");
  IntensityGrid g;
  g.x0 = original.x.lo;
  g.y0 = original.y.lo;
  g.dx = spec.dx;
  g.dy = spec.dy;
  g.nx = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(original.x.length() / spec.dx - 1e-9)));
  g.ny = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(original.y.length() / spec.dy - 1e-9)));
  g.values.assign(g.nx * g.ny, 0.0);
  g.errors.assign(g.nx * g.ny, 0.0);
  return g;
}

MarkCovariateFn time_only_covariates() {
  return [](double t, Point2) { return marks::MarkCovariates{t, 0.0, 0.0}; };
}

MarkCovariateFn population_covariates(baseline::CovariateField unit_field, UnitScaler scaler) {
  if (unit_field.sites().empty()) throw std::invalid_argument("the population field has no sites");
  return [field = std::move(unit_field), scaler = std::move(scaler)](double t, Point2 s) {
    const auto& site = field.sites()[field.nearest(s)];
    return marks::MarkCovariates{t, field.site_value(site, scaler.unscale_time(t)), distance(s, site.location)};
  };
}

namespace {

using PixelWeight = std::function<double(double t, Point2 s)>;

IntensityGrid average_grid(std::span<const IntensityModel> models, const PredictContext& context, int year,
                           const GridSpec& spec, const PixelWeight& weight) {
  if (!context.unit_pattern || !context.scaler || !context.design) throw std::invalid_argument("incomplete context");
  if (models.empty()) throw std::invalid_argument("no intensity models");
  const auto& scaler = *context.scaler;
  const auto& events = context.unit_pattern->events();
  IntensityGrid grid = make_grid(scaler.original(), spec);
  grid.year = year;

  std::seed_seq seq{static_cast<std::uint64_t>(spec.seed), static_cast<std::uint64_t>(static_cast<std::int64_t>(year))};
  Rng rng(seq);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const std::size_t k = spec.n_time_samples;
  std::vector<double> times(k);
  std::vector<std::size_t> prefix(k);
  for (std::size_t i = 0; i < k; ++i) {
    times[i] = scaler.scale_time(double(year) + u01(rng));
    const auto it = std::lower_bound(events.begin(), events.end(), times[i],
                                     [](const MarkedEvent& e, double t) { return e.t < t; });
    prefix[i] = static_cast<std::size_t>(it - events.begin());
  }

  std::vector<double> draws(k);
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      const Point2 s = scaler.scale_point(grid.center(ix, iy));
      for (std::size_t i = 0; i < k; ++i) {
        const std::span<const MarkedEvent> history(events.data(), prefix[i]);
        double lambda = 0.0;
        for (const auto& m : models) lambda += conditional_intensity(times[i], s, history, m, *context.design);
        lambda /= double(models.size());
        draws[i] = weight ? lambda * weight(times[i], s) : lambda;
      }
      const double mean = stats::mean(draws);
      const double se = k > 1 ? std::sqrt(stats::variance(draws) / double(k)) : 0.0;
      grid.values[iy * grid.nx + ix] = scaler.unscale_intensity(mean);
      grid.errors[iy * grid.nx + ix] = scaler.unscale_intensity(se);
    }
  }
  return grid;
}

}  // namespace

IntensityGrid yearly_grid(std::span<const IntensityModel> models, const PredictContext& context, int year,
                          const GridSpec& spec) {
  return average_grid(models, context, year, spec, {});
}

IntensityGrid extreme_grid(std::span<const IntensityModel> models, const PredictContext& context, int year, long k,
                           const marks::MarkModel& marks, const MarkCovariateFn& covariates, const GridSpec& spec) {
  PixelWeight weight;
  if (k > 0) {
    const MarkCovariateFn cov = covariates ? covariates : time_only_covariates();
    weight = [&marks, cov, k](double t, Point2 s) { return marks::prob_mark_at_least(k, marks.resolve(cov(t, s))); };
  }
  IntensityGrid grid = average_grid(models, context, year, spec, weight);
  grid.threshold = k;
  return grid;
}

std::vector<int> forecast_years(double data_end, double horizon_end) {
  if (horizon_end < data_end) throw std::invalid_argument("forecast horizon precedes the end of the data");
  const int first = static_cast<int>(std::ceil(data_end)) - 1;
  const int last = std::max(first, static_cast<int>(std::ceil(horizon_end)) - 1);
  std::vector<int> years;
  for (int y = first; y <= last; ++y) years.push_back(y);
  return years;
}

std::vector<IntensityGrid> forecast(std::span<const IntensityModel> models, const PredictContext& context,
                                    double data_end, double horizon_end, const GridSpec& spec) {
  std::vector<IntensityGrid> grids;
  for (const int y : forecast_years(data_end, horizon_end)) grids.push_back(yearly_grid(models, context, y, spec));
  return grids;
}

void write_grid_csv(std::ostream& out, std::span<const IntensityGrid> grids) {
  out << "lon,lat,year,intensity,log_intensity\n";
  for (const auto& g : grids)
    for (std::size_t iy = 0; iy < g.ny; ++iy)
      for (std::size_t ix = 0; ix < g.nx; ++ix) {
        const Point2 c = g.center(ix, iy);
        const double v = g.at(ix, iy);
        out << stats::format_double(c.x) << ',' << stats::format_double(c.y) << ',' << g.year << ','
            << stats::format_double(v) << ',' << stats::format_double(std::log(v)) << '\n';
      }
}

void write_grid_csv(const std::string& path, std::span<const IntensityGrid> grids) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_grid_csv(out, grids);
}

std::vector<IntensityGrid> read_grid_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("lon,lat,year,intensity", 0) != 0)
    throw std::runtime_error("grid CSV header must start with lon,lat,year,intensity");
  struct Cell {
    double x, y, v;
  };
  std::map<int, std::vector<Cell>> by_year;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c, d;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',') || !std::getline(ss, d, ','))
      throw std::runtime_error("malformed grid row: " + line);
    by_year[std::stoi(c)].push_back({stats::parse_double(a), stats::parse_double(b), stats::parse_double(d)});
  }
  std::vector<IntensityGrid> grids;
  for (auto& [year, cells] : by_year) {
    std::set<double> xs, ys;
    for (const auto& cell : cells) {
      xs.insert(cell.x);
      ys.insert(cell.y);
    }
    IntensityGrid g;
    g.year = year;
    g.nx = xs.size();
    g.ny = ys.size();
    if (g.nx * g.ny != cells.size()) throw std::runtime_error("grid CSV rows do not form a full grid");
    g.dx = g.nx > 1 ? (*xs.rbegin() - *xs.begin()) / double(g.nx - 1) : 1.0;
    g.dy = g.ny > 1 ? (*ys.rbegin() - *ys.begin()) / double(g.ny - 1) : 1.0;
    g.x0 = *xs.begin() - 0.5 * g.dx;
    g.y0 = *ys.begin() - 0.5 * g.dy;
    const std::vector<double> xv(xs.begin(), xs.end()), yv(ys.begin(), ys.end());
    g.values.assign(cells.size(), 0.0);
    g.errors.assign(cells.size(), 0.0);
    for (const auto& cell : cells) {
      const auto ix = static_cast<std::size_t>(std::lower_bound(xv.begin(), xv.end(), cell.x) - xv.begin());
      const auto iy = static_cast<std::size_t>(std::lower_bound(yv.begin(), yv.end(), cell.y) - yv.begin());
      g.values[iy * g.nx + ix] = cell.v;
    }
    grids.push_back(std::move(g));
  }
  return grids;
}

}  // namespace exhawkes::predict
