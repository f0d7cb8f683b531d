#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exhawkes/baseline/baseline.hpp"
#include "exhawkes/core/chain.hpp"
#include "exhawkes/core/pattern.hpp"
#include "exhawkes/core/scaler.hpp"
#include "exhawkes/gp/basis.hpp"
#include "exhawkes/gp/trigger.hpp"
#include "exhawkes/inference/hybrid.hpp"
#include "exhawkes/marks/links.hpp"

namespace exhawkes::predict {

// Intensity parameters on the unit scale. A null basis or an empty omega disables triggering.
struct IntensityModel {
  Eigen::VectorXd theta_mu;
  gp::TriggerParams trigger;
  std::shared_ptr<const gp::EigenBasis> basis;
};

// mu*(s, t) + sum_i phi(t - t_i, |s - s_i|, m_i) on the unit scale. phi_marks, when
// non-empty, replaces the marks of the history (root-mark convention). Throws
// std::invalid_argument when a history event is not strictly before t.
[[nodiscard]] double conditional_intensity(double t, Point2 s, std::span<const MarkedEvent> history,
                                           const IntensityModel& model, const baseline::BaselineDesign& design,
                                           std::span<const double> phi_marks = {});

enum class ChainEstimate { average, mode };

// Models of the retained rows of an intensity chain. average: up to max_draws rows evenly
// spaced over the chain (0 keeps all); mode: the row with the highest log_post. Bases are
// shared between rows with equal kernel hyperparameters.
[[nodiscard]] std::vector<IntensityModel> models_from_chain(const PosteriorChain& chain,
                                                            const inference::TriggerSpec& trigger,
                                                            ChainEstimate estimate = ChainEstimate::average,
                                                            std::size_t max_draws = 0);

struct GridSpec {
  double dx{0.06};  // cell width in original x units (longitude)
  double dy{0.1};   // cell height in original y units (latitude)
  std::size_t n_time_samples{128};
  std::uint64_t seed{1};
};

// Per-pixel yearly average intensity in events per original area per year. Row iy = 0 is
// the lowest y; values are stored row-major.
struct IntensityGrid {
  double x0{0.0};
  double y0{0.0};
  double dx{0.06};
  double dy{0.1};
  std::size_t nx{0};
  std::size_t ny{0};
  int year{0};
  bool log_scale{false};
  std::optional<long> threshold;
  std::vector<double> values;
  std::vector<double> errors;  // Monte Carlo standard error over time samples

  [[nodiscard]] Point2 center(std::size_t ix, std::size_t iy) const;
  [[nodiscard]] double at(std::size_t ix, std::size_t iy) const { return values[iy * nx + ix]; }
  [[nodiscard]] double cell_area() const { return dx * dy; }
  [[nodiscard]] double total() const;  // sum of values times cell area
};

// Empty grid covering the spatial extent of the original domain.
[[nodiscard]] IntensityGrid make_grid(const ObservationDomain& original, const GridSpec& spec);

// Mark covariates at a unit-scale time and location.
using MarkCovariateFn = std::function<marks::MarkCovariates(double t, Point2 s)>;
// (t, 0, 0)
[[nodiscard]] MarkCovariateFn time_only_covariates();
// population of the nearest site of a unit-scale field and the distance to it
[[nodiscard]] MarkCovariateFn population_covariates(baseline::CovariateField unit_field, UnitScaler scaler);

struct PredictContext {
  const PointPattern* unit_pattern{nullptr};
  const UnitScaler* scaler{nullptr};
  const baseline::BaselineDesign* design{nullptr};
};

// Average of the model-averaged intensity over uniform time draws within [year, year + 1)
// in original time units, at pixel centres. The same time draws are used for every pixel
// and every model, so the chain grid is exactly the mean of the per-model grids.
[[nodiscard]] IntensityGrid yearly_grid(std::span<const IntensityModel> models, const PredictContext& context,
                                        int year, const GridSpec& spec);

// As yearly_grid with the intensity at each time draw multiplied by P(M >= k) of the mark
// model at that time and the pixel centre. k is in casualties.
[[nodiscard]] IntensityGrid extreme_grid(std::span<const IntensityModel> models, const PredictContext& context,
                                         int year, long k, const marks::MarkModel& marks,
                                         const MarkCovariateFn& covariates, const GridSpec& spec);

// Calendar years from the one holding the end of the data to the one holding horizon_end,
// both ends exclusive in time (2019.0 belongs to 2018). Throws std::invalid_argument when
// horizon_end precedes data_end.
[[nodiscard]] std::vector<int> forecast_years(double data_end, double horizon_end);

// Yearly grids over forecast_years; triggering comes from the observed events of the
// context only, with no simulated future events.
[[nodiscard]] std::vector<IntensityGrid> forecast(std::span<const IntensityModel> models, const PredictContext& context,
                                                  double data_end, double horizon_end, const GridSpec& spec);

// CSV with header lon,lat,year,intensity,log_intensity, one row per pixel.
void write_grid_csv(std::ostream& out, std::span<const IntensityGrid> grids);
void write_grid_csv(const std::string& path, std::span<const IntensityGrid> grids);
// Reads (lon, lat, year, intensity) rows back; cell sizes are inferred from the centres.
[[nodiscard]] std::vector<IntensityGrid> read_grid_csv(std::istream& in);

}  // namespace exhawkes::predict
