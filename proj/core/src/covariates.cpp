#include "exhawkes/baseline/covariates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace exhawkes::baseline {

CovariateField::CovariateField(std::string name, std::vector<CovariateSite> sites, double decay)
    : name_(std::move(name)), sites_(std::move(sites)), decay_(decay) {
  if (sites_.empty()) throw std::invalid_argument("covariate '" + name_ + "' has no measurement location");
  for (const auto& s : sites_) {
    if (s.by_year.empty()) throw std::invalid_argument("covariate '" + name_ + "' has a site without values");
    for (const auto& [y, v] : s.by_year)
      if (!std::isfinite(v)) throw std::invalid_argument("covariate '" + name_ + "' has a non-finite value");
  }
  if (!(decay_ >= 0.0) || !std::isfinite(decay_)) throw std::invalid_argument("covariate decay must be >= 0");
}

std::size_t CovariateField::nearest(Point2 s) const {
  std::size_t best = 0;
  double best_d = distance(s, sites_[0].location);
  for (std::size_t i = 1; i < sites_.size(); ++i) {
    const double d = distance(s, sites_[i].location);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

double CovariateField::site_value(const CovariateSite& site, double year) const {
  const auto& m = site.by_year;
  if (year <= m.begin()->first) return m.begin()->second;
  if (year >= m.rbegin()->first) return m.rbegin()->second;
  auto hi = m.upper_bound(static_cast<int>(std::floor(year)));
  auto lo = std::prev(hi);
  const double w = (year - lo->first) / double(hi->first - lo->first);
  return (1.0 - w) * lo->second + w * hi->second;
}

double CovariateField::value(Point2 s, double year) const {
  const CovariateSite& site = sites_[nearest(s)];
  return site_value(site, year) * std::exp(-decay_ * distance(s, site.location));
}

CovariateField CovariateField::rescaled(const UnitScaler& scaler) const {
  std::vector<CovariateSite> sites = sites_;
  for (auto& s : sites) s.location = scaler.scale_point(s.location);
  return CovariateField(name_, std::move(sites), decay_);
}

std::map<std::string, CovariateField> build_fields(const std::vector<CovariateRecord>& records,
                                                   const std::map<std::string, double>& decay) {
  std::map<std::string, std::vector<CovariateSite>> grouped;
  for (const auto& r : records) {
    auto& sites = grouped[r.name];
    auto it = std::find_if(sites.begin(), sites.end(), [&](const CovariateSite& s) {
      return s.location.x == r.location.x && s.location.y == r.location.y;
    });
    if (it == sites.end()) {
      sites.push_back(CovariateSite{r.location, {}});
      it = std::prev(sites.end());
    }
    if (!it->by_year.emplace(r.year, r.value).second)
      throw std::invalid_argument("covariate '" + r.name + "' has two values for year " + std::to_string(r.year));
  }
  std::map<std::string, CovariateField> out;
  for (auto& [name, sites] : grouped) {
    auto d = decay.find(name);
    out.emplace(name, CovariateField(name, std::move(sites), d == decay.end() ? 1.0 : d->second));
  }
  return out;
}

}  // namespace exhawkes::baseline
