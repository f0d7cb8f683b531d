#pragma once

#include <map>
#include <string>
#include <vector>

#include "exhawkes/core/pattern.hpp"
#include "exhawkes/core/scaler.hpp"

namespace exhawkes::baseline {

// Point measurements of one covariate: value at (location, year).
struct CovariateRecord {
  std::string name;
  Point2 location;  // x = longitude, y = latitude in original units
  int year{0};
  double value{0.0};
};

struct CovariateSite {
  Point2 location;
  std::map<int, double> by_year;
};

// Value at s and time: nearest measured site, multiplied by exp(-decay * distance),
// linearly interpolated between measured years and carried flat outside them.
class CovariateField {
 public:
  CovariateField() = default;
  CovariateField(std::string name, std::vector<CovariateSite> sites, double decay = 1.0);

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] double decay() const { return decay_; }
  [[nodiscard]] const std::vector<CovariateSite>& sites() const { return sites_; }
  [[nodiscard]] double value(Point2 s, double year) const;
  [[nodiscard]] double site_value(const CovariateSite& site, double year) const;
  [[nodiscard]] std::size_t nearest(Point2 s) const;
  // same field with site locations mapped to the unit square of the scaler
  [[nodiscard]] CovariateField rescaled(const UnitScaler& scaler) const;

 private:
  std::string name_;
  std::vector<CovariateSite> sites_;
  double decay_{1.0};
};

// Groups records by name and location; sites are ordered by first appearance.
[[nodiscard]] std::map<std::string, CovariateField> build_fields(const std::vector<CovariateRecord>& records,
                                                                const std::map<std::string, double>& decay = {});

}  // namespace exhawkes::baseline
