#pragma once

#include <utility>

#include "exhawkes/core/pattern.hpp"

namespace exhawkes {

// Affine map from the observation domain onto the unit hypercube. Marks are
// divided by the domain's mark ceiling.
class UnitScaler {
 public:
  UnitScaler() = default;
  explicit UnitScaler(const ObservationDomain& original);

  [[nodiscard]] double scale_time(double t) const;
  [[nodiscard]] double unscale_time(double u) const;
  [[nodiscard]] Point2 scale_point(Point2 s) const;
  [[nodiscard]] Point2 unscale_point(Point2 s) const;
  [[nodiscard]] double scale_mark(double m) const;
  [[nodiscard]] double unscale_mark(double m) const;
  [[nodiscard]] MarkedEvent scale(const MarkedEvent& e) const;
  [[nodiscard]] MarkedEvent unscale(const MarkedEvent& e) const;

  // rate per unit hypercube volume -> rate per original area per original time unit
  [[nodiscard]] double unscale_intensity(double rate) const;
  [[nodiscard]] double volume() const { return original_.volume(); }
  [[nodiscard]] const ObservationDomain& original() const { return original_; }
  [[nodiscard]] bool is_identity() const;

 private:
  ObservationDomain original_;
};

[[nodiscard]] std::pair<PointPattern, UnitScaler> scale_to_unit(const PointPattern& pattern);
[[nodiscard]] PointPattern unscale_pattern(const PointPattern& unit, const UnitScaler& scaler);

}  // namespace exhawkes
