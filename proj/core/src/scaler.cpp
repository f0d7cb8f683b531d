#include "exhawkes/core/scaler.hpp"

namespace exhawkes {

UnitScaler::UnitScaler(const ObservationDomain& original) : original_(original) { original_.validate(); }

double UnitScaler::scale_time(double t) const { return (t - original_.t.lo) / original_.t.length(); }
double UnitScaler::unscale_time(double u) const { return original_.t.lo + u * original_.t.length(); }

Point2 UnitScaler::scale_point(Point2 s) const {
  return {(s.x - original_.x.lo) / original_.x.length(), (s.y - original_.y.lo) / original_.y.length()};
}

Point2 UnitScaler::unscale_point(Point2 s) const {
  return {original_.x.lo + s.x * original_.x.length(), original_.y.lo + s.y * original_.y.length()};
}

double UnitScaler::scale_mark(double m) const { return m / original_.mark_ceiling; }
double UnitScaler::unscale_mark(double m) const { return m * original_.mark_ceiling; }

MarkedEvent UnitScaler::scale(const MarkedEvent& e) const {
  return {e.id, scale_time(e.t), scale_point(e.s), scale_mark(e.m)};
}

MarkedEvent UnitScaler::unscale(const MarkedEvent& e) const {
  return {e.id, unscale_time(e.t), unscale_point(e.s), unscale_mark(e.m)};
}

double UnitScaler::unscale_intensity(double rate) const { return rate / original_.volume(); }

bool UnitScaler::is_identity() const { return original_.is_unit(); }

std::pair<PointPattern, UnitScaler> scale_to_unit(const PointPattern& pattern) {
  UnitScaler scaler(pattern.domain());
  std::vector<MarkedEvent> events;
  events.reserve(pattern.size());
  for (const auto& e : pattern.events()) events.push_back(scaler.scale(e));
  return {PointPattern(std::move(events), ObservationDomain::unit()), scaler};
}

PointPattern unscale_pattern(const PointPattern& unit, const UnitScaler& scaler) {
  std::vector<MarkedEvent> events;
  events.reserve(unit.size());
  for (const auto& e : unit.events()) events.push_back(scaler.unscale(e));
  return PointPattern(std::move(events), scaler.original());
}

}  // namespace exhawkes
