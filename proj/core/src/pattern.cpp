#include "exhawkes/core/pattern.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace exhawkes {

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool ObservationDomain::contains(const MarkedEvent& e) const {
  return x.contains(e.s.x) && y.contains(e.s.y) && t.contains(e.t);
}

bool ObservationDomain::is_unit() const {
  return x.lo == 0.0 && x.hi == 1.0 && y.lo == 0.0 && y.hi == 1.0 && t.lo == 0.0 && t.hi == 1.0 &&
         mark_ceiling == 1.0;
}

void ObservationDomain::validate() const {
  auto check = [](const Interval& iv, const char* axis) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.hi > iv.lo))
      throw std::invalid_argument(std::string("degenerate domain on axis ") + axis);
  };
  check(x, "x");
  check(y, "y");
  check(t, "t");
  if (!std::isfinite(mark_ceiling) || !(mark_ceiling > 0.0))
    throw std::invalid_argument("mark ceiling must be positive");
}

PointPattern::PointPattern(std::vector<MarkedEvent> events, ObservationDomain domain)
    : events_(std::move(events)), domain_(domain) {
  domain_.validate();
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    if (!std::isfinite(e.t) || !std::isfinite(e.s.x) || !std::isfinite(e.s.y) || !std::isfinite(e.m))
      throw std::invalid_argument("non-finite event coordinate at index " + std::to_string(i));
    if (e.m < 0.0) throw std::invalid_argument("negative mark at index " + std::to_string(i));
    if (!domain_.contains(e))
      throw std::invalid_argument("event outside the observation domain at index " + std::to_string(i));
    if (i > 0 && !(e.t > events_[i - 1].t))
      throw std::invalid_argument("timestamps must be strictly increasing (index " + std::to_string(i) + ")");
  }
}

std::vector<double> PointPattern::times() const {
  std::vector<double> out;
  out.reserve(events_.size());
  for (const auto& e : events_) out.push_back(e.t);
  return out;
}

std::vector<double> PointPattern::marks() const {
  std::vector<double> out;
  out.reserve(events_.size());
  for (const auto& e : events_) out.push_back(e.m);
  return out;
}

}  // namespace exhawkes
