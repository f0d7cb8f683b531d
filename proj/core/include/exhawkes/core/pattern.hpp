#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

namespace exhawkes {

using Rng = std::mt19937_64;

struct Point2 {
  double x{0.0};
  double y{0.0};
};

[[nodiscard]] double distance(Point2 a, Point2 b);

// m is the casualty count in original units and lies in [0, 1) on the unit scale.
struct MarkedEvent {
  std::string id;
  double t{0.0};
  Point2 s;
  double m{0.0};
};

struct Interval {
  double lo{0.0};
  double hi{1.0};

  [[nodiscard]] double length() const { return hi - lo; }
  [[nodiscard]] bool contains(double v) const { return v >= lo && v <= hi; }
};

struct ObservationDomain {
  Interval x;
  Interval y;
  Interval t;
  double mark_ceiling{1.0};

  [[nodiscard]] double area() const { return x.length() * y.length(); }
  [[nodiscard]] double duration() const { return t.length(); }
  [[nodiscard]] double volume() const { return area() * duration(); }
  [[nodiscard]] bool contains(const MarkedEvent& e) const;
  [[nodiscard]] bool is_unit() const;
  void validate() const;

  static ObservationDomain unit() { return ObservationDomain{}; }
};

// Events are kept in strictly increasing time order; index order is time order.
class PointPattern {
 public:
  PointPattern() = default;
  PointPattern(std::vector<MarkedEvent> events, ObservationDomain domain);

  [[nodiscard]] const std::vector<MarkedEvent>& events() const { return events_; }
  [[nodiscard]] const ObservationDomain& domain() const { return domain_; }
  [[nodiscard]] std::size_t size() const { return events_.size(); }
  [[nodiscard]] bool empty() const { return events_.empty(); }
  [[nodiscard]] const MarkedEvent& operator[](std::size_t i) const { return events_[i]; }
  [[nodiscard]] std::vector<double> times() const;
  [[nodiscard]] std::vector<double> marks() const;

 private:
  std::vector<MarkedEvent> events_;
  ObservationDomain domain_;
};

}  // namespace exhawkes
