#include "exhawkes/predict/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace exhawkes::predict {

std::array<std::uint8_t, 3> heat_color(double v) {
  v = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
  const auto byte = [](double x) { return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(x, 0.0, 1.0))); };
  return {byte(3.0 * v), byte(3.0 * v - 1.0), byte(3.0 * v - 2.0)};
}

Heatmap render_heatmap(const IntensityGrid& grid, ColorRamp ramp, std::size_t pixel_size) {
  if (pixel_size == 0) throw std::invalid_argument("pixel_size must be positive");
  if (grid.values.size() != grid.nx * grid.ny) throw std::invalid_argument("grid values do not match its shape");
  Heatmap map;
  map.ramp = ramp;
  map.width = grid.nx * pixel_size;
  map.height = grid.ny * pixel_size;
  const auto mapped = [ramp](double v) {
    if (ramp == ColorRamp::linear) return v;
    return v > 0.0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN();
  };
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const double v : grid.values) {
    const double m = mapped(v);
    if (!std::isfinite(m)) continue;
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  map.min = lo;
  map.max = hi;
  map.rgb.assign(map.width * map.height * 3, 0);
  for (std::size_t row = 0; row < map.height; ++row) {
    const std::size_t iy = grid.ny - 1 - row / pixel_size;
    for (std::size_t col = 0; col < map.width; ++col) {
      const double m = mapped(grid.at(col / pixel_size, iy));
      const double v = !std::isfinite(m) ? 0.0 : (hi > lo ? (m - lo) / (hi - lo) : 0.0);
      const auto c = heat_color(v);
      std::copy(c.begin(), c.end(), map.rgb.begin() + static_cast<std::ptrdiff_t>((row * map.width + col) * 3));
    }
  }
  return map;
}

nlohmann::json heatmap_metadata(const Heatmap& map, const IntensityGrid& grid) {
  nlohmann::json j;
  j["width"] = map.width;
  j["height"] = map.height;
  j["ramp"] = map.ramp == ColorRamp::linear ? "linear" : "log10";
  j["min"] = map.min;
  j["max"] = map.max;
  j["year"] = grid.year;
  j["x0"] = grid.x0;
  j["y0"] = grid.y0;
  j["dx"] = grid.dx;
  j["dy"] = grid.dy;
  j["nx"] = grid.nx;
  j["ny"] = grid.ny;
  j["threshold"] = grid.threshold ? nlohmann::json(*grid.threshold) : nlohmann::json(nullptr);
  return j;
}

void write_heatmap(const std::string& path, const Heatmap& map, const IntensityGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "P6\n" << map.width << ' ' << map.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(map.rgb.data()), static_cast<std::streamsize>(map.rgb.size()));
  std::ofstream side(path + ".json");
  if (!side) throw std::runtime_error("cannot write " + path + ".json");
  side << heatmap_metadata(map, grid).dump(2) << '\n';
}

}  // namespace exhawkes::predict
