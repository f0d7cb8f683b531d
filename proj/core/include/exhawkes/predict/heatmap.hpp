#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "exhawkes/predict/predict.hpp"

namespace exhawkes::predict {

enum class ColorRamp { linear, log };

struct Heatmap {
  std::size_t width{0};
  std::size_t height{0};
  std::vector<std::uint8_t> rgb;  // row-major from the top row (highest y)
  double min{0.0};                // range of the mapped values before normalization
  double max{0.0};
  ColorRamp ramp{ColorRamp::linear};
};

// Black, red, yellow, white ramp for v in [0, 1].
[[nodiscard]] std::array<std::uint8_t, 3> heat_color(double v);

// log ramp maps log10 of positive values; zero pixels take the lowest color.
[[nodiscard]] Heatmap render_heatmap(const IntensityGrid& grid, ColorRamp ramp, std::size_t pixel_size = 1);

// Binary PPM (P6) plus a JSON sidecar at path + ".json" holding the range and grid metadata.
void write_heatmap(const std::string& path, const Heatmap& map, const IntensityGrid& grid);
[[nodiscard]] nlohmann::json heatmap_metadata(const Heatmap& map, const IntensityGrid& grid);

}  // namespace exhawkes::predict
