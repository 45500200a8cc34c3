#pragma once

#include <optional>
#include <string>
#include <vector>

namespace krein::svg {

/// One polyline; NaN samples split it into separate path segments.
struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f6feb";
  bool dashed = false;  ///< rendered with a dash pattern (negative-signature branches)
  std::string label;    ///< legend entry when non-empty
};

enum class MarkerShape { Circle, Cross, Square };

struct Marker {
  double x = 0;
  double y = 0;
  MarkerShape shape = MarkerShape::Circle;
  std::string color = "#d1242f";
  std::string label;  ///< legend entry when non-empty
};

struct AxisBounds {
  double lo = 0;
  double hi = 1;
};

struct Figure {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<Series> series;
  std::vector<Marker> markers;
  int width = 640;
  int height = 420;
  std::optional<AxisBounds> x_bounds;  ///< autoscaled from the data when unset
  std::optional<AxisBounds> y_bounds;
};

/// Standalone SVG document. Deterministic: same figure, same bytes.
std::string render(const Figure& figure);

/// One SVG document with the figures stacked top to bottom.
std::string render_panels(const std::vector<Figure>& figures);

}  // namespace krein::svg
