#pragma once

namespace hierdet {

/// Axis-aligned box, (x, y) top-left corner, extents in pixels.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const Box&, const Box&) = default;
};

/// Intersection over union; 0 when the union is empty. Throws
/// std::invalid_argument on negative extents.
double iou(const Box& a, const Box& b);

}  // namespace hierdet
