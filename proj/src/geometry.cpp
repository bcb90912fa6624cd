#include "hierdet/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace hierdet {

double iou(const Box& a, const Box& b) {
  if (a.w < 0 || a.h < 0 || b.w < 0 || b.h < 0) {
    throw std::invalid_argument("iou: negative box extent");
  }
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

}  // namespace hierdet
