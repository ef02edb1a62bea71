#include "lesionseg/geometry.hpp"

#include <cmath>
#include <limits>

#include "lesionseg/errors.hpp"

namespace lesionseg {

std::pair<double, double> mask_centroid(const BinaryMask& mask) {
  long long sum_x = 0, sum_y = 0, count = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y)) {
        sum_x += x;
        sum_y += y;
        ++count;
      }
    }
  }
  if (count == 0) throw DataError("mask_centroid: empty lesion mask");
  return {static_cast<double>(sum_x) / count, static_cast<double>(sum_y) / count};
}

std::vector<std::pair<int, int>> boundary_pixels(const BinaryMask& mask) {
  std::vector<std::pair<int, int>> out;
  const int w = mask.width, h = mask.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      const bool edge = x == 0 || !mask.at(x - 1, y) || x == w - 1 ||
                        !mask.at(x + 1, y) || y == 0 || !mask.at(x, y - 1) ||
                        y == h - 1 || !mask.at(x, y + 1);
      if (edge) out.emplace_back(x, y);
    }
  }
  return out;
}

double inradius(const BinaryMask& mask, double cx, double cy) {
  const auto boundary = boundary_pixels(mask);
  if (boundary.empty()) throw DataError("inradius: empty lesion mask");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : boundary) {
    const double d = std::hypot(x - cx, y - cy);
    if (d < best) best = d;
  }
  return best;
}

LesionGeometry lesion_geometry(const BinaryMask& mask) {
  const auto [cx, cy] = mask_centroid(mask);
  LesionGeometry g;
  g.centroid_x = cx;
  g.centroid_y = cy;
  g.inradius = inradius(mask, cx, cy);
  long long area = 0;
  for (uint8_t b : mask.bits) area += b;
  g.area = area;
  g.source_width = mask.width;
  g.source_height = mask.height;
  return g;
}

} // namespace lesionseg
