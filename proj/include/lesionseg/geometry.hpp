#pragma once

#include <utility>
#include <vector>

#include "lesionseg/image.hpp"

namespace lesionseg {

// Geometric description of a lesion mask: centroid C(x,y), in-radius R
// (distance from the centroid to the closest boundary pixel) and area S.
// Source dimensions ride along so consumers can validate pairings.
struct LesionGeometry {
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  double inradius = 0.0;
  long long area = 0;
  int source_width = 0;
  int source_height = 0;
};

// Arithmetic mean of the coordinates of all 1-pixels. Throws on empty masks.
std::pair<double, double> mask_centroid(const BinaryMask& mask);

// 1-pixels with at least one 4-neighbor that is 0 or outside the image,
// in row-major order. Empty mask yields an empty list.
std::vector<std::pair<int, int>> boundary_pixels(const BinaryMask& mask);

// Minimum Euclidean distance from (cx, cy) to any boundary pixel.
double inradius(const BinaryMask& mask, double cx, double cy);

LesionGeometry lesion_geometry(const BinaryMask& mask);

} // namespace lesionseg
