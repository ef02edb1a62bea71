#pragma once

#include "lesionseg/image.hpp"

namespace lesionseg {

// Erosion with an all-ones kernel_w x kernel_h structuring element.
// Output pixel is 1 iff every pixel in the window
//   dx in [-(kw-1)/2, +kw/2], dy in [-(kh-1)/2, +kh/2]
// is 1; positions outside the image count as 0. For even kernels this is the
// floor-anchor convention (a 10x10 window spans offsets [-4, +5]).
BinaryMask erode(const BinaryMask& mask, int kernel_w = 10, int kernel_h = 10);

// Dilation with the mirrored window (offsets [-kw/2, +(kw-1)/2]), so that
// erode(dilate(m)) is the matching closing.
BinaryMask dilate(const BinaryMask& mask, int kernel_w, int kernel_h);

// Closing: dilate, then erode, with the same kernel.
BinaryMask close_holes(const BinaryMask& mask, int kernel_w, int kernel_h);

} // namespace lesionseg
