#include "lesionseg/morphology.hpp"

#include <vector>

#include "lesionseg/errors.hpp"

namespace lesionseg {

namespace {

// Separable window scan via prefix sums. pred tells whether the reduction is
// "all ones in window" (erode) or "any one in window" (dilate); lo/hi are the
// inclusive window offsets; outside counts as `outside`.
BinaryMask window_pass_rows(const BinaryMask& in, int lo, int hi, bool erode_mode) {
  BinaryMask out(in.width, in.height);
  std::vector<int> prefix(static_cast<size_t>(in.width) + 1);
  for (int y = 0; y < in.height; ++y) {
    prefix[0] = 0;
    for (int x = 0; x < in.width; ++x)
      prefix[x + 1] = prefix[x] + in.at(x, y);
    for (int x = 0; x < in.width; ++x) {
      const int a = x + lo, b = x + hi;
      if (erode_mode) {
        // Window must lie fully inside and contain no zero.
        if (a < 0 || b > in.width - 1) continue;
        out.at(x, y) = (prefix[b + 1] - prefix[a] == b - a + 1) ? 1 : 0;
      } else {
        const int ca = a < 0 ? 0 : a;
        const int cb = b > in.width - 1 ? in.width - 1 : b;
        if (ca > cb) continue;
        out.at(x, y) = (prefix[cb + 1] - prefix[ca] > 0) ? 1 : 0;
      }
    }
  }
  return out;
}

BinaryMask window_pass_cols(const BinaryMask& in, int lo, int hi, bool erode_mode) {
  BinaryMask out(in.width, in.height);
  std::vector<int> prefix(static_cast<size_t>(in.height) + 1);
  for (int x = 0; x < in.width; ++x) {
    prefix[0] = 0;
    for (int y = 0; y < in.height; ++y)
      prefix[y + 1] = prefix[y] + in.at(x, y);
    for (int y = 0; y < in.height; ++y) {
      const int a = y + lo, b = y + hi;
      if (erode_mode) {
        if (a < 0 || b > in.height - 1) continue;
        out.at(x, y) = (prefix[b + 1] - prefix[a] == b - a + 1) ? 1 : 0;
      } else {
        const int ca = a < 0 ? 0 : a;
        const int cb = b > in.height - 1 ? in.height - 1 : b;
        if (ca > cb) continue;
        out.at(x, y) = (prefix[cb + 1] - prefix[ca] > 0) ? 1 : 0;
      }
    }
  }
  return out;
}

} // namespace

BinaryMask erode(const BinaryMask& mask, int kernel_w, int kernel_h) {
  if (kernel_w < 1 || kernel_h < 1)
    throw DataError("erode: kernel dimensions must be >= 1");
  if (kernel_w == 1 && kernel_h == 1) return mask;
  // All-ones rectangle separates into row and column passes.
  const BinaryMask rows =
      window_pass_rows(mask, -((kernel_w - 1) / 2), kernel_w / 2, true);
  return window_pass_cols(rows, -((kernel_h - 1) / 2), kernel_h / 2, true);
}

BinaryMask dilate(const BinaryMask& mask, int kernel_w, int kernel_h) {
  if (kernel_w < 1 || kernel_h < 1)
    throw DataError("dilate: kernel dimensions must be >= 1");
  if (kernel_w == 1 && kernel_h == 1) return mask;
  const BinaryMask rows =
      window_pass_rows(mask, -(kernel_w / 2), (kernel_w - 1) / 2, false);
  return window_pass_cols(rows, -(kernel_h / 2), (kernel_h - 1) / 2, false);
}

BinaryMask close_holes(const BinaryMask& mask, int kernel_w, int kernel_h) {
  return erode(dilate(mask, kernel_w, kernel_h), kernel_w, kernel_h);
}

} // namespace lesionseg
