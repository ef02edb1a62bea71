#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lesionseg {

// 8-bit raster image, row-major, channel-interleaved. channels is 1 or 3.
struct ImageU8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<uint8_t> pixels;

  ImageU8() = default;
  ImageU8(int w, int h, int c, uint8_t fill = 0)
      : width(w), height(h), channels(c),
        pixels(static_cast<size_t>(w) * h * c, fill) {}

  uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
  }

  bool operator==(const ImageU8&) const = default;
};

// Per-pixel 0/1 segmentation label.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h, uint8_t fill = 0)
      : width(w), height(h), bits(static_cast<size_t>(w) * h, fill) {}

  uint8_t& at(int x, int y) { return bits[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int x, int y) const {
    return bits[static_cast<size_t>(y) * width + x];
  }

  bool operator==(const BinaryMask&) const = default;
};

struct Rgb {
  uint8_t r = 0, g = 0, b = 0;
};

// Round-half-up to the nearest integer, then clamp to [0,255].
inline uint8_t clamp_round_u8(double v) {
  double r = v < 0.0 ? 0.0 : v;
  long long i = static_cast<long long>(r + 0.5);
  if (i > 255) i = 255;
  return static_cast<uint8_t>(i);
}

// Codecs: binary PGM (P5) and PPM (P6), maxval 255.
ImageU8 load_image(const std::string& path);
void save_image(const ImageU8& image, const std::string& path);

BinaryMask load_mask(const std::string& path, int threshold = 128);
void save_mask(const BinaryMask& mask, const std::string& path);

ImageU8 to_grayscale3(const ImageU8& image);
ImageU8 resize_bilinear(const ImageU8& image, int out_w, int out_h);
BinaryMask resize_mask_nearest(const BinaryMask& mask, int out_w, int out_h);
ImageU8 overlay(const ImageU8& image, const BinaryMask& mask, Rgb color,
                double alpha);

} // namespace lesionseg
