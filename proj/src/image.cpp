#include "lesionseg/image.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lesionseg/errors.hpp"

namespace lesionseg {

namespace {

constexpr int kMaxSide = 65536;

// One PNM header token, skipping whitespace and '#' comment lines.
std::string next_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c) && c != '#') {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (c == '#') in.unget();
  return tok;
}

int parse_dim(const std::string& tok, const std::string& path,
              const char* what) {
  if (tok.empty()) throw DataError(path + ": malformed header, missing " + what);
  long long v = 0;
  for (char ch : tok) {
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw DataError(path + ": malformed header, bad " + what + " '" + tok + "'");
    v = v * 10 + (ch - '0');
    if (v > (1LL << 40)) break;
  }
  if (v < 1) throw DataError(path + ": " + what + " must be >= 1");
  return v > (1LL << 40) ? kMaxSide + 1 : static_cast<int>(v);
}

} // namespace

ImageU8 load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open file");

  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (!in || m0 != 'P' || (m1 != '5' && m1 != '6'))
    throw DataError(path + ": unsupported format (expected binary PGM/PPM)");
  const int channels = (m1 == '6') ? 3 : 1;

  const int w = parse_dim(next_token(in), path, "width");
  const int h = parse_dim(next_token(in), path, "height");
  if (w > kMaxSide || h > kMaxSide)
    throw DataError(path + ": image dimensions exceed 65536");

  const std::string maxval_tok = next_token(in);
  if (maxval_tok.empty()) throw DataError(path + ": malformed header, missing maxval");
  long maxval = std::strtol(maxval_tok.c_str(), nullptr, 10);
  if (maxval > 255)
    throw DataError(path + ": 16-bit samples are not supported (maxval " +
                    maxval_tok + ")");
  if (maxval != 255)
    throw DataError(path + ": unsupported maxval " + maxval_tok +
                    " (only 255)");
  // Exactly one whitespace byte separates the header from the payload; the
  // token reader has already consumed it.

  ImageU8 img(w, h, channels);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw DataError(path + ": truncated pixel payload");
  return img;
}

void save_image(const ImageU8& image, const std::string& path) {
  if (image.channels != 1 && image.channels != 3)
    throw DataError(path + ": image must have 1 or 3 channels");
  const bool pgm = path.size() >= 4 && path.compare(path.size() - 4, 4, ".pgm") == 0;
  const bool ppm = path.size() >= 4 && path.compare(path.size() - 4, 4, ".ppm") == 0;
  if (!pgm && !ppm)
    throw DataError(path + ": unsupported output format (use .pgm or .ppm)");
  if (pgm && image.channels != 1)
    throw DataError(path + ": channel mismatch, PGM stores 1 channel but image has " +
                    std::to_string(image.channels));
  if (ppm && image.channels != 3)
    throw DataError(path + ": channel mismatch, PPM stores 3 channels but image has " +
                    std::to_string(image.channels));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path + ": cannot open file for writing");
  out << (ppm ? "P6" : "P5") << "\n"
      << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw DataError(path + ": write failed");
}

BinaryMask load_mask(const std::string& path, int threshold) {
  const ImageU8 img = load_image(path);
  BinaryMask mask(img.width, img.height);
  const size_t px = static_cast<size_t>(img.width) * img.height;
  for (size_t i = 0; i < px; ++i)
    mask.bits[i] = img.pixels[i * img.channels] >= threshold ? 1 : 0;
  return mask;
}

void save_mask(const BinaryMask& mask, const std::string& path) {
  ImageU8 img(mask.width, mask.height, 1);
  for (size_t i = 0; i < mask.bits.size(); ++i)
    img.pixels[i] = mask.bits[i] ? 255 : 0;
  save_image(img, path);
}

ImageU8 to_grayscale3(const ImageU8& image) {
  if (image.channels != 3)
    throw DataError("to_grayscale3: expected 3 channels, got " +
                    std::to_string(image.channels));
  ImageU8 out(image.width, image.height, 3);
  const size_t px = static_cast<size_t>(image.width) * image.height;
  for (size_t i = 0; i < px; ++i) {
    const uint8_t r = image.pixels[i * 3 + 0];
    const uint8_t g = image.pixels[i * 3 + 1];
    const uint8_t b = image.pixels[i * 3 + 2];
    // ITU-R BT.601 luma, round-half-up.
    const uint8_t luma = clamp_round_u8(0.299 * r + 0.587 * g + 0.114 * b);
    out.pixels[i * 3 + 0] = luma;
    out.pixels[i * 3 + 1] = luma;
    out.pixels[i * 3 + 2] = luma;
  }
  return out;
}

ImageU8 resize_bilinear(const ImageU8& image, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1)
    throw DataError("resize_bilinear: target dimensions must be >= 1");
  if (out_w == image.width && out_h == image.height) return image;

  ImageU8 out(out_w, out_h, image.channels);
  const double sx = static_cast<double>(image.width) / out_w;
  const double sy = static_cast<double>(image.height) / out_h;
  const int c = image.channels;

  for (int y = 0; y < out_h; ++y) {
    // Half-pixel-center mapping with clamped sampling.
    const double src_y = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(src_y));
    const double fy = src_y - y0;
    int y1 = y0 + 1;
    if (y0 < 0) y0 = 0;
    if (y1 < 0) y1 = 0;
    if (y0 > image.height - 1) y0 = image.height - 1;
    if (y1 > image.height - 1) y1 = image.height - 1;
    for (int x = 0; x < out_w; ++x) {
      const double src_x = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(src_x));
      const double fx = src_x - x0;
      int x1 = x0 + 1;
      if (x0 < 0) x0 = 0;
      if (x1 < 0) x1 = 0;
      if (x0 > image.width - 1) x0 = image.width - 1;
      if (x1 > image.width - 1) x1 = image.width - 1;
      for (int ch = 0; ch < c; ++ch) {
        const double p00 = image.at(x0, y0, ch);
        const double p01 = image.at(x1, y0, ch);
        const double p10 = image.at(x0, y1, ch);
        const double p11 = image.at(x1, y1, ch);
        const double top = (1.0 - fx) * p00 + fx * p01;
        const double bot = (1.0 - fx) * p10 + fx * p11;
        out.at(x, y, ch) = clamp_round_u8((1.0 - fy) * top + fy * bot);
      }
    }
  }
  return out;
}

BinaryMask resize_mask_nearest(const BinaryMask& mask, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1)
    throw DataError("resize_mask_nearest: target dimensions must be >= 1");
  if (out_w == mask.width && out_h == mask.height) return mask;

  BinaryMask out(out_w, out_h);
  const double sx = static_cast<double>(mask.width) / out_w;
  const double sy = static_cast<double>(mask.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    int src_y = static_cast<int>(std::floor((y + 0.5) * sy - 0.5 + 0.5));
    if (src_y < 0) src_y = 0;
    if (src_y > mask.height - 1) src_y = mask.height - 1;
    for (int x = 0; x < out_w; ++x) {
      int src_x = static_cast<int>(std::floor((x + 0.5) * sx - 0.5 + 0.5));
      if (src_x < 0) src_x = 0;
      if (src_x > mask.width - 1) src_x = mask.width - 1;
      out.at(x, y) = mask.at(src_x, src_y);
    }
  }
  return out;
}

ImageU8 overlay(const ImageU8& image, const BinaryMask& mask, Rgb color,
                double alpha) {
  if (image.channels != 3)
    throw DataError("overlay: image must have 3 channels");
  if (image.width != mask.width || image.height != mask.height)
    throw DataError("overlay: image and mask dimensions differ");

  ImageU8 out = image;
  const size_t px = static_cast<size_t>(image.width) * image.height;
  const double c[3] = {static_cast<double>(color.r),
                       static_cast<double>(color.g),
                       static_cast<double>(color.b)};
  for (size_t i = 0; i < px; ++i) {
    if (!mask.bits[i]) continue;
    for (int ch = 0; ch < 3; ++ch) {
      const double v = (1.0 - alpha) * image.pixels[i * 3 + ch] + alpha * c[ch];
      out.pixels[i * 3 + ch] = clamp_round_u8(v);
    }
  }
  return out;
}

} // namespace lesionseg
