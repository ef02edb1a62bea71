#include "lesionseg/augment.hpp"

#include <algorithm>
#include <cmath>

#include "lesionseg/errors.hpp"

namespace lesionseg {

void AugmentSpec::validate() const {
  if (rcpv_apply_prob < 0.0 || rcpv_apply_prob > 1.0)
    throw ConfigError("augment: rcpv_apply_prob must be in [0,1]");
  if (flip_h_prob < 0.0 || flip_h_prob > 1.0 || flip_v_prob < 0.0 ||
      flip_v_prob > 1.0)
    throw ConfigError("augment: flip probabilities must be in [0,1]");
  if (!(crop_min_fraction > 0.0 && crop_min_fraction <= 1.0))
    throw ConfigError("augment: crop_min_fraction must be in (0,1]");
  if (!(fill_low >= 0 && fill_low < fill_high && fill_high <= 256))
    throw ConfigError("augment: fill range must satisfy 0 <= low < high <= 256");
}

ImageU8 rcpv(const ImageU8& image, const LesionGeometry& geometry,
             const AugmentSpec& spec, RngState& rng) {
  spec.validate();
  if (geometry.source_width != image.width ||
      geometry.source_height != image.height)
    throw DataError("rcpv: geometry computed on " +
                    std::to_string(geometry.source_width) + "x" +
                    std::to_string(geometry.source_height) +
                    " mask but image is " + std::to_string(image.width) + "x" +
                    std::to_string(image.height));

  const double u = rng.uniform();
  if (u >= spec.rcpv_apply_prob) return image;  // identity branch
  const double R = geometry.inradius;
  if (R <= 0.0) return image;  // degenerate single-pixel lesion

  const double cx = geometry.centroid_x;
  const double cy = geometry.centroid_y;
  const double r = rng.uniform(0.0, R);

  // Draw the circle center; accept when the grid-rounded center is within
  // Euclidean distance R of the centroid, so changed pixels stay within 2R.
  int xe = 0, ye = 0;
  bool accepted = false;
  for (int attempt = 0; attempt < 16 && !accepted; ++attempt) {
    double fx, fy;
    if (spec.center_sampling == CenterSampling::literal) {
      fx = rng.uniform(cx, cx + R);
      fy = rng.uniform(cy, cy + R);
    } else {
      fx = cx + rng.uniform(-R, R);
      fy = cy + rng.uniform(-R, R);
    }
    xe = static_cast<int>(std::floor(fx + 0.5));
    ye = static_cast<int>(std::floor(fy + 0.5));
    const double dx = xe - cx, dy = ye - cy;
    accepted = dx * dx + dy * dy <= R * R;
  }
  if (!accepted) return image;

  ImageU8 out = image;
  const int x0 = std::max(0, static_cast<int>(std::floor(xe - r)));
  const int x1 = std::min(image.width - 1, static_cast<int>(std::ceil(xe + r)));
  const int y0 = std::max(0, static_cast<int>(std::floor(ye - r)));
  const int y1 = std::min(image.height - 1, static_cast<int>(std::ceil(ye + r)));
  const double r2 = r * r;
  const int span = spec.fill_high - spec.fill_low;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - xe, dy = y - ye;
      if (dx * dx + dy * dy > r2) continue;
      const uint8_t v = static_cast<uint8_t>(
          spec.fill_low + static_cast<int>(rng.uniform_below(span)));
      for (int c = 0; c < out.channels; ++c) out.at(x, y, c) = v;
    }
  }
  return out;
}

namespace {

void check_pair(const ImageU8& image, const BinaryMask& mask,
                const char* where) {
  if (image.width != mask.width || image.height != mask.height)
    throw DataError(std::string(where) + ": image and mask dimensions differ");
}

} // namespace

std::pair<ImageU8, BinaryMask> flip_h(const ImageU8& image,
                                      const BinaryMask& mask) {
  check_pair(image, mask, "flip_h");
  ImageU8 oi(image.width, image.height, image.channels);
  BinaryMask om(mask.width, mask.height);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const int sx = image.width - 1 - x;
      for (int c = 0; c < image.channels; ++c)
        oi.at(x, y, c) = image.at(sx, y, c);
      om.at(x, y) = mask.at(sx, y);
    }
  return {std::move(oi), std::move(om)};
}

std::pair<ImageU8, BinaryMask> flip_v(const ImageU8& image,
                                      const BinaryMask& mask) {
  check_pair(image, mask, "flip_v");
  ImageU8 oi(image.width, image.height, image.channels);
  BinaryMask om(mask.width, mask.height);
  for (int y = 0; y < image.height; ++y) {
    const int sy = image.height - 1 - y;
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c)
        oi.at(x, y, c) = image.at(x, sy, c);
      om.at(x, y) = mask.at(x, sy);
    }
  }
  return {std::move(oi), std::move(om)};
}

std::pair<ImageU8, BinaryMask> random_crop(const ImageU8& image,
                                           const BinaryMask& mask,
                                           const AugmentSpec& spec,
                                           RngState& rng) {
  check_pair(image, mask, "random_crop");
  spec.validate();
  const int W = image.width, H = image.height;

  const double fx = rng.uniform(spec.crop_min_fraction, 1.0);
  const double fy = rng.uniform(spec.crop_min_fraction, 1.0);
  int cw = std::max(1, static_cast<int>(std::floor(fx * W + 0.5)));
  int ch = std::max(1, static_cast<int>(std::floor(fy * H + 0.5)));
  cw = std::min(cw, W);
  ch = std::min(ch, H);
  if (spec.crop_min_fraction >= 1.0) return {image, mask};

  long long mask_area = 0;
  for (uint8_t b : mask.bits) mask_area += b;

  int ox, oy;
  if (mask_area > 0) {
    const auto [cx, cy] = mask_centroid(mask);
    const int px = static_cast<int>(std::floor(cx));
    const int py = static_cast<int>(std::floor(cy));
    // offsets that keep the centroid pixel inside the crop
    const int ox_lo = std::max(0, px - cw + 1), ox_hi = std::min(px, W - cw);
    const int oy_lo = std::max(0, py - ch + 1), oy_hi = std::min(py, H - ch);
    ox = static_cast<int>(rng.uniform_int(ox_lo, ox_hi));
    oy = static_cast<int>(rng.uniform_int(oy_lo, oy_hi));
  } else {
    ox = static_cast<int>(rng.uniform_int(0, W - cw));
    oy = static_cast<int>(rng.uniform_int(0, H - ch));
  }

  BinaryMask cm(cw, ch);
  long long cropped_area = 0;
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x) {
      cm.at(x, y) = mask.at(ox + x, oy + y);
      cropped_area += cm.at(x, y);
    }
  if (mask_area > 0 && cropped_area == 0) return {image, mask};

  ImageU8 ci(cw, ch, image.channels);
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x)
      for (int c = 0; c < image.channels; ++c)
        ci.at(x, y, c) = image.at(ox + x, oy + y, c);

  return {resize_bilinear(ci, W, H), resize_mask_nearest(cm, W, H)};
}

std::pair<ImageU8, BinaryMask> augment_sample(const ImageU8& image,
                                              const BinaryMask& mask,
                                              const AugmentSpec& spec,
                                              RngState& rng) {
  check_pair(image, mask, "augment_sample");
  spec.validate();

  ImageU8 img = spec.grayscale_first && image.channels == 3
                    ? to_grayscale3(image)
                    : image;
  BinaryMask msk = mask;

  if (rng.uniform() < spec.flip_h_prob) std::tie(img, msk) = flip_h(img, msk);
  if (rng.uniform() < spec.flip_v_prob) std::tie(img, msk) = flip_v(img, msk);
  std::tie(img, msk) = random_crop(img, msk, spec, rng);

  bool empty = true;
  for (uint8_t b : msk.bits)
    if (b) {
      empty = false;
      break;
    }
  if (!empty) {
    const LesionGeometry geom = lesion_geometry(msk);
    img = rcpv(img, geom, spec, rng);
  }
  return {std::move(img), std::move(msk)};
}

} // namespace lesionseg
