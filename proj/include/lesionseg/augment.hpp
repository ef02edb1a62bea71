#pragma once

#include <utility>

#include "lesionseg/geometry.hpp"
#include "lesionseg/image.hpp"
#include "lesionseg/rng.hpp"

namespace lesionseg {

enum class CenterSampling {
  literal,    // x_e ~ U[x_C, x_C + R], y_e ~ U[y_C, y_C + R]
  symmetric,  // offsets ~ U[-R, +R] per axis
};

struct AugmentSpec {
  double rcpv_apply_prob = 0.5;  // q: probability that RCPV modifies the image
  int fill_low = 0;              // inclusive
  int fill_high = 128;           // exclusive
  CenterSampling center_sampling = CenterSampling::literal;
  double flip_h_prob = 0.5;
  double flip_v_prob = 0.5;
  double crop_min_fraction = 0.8;  // per-axis crop fraction lower bound, (0,1]
  bool grayscale_first = true;

  void validate() const;
};

// Random Changing Pixel Value: with probability q, fill a random circle near
// the lesion centroid with per-pixel random values in [fill_low, fill_high),
// written identically to all channels. The circle radius is drawn from
// [0, R); the drawn center is rounded to the pixel grid and accepted when its
// Euclidean distance to the centroid is at most R (retried up to 16 times),
// which bounds every changed pixel within 2R of the centroid. R = 0 returns
// the input unchanged.
ImageU8 rcpv(const ImageU8& image, const LesionGeometry& geometry,
             const AugmentSpec& spec, RngState& rng);

std::pair<ImageU8, BinaryMask> flip_h(const ImageU8& image,
                                      const BinaryMask& mask);
std::pair<ImageU8, BinaryMask> flip_v(const ImageU8& image,
                                      const BinaryMask& mask);

// Crop a uniformly drawn fraction per axis, keeping the lesion centroid pixel
// inside, then resize back to the original dimensions (bilinear image,
// nearest mask). Falls back to the full frame if the crop would lose the
// whole lesion.
std::pair<ImageU8, BinaryMask> random_crop(const ImageU8& image,
                                           const BinaryMask& mask,
                                           const AugmentSpec& spec,
                                           RngState& rng);

// Full per-sample pipeline: grayscale (optional), flips, random crop, then
// RCPV on the current geometry. The mask is transformed by flips/crop only.
std::pair<ImageU8, BinaryMask> augment_sample(const ImageU8& image,
                                              const BinaryMask& mask,
                                              const AugmentSpec& spec,
                                              RngState& rng);

} // namespace lesionseg
