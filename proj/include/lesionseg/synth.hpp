#pragma once

#include <cstdint>
#include <string>

#include "lesionseg/image.hpp"
#include "lesionseg/manifest.hpp"

namespace lesionseg {

// One generated sample: tinted noisy skin-like background, a single elliptical
// lesion with a soft edge, and a few dark hair-like strokes. The mask is the
// exact ellipse interior and always covers at least 1% of the image.
struct SynthSample {
  ImageU8 image;
  BinaryMask mask;
};

SynthSample synth_sample(int width, int height, uint64_t seed, uint64_t index);

// Writes `count` image/mask pairs plus manifest.csv into out_dir and returns
// the loaded manifest. Fully determined by (count, size, seed).
Manifest generate_synth_dataset(const std::string& out_dir, int count,
                                int width, int height, uint64_t seed);

} // namespace lesionseg
