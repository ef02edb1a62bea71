#include "lesionseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "lesionseg/errors.hpp"
#include "lesionseg/rng.hpp"

namespace fs = std::filesystem;

namespace lesionseg {

namespace {

void stamp_dot(ImageU8& img, int cx, int cy, int radius, int value) {
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy > radius * radius) continue;
      const int x = cx + dx, y = cy + dy;
      if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
      for (int c = 0; c < 3; ++c)
        img.at(x, y, c) = static_cast<uint8_t>(value);
    }
}

// Quadratic Bezier sampled densely enough that the stroke has no gaps.
void draw_hair(ImageU8& img, RngState& rng) {
  const int w = img.width, h = img.height;
  const double x0 = rng.uniform(0, w), y0 = rng.uniform(0, h);
  const double x1 = rng.uniform(0, w), y1 = rng.uniform(0, h);
  const double cx = rng.uniform(0, w), cy = rng.uniform(0, h);
  const int value = static_cast<int>(rng.uniform_int(20, 60));
  const int radius = rng.uniform() < 0.3 ? 1 : 0;
  const double len = std::hypot(x1 - x0, y1 - y0) +
                     std::hypot(cx - x0, cy - y0) + std::hypot(x1 - cx, y1 - cy);
  const int steps = std::max(8, static_cast<int>(len * 2));
  for (int s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    const double omt = 1.0 - t;
    const double px = omt * omt * x0 + 2 * omt * t * cx + t * t * x1;
    const double py = omt * omt * y0 + 2 * omt * t * cy + t * t * y1;
    stamp_dot(img, static_cast<int>(std::floor(px + 0.5)),
              static_cast<int>(std::floor(py + 0.5)), radius, value);
  }
}

} // namespace

SynthSample synth_sample(int width, int height, uint64_t seed, uint64_t index) {
  if (width < 16 || height < 16)
    throw ConfigError("synth: image size must be at least 16x16");
  // the lesion-area floor (>= 1% of the image) holds for aspect ratios to 3:1
  if (std::max(width, height) > 3 * std::min(width, height))
    throw ConfigError("synth: aspect ratio beyond 3:1 unsupported");
  RngState rng = derive_rng(seed, 0, index);

  const double mind = std::min(width, height);
  const int back = static_cast<int>(rng.uniform_int(150, 200));
  const int lesion = static_cast<int>(rng.uniform_int(60, 110));
  const double ecx = rng.uniform(0.35, 0.65) * width;
  const double ecy = rng.uniform(0.35, 0.65) * height;
  const double a = rng.uniform(0.14, 0.30) * mind;
  const double b = rng.uniform(0.6, 1.0) * a;
  const double theta = rng.uniform(0.0, 3.14159265358979323846);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double edge = rng.uniform(0.06, 0.16);

  SynthSample out;
  out.image = ImageU8(width, height, 3);
  out.mask = BinaryMask(width, height);

  // background tint leans pink, the lesion leans brown; grayscale conversion
  // therefore changes the data, as the preprocessing expects
  const int back_tint[3] = {15, 0, -12};
  const int lesion_tint[3] = {5, -10, -20};

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double rx = (x - ecx) * ct + (y - ecy) * st;
      const double ry = -(x - ecx) * st + (y - ecy) * ct;
      const double d = std::sqrt((rx * rx) / (a * a) + (ry * ry) / (b * b));
      out.mask.at(x, y) = d <= 1.0 ? 1 : 0;
      // blend lesion -> background across [1-edge, 1+edge]
      double blend = (d - (1.0 - edge)) / (2.0 * edge);
      blend = std::clamp(blend, 0.0, 1.0);
      const double base = lesion + (back - lesion) * blend;
      for (int c = 0; c < 3; ++c) {
        const double tint =
            lesion_tint[c] + (back_tint[c] - lesion_tint[c]) * blend;
        const double noise = rng.uniform(-10.0, 10.0);
        out.image.at(x, y, c) = clamp_round_u8(base + tint + noise);
      }
    }
  }

  const int hairs = static_cast<int>(rng.uniform_int(0, 3));
  for (int i = 0; i < hairs; ++i) draw_hair(out.image, rng);
  return out;
}

Manifest generate_synth_dataset(const std::string& out_dir, int count,
                                int width, int height, uint64_t seed) {
  if (count < 0) throw ConfigError("synth: count must be >= 0");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError(out_dir + ": cannot create directory");

  std::vector<std::pair<std::string, std::string>> rows;
  char name[64];
  for (int i = 0; i < count; ++i) {
    const SynthSample s =
        synth_sample(width, height, seed, static_cast<uint64_t>(i));
    std::snprintf(name, sizeof(name), "img_%04d", i);
    const std::string img_rel = std::string(name) + ".ppm";
    const std::string msk_rel = std::string(name) + "_mask.pgm";
    save_image(s.image, (fs::path(out_dir) / img_rel).string());
    save_mask(s.mask, (fs::path(out_dir) / msk_rel).string());
    rows.emplace_back(img_rel, msk_rel);
  }
  const std::string manifest_path = (fs::path(out_dir) / "manifest.csv").string();
  save_manifest(manifest_path, rows);
  return load_manifest(manifest_path);
}

} // namespace lesionseg
