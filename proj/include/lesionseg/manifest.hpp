#pragma once

#include <string>
#include <vector>

namespace lesionseg {

// Dataset listing. CSV with header "image,mask"; the mask column may be empty
// where no ground truth exists. Paths resolve relative to the manifest file.
struct ManifestEntry {
  std::string id;          // image filename stem
  std::string image_path;  // resolved
  std::string mask_path;   // resolved; empty if absent
  bool has_mask() const { return !mask_path.empty(); }
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::string directory;

  bool all_have_masks() const {
    for (const auto& e : entries)
      if (!e.has_mask()) return false;
    return true;
  }
};

Manifest load_manifest(const std::string& path);

// rows are (image, mask) pairs relative to the manifest directory.
void save_manifest(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& rows);

} // namespace lesionseg
