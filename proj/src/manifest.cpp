#include "lesionseg/manifest.hpp"

#include <filesystem>
#include <fstream>

#include "lesionseg/errors.hpp"

namespace fs = std::filesystem;

namespace lesionseg {

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open manifest");
  const fs::path dir = fs::path(path).parent_path();

  Manifest m;
  m.directory = dir.string();
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty manifest");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "image,mask")
    throw DataError(path + ": manifest header must be 'image,mask', got '" +
                    line + "'");
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected 'image,mask' row");
    const std::string img = line.substr(0, comma);
    const std::string msk = line.substr(comma + 1);
    if (img.empty())
      throw DataError(path + ":" + std::to_string(lineno) + ": empty image path");
    ManifestEntry e;
    e.id = fs::path(img).stem().string();
    e.image_path = (dir / img).string();
    e.mask_path = msk.empty() ? "" : (dir / msk).string();
    m.entries.push_back(std::move(e));
  }
  return m;
}

void save_manifest(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(path + ": cannot open manifest for writing");
  out << "image,mask\n";
  for (const auto& [img, msk] : rows) out << img << "," << msk << "\n";
  if (!out) throw DataError(path + ": write failed");
}

} // namespace lesionseg
