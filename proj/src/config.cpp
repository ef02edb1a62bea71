#include "lesionseg/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "lesionseg/errors.hpp"

namespace fs = std::filesystem;

namespace lesionseg {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad(const std::string& path, size_t lineno,
                      const std::string& msg) {
  throw ConfigError(path + ":" + std::to_string(lineno) + ": " + msg);
}

long long parse_int(const std::string& v, const std::string& path,
                    size_t lineno) {
  errno = 0;
  char* end = nullptr;
  const long long r = std::strtoll(v.c_str(), &end, 10);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    bad(path, lineno, "expected integer, got '" + v + "'");
  return r;
}

uint64_t parse_u64(const std::string& v, const std::string& path,
                   size_t lineno) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long r = std::strtoull(v.c_str(), &end, 10);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    bad(path, lineno, "expected unsigned integer, got '" + v + "'");
  return r;
}

double parse_double(const std::string& v, const std::string& path,
                    size_t lineno) {
  errno = 0;
  char* end = nullptr;
  const double r = std::strtod(v.c_str(), &end);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    bad(path, lineno, "expected number, got '" + v + "'");
  return r;
}

bool parse_bool(const std::string& v, const std::string& path, size_t lineno) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad(path, lineno, "expected true/false, got '" + v + "'");
}

std::pair<int, int> parse_size(const std::string& v, const std::string& path,
                               size_t lineno) {
  const size_t x = v.find('x');
  if (x == std::string::npos)
    bad(path, lineno, "expected WxH, got '" + v + "'");
  const int w = static_cast<int>(parse_int(v.substr(0, x), path, lineno));
  const int h = static_cast<int>(parse_int(v.substr(x + 1), path, lineno));
  return {w, h};
}

std::vector<std::string> split_commas(const std::string& v) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= v.size()) {
    const size_t comma = v.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(v.substr(start)));
      break;
    }
    out.push_back(trim(v.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

} // namespace

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  const fs::path dir = fs::path(path).parent_path();

  PipelineConfig cfg;
  std::string section;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') bad(path, lineno, "malformed section header");
      section = t.substr(1, t.size() - 2);
      if (section != "pipeline" && section != "train" && section != "network" &&
          section != "augment" && section != "ensemble")
        bad(path, lineno, "unknown section [" + section + "]");
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos) bad(path, lineno, "expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (section.empty())
      bad(path, lineno, "key '" + key + "' outside any section");

    if (section == "pipeline") {
      if (key == "master_seed") cfg.master_seed = parse_u64(value, path, lineno);
      else bad(path, lineno, "unknown key '" + key + "' in [pipeline]");
    } else if (section == "train") {
      if (key == "input_size") {
        const auto [w, h] = parse_size(value, path, lineno);
        cfg.train.input_w = w;
        cfg.train.input_h = h;
      } else if (key == "loss") {
        if (value == "bce") cfg.train.loss = LossKind::bce;
        else if (value == "soft_jaccard") cfg.train.loss = LossKind::soft_jaccard;
        else bad(path, lineno, "loss must be bce or soft_jaccard");
      } else if (key == "learning_rate")
        cfg.train.learning_rate = parse_double(value, path, lineno);
      else if (key == "momentum")
        cfg.train.momentum = parse_double(value, path, lineno);
      else if (key == "weight_decay")
        cfg.train.weight_decay = parse_double(value, path, lineno);
      else if (key == "epochs")
        cfg.train.epochs = static_cast<int>(parse_int(value, path, lineno));
      else if (key == "batch_size")
        cfg.train.batch_size = static_cast<int>(parse_int(value, path, lineno));
      else if (key == "checkpoint_every")
        cfg.train.checkpoint_every =
            static_cast<int>(parse_int(value, path, lineno));
      else bad(path, lineno, "unknown key '" + key + "' in [train]");
    } else if (section == "network") {
      if (key == "in_channels")
        cfg.network.in_channels = static_cast<int>(parse_int(value, path, lineno));
      else if (key == "stage_channels") {
        cfg.network.stage_channels.clear();
        for (const auto& tok : split_commas(value))
          cfg.network.stage_channels.push_back(
              static_cast<int>(parse_int(tok, path, lineno)));
      } else if (key == "bottleneck_channels")
        cfg.network.bottleneck_channels =
            static_cast<int>(parse_int(value, path, lineno));
      else if (key == "dropout_prob")
        cfg.network.dropout_prob = parse_double(value, path, lineno);
      else if (key == "skip_connections")
        cfg.network.skip_connections = parse_bool(value, path, lineno);
      else bad(path, lineno, "unknown key '" + key + "' in [network]");
    } else if (section == "augment") {
      if (key == "rcpv_apply_prob")
        cfg.augment.rcpv_apply_prob = parse_double(value, path, lineno);
      else if (key == "fill_low")
        cfg.augment.fill_low = static_cast<int>(parse_int(value, path, lineno));
      else if (key == "fill_high")
        cfg.augment.fill_high = static_cast<int>(parse_int(value, path, lineno));
      else if (key == "center_sampling") {
        if (value == "literal") cfg.augment.center_sampling = CenterSampling::literal;
        else if (value == "symmetric")
          cfg.augment.center_sampling = CenterSampling::symmetric;
        else bad(path, lineno, "center_sampling must be literal or symmetric");
      } else if (key == "flip_h_prob")
        cfg.augment.flip_h_prob = parse_double(value, path, lineno);
      else if (key == "flip_v_prob")
        cfg.augment.flip_v_prob = parse_double(value, path, lineno);
      else if (key == "crop_min_fraction")
        cfg.augment.crop_min_fraction = parse_double(value, path, lineno);
      else if (key == "grayscale_first")
        cfg.augment.grayscale_first = parse_bool(value, path, lineno);
      else bad(path, lineno, "unknown key '" + key + "' in [augment]");
    } else if (section == "ensemble") {
      if (key == "members") {
        cfg.ensemble.members.clear();
        for (const auto& tok : split_commas(value)) {
          if (tok.empty()) bad(path, lineno, "empty ensemble member");
          const size_t colon = tok.rfind(':');
          if (colon == std::string::npos)
            bad(path, lineno, "member must be path:WxH, got '" + tok + "'");
          EnsembleMember m;
          m.checkpoint_path = (dir / trim(tok.substr(0, colon))).string();
          const auto [w, h] = parse_size(trim(tok.substr(colon + 1)), path, lineno);
          m.input_w = w;
          m.input_h = h;
          cfg.ensemble.members.push_back(std::move(m));
        }
      } else if (key == "selection") {
        if (value == "oracle") cfg.ensemble.selection = Selection::oracle;
        else if (value == "consensus") cfg.ensemble.selection = Selection::consensus;
        else if (value == "single") cfg.ensemble.selection = Selection::single;
        else bad(path, lineno, "selection must be oracle, consensus or single");
      } else if (key == "threshold")
        cfg.ensemble.threshold = parse_double(value, path, lineno);
      else if (key == "erosion_kernel") {
        const auto [w, h] = parse_size(value, path, lineno);
        cfg.ensemble.erosion_kw = w;
        cfg.ensemble.erosion_kh = h;
      } else if (key == "erosion_enabled")
        cfg.ensemble.erosion_enabled = parse_bool(value, path, lineno);
      else if (key == "closing_enabled")
        cfg.ensemble.closing_enabled = parse_bool(value, path, lineno);
      else bad(path, lineno, "unknown key '" + key + "' in [ensemble]");
    }
  }

  cfg.train.master_seed = cfg.master_seed;
  cfg.train.augment = cfg.augment;
  try {
    cfg.train.validate();
    cfg.network.validate();
    cfg.augment.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return cfg;
}

} // namespace lesionseg
