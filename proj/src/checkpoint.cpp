#include "lesionseg/checkpoint.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lesionseg/errors.hpp"

namespace lesionseg {

namespace {

constexpr char kMagic[4] = {'L', 'S', 'N', '1'};

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string build_header(const ModelCheckpoint& c) {
  std::ostringstream h;
  h << "in_channels = " << c.config.in_channels << "\n";
  h << "stage_channels = ";
  for (size_t i = 0; i < c.config.stage_channels.size(); ++i)
    h << (i ? "," : "") << c.config.stage_channels[i];
  h << "\n";
  h << "bottleneck_channels = " << c.config.bottleneck_channels << "\n";
  h << "dropout_prob = " << format_double(c.config.dropout_prob) << "\n";
  h << "skip_connections = " << (c.config.skip_connections ? "true" : "false")
    << "\n";
  h << "input_width = " << c.input_w << "\n";
  h << "input_height = " << c.input_h << "\n";
  h << "epoch = " << c.epoch << "\n";
  h << "seed = " << c.seed << "\n";
  for (const auto& b : c.blocks)
    h << "block " << b.name << " " << b.values.size() << "\n";
  return h.str();
}

void parse_header(const std::string& header, ModelCheckpoint& c,
                  const std::string& path) {
  std::istringstream in(header);
  std::string line;
  bool saw_blocks = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "block") {
      std::string name;
      uint64_t len = 0;
      if (!(ls >> name >> len))
        throw DataError(path + ": malformed block declaration '" + line + "'");
      c.blocks.push_back({name, std::vector<float>(len)});
      saw_blocks = true;
      continue;
    }
    if (saw_blocks)
      throw DataError(path + ": header fields after block declarations");
    std::string eq, value;
    ls >> eq;
    std::getline(ls, value);
    if (eq != "=") throw DataError(path + ": malformed header line '" + line + "'");
    while (!value.empty() && value.front() == ' ') value.erase(value.begin());
    if (key == "in_channels") c.config.in_channels = std::stoi(value);
    else if (key == "stage_channels") {
      c.config.stage_channels.clear();
      std::istringstream vs(value);
      std::string tok;
      while (std::getline(vs, tok, ','))
        c.config.stage_channels.push_back(std::stoi(tok));
    } else if (key == "bottleneck_channels")
      c.config.bottleneck_channels = std::stoi(value);
    else if (key == "dropout_prob") c.config.dropout_prob = std::stod(value);
    else if (key == "skip_connections") c.config.skip_connections = value == "true";
    else if (key == "input_width") c.input_w = std::stoi(value);
    else if (key == "input_height") c.input_h = std::stoi(value);
    else if (key == "epoch") c.epoch = std::stoi(value);
    else if (key == "seed") c.seed = std::stoull(value);
    else throw DataError(path + ": unknown header key '" + key + "'");
  }
}

} // namespace

ModelCheckpoint checkpoint_from_network(Network<float>& net, int input_w,
                                        int input_h, int epoch, uint64_t seed) {
  ModelCheckpoint c;
  c.config = net.config();
  c.input_w = input_w;
  c.input_h = input_h;
  c.epoch = epoch;
  c.seed = seed;
  for (const auto& p : net.params()) c.blocks.push_back({p.name, p.value->v});
  for (const auto& b : net.buffers()) c.blocks.push_back({b.name, b.value->v});
  return c;
}

Network<float> network_from_checkpoint(const ModelCheckpoint& ckpt) {
  Network<float> net(ckpt.config);
  size_t idx = 0;
  auto install = [&](const std::string& name, Tensor<float>* dst) {
    if (idx >= ckpt.blocks.size())
      throw DataError("checkpoint: missing block '" + name + "'");
    const auto& b = ckpt.blocks[idx++];
    if (b.name != name)
      throw DataError("checkpoint: expected block '" + name + "', found '" +
                      b.name + "'");
    if (b.values.size() != dst->size())
      throw DataError("checkpoint: block '" + name + "' has " +
                      std::to_string(b.values.size()) + " values, expected " +
                      std::to_string(dst->size()));
    dst->v = b.values;
  };
  for (const auto& p : net.params()) install(p.name, p.value);
  for (const auto& b : net.buffers()) install(b.name, b.value);
  if (idx != ckpt.blocks.size())
    throw DataError("checkpoint: " + std::to_string(ckpt.blocks.size() - idx) +
                    " unexpected extra blocks");
  return net;
}

void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path) {
  const std::string header = build_header(ckpt);
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, ModelCheckpoint::kVersion);
  put_u64(out, header.size());
  out += header;
  for (const auto& b : ckpt.blocks) {
    for (float f : b.values) {
      const uint32_t bits = std::bit_cast<uint32_t>(f);
      put_u32(out, bits);
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError(path + ": cannot open for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError(path + ": write failed");
}

ModelCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError(path + ": cannot open checkpoint");
  std::string raw((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  const uint8_t* p = reinterpret_cast<const uint8_t*>(raw.data());
  if (raw.size() < 16 || std::memcmp(p, kMagic, 4) != 0)
    throw DataError(path + ": bad magic, not a checkpoint");
  const uint32_t version = get_u32(p + 4);
  if (version != ModelCheckpoint::kVersion)
    throw DataError(path + ": unsupported checkpoint version " +
                    std::to_string(version));
  const uint64_t hlen = get_u64(p + 8);
  if (16 + hlen > raw.size()) throw DataError(path + ": truncated header");
  ModelCheckpoint c;
  parse_header(raw.substr(16, hlen), c, path);

  size_t total = 0;
  for (const auto& b : c.blocks) total += b.values.size();
  if (16 + hlen + total * 4 != raw.size())
    throw DataError(path + ": payload size mismatch (truncated or trailing data)");
  const uint8_t* q = p + 16 + hlen;
  for (auto& b : c.blocks) {
    for (auto& v : b.values) {
      v = std::bit_cast<float>(get_u32(q));
      q += 4;
    }
  }
  c.config.validate();
  return c;
}

} // namespace lesionseg
