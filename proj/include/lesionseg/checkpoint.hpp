#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lesionseg/network.hpp"

namespace lesionseg {

// Serialized network: configuration, named float32 blocks (parameters then
// batch-norm running statistics, in network order) and training metadata.
// The on-disk format is bit-exact across platforms:
//   "LSN1" | u32 version | u64 header length | UTF-8 header | LE f32 blocks
struct ModelCheckpoint {
  static constexpr uint32_t kVersion = 1;

  NetworkConfig config;
  int input_w = 0;
  int input_h = 0;
  int epoch = 0;
  uint64_t seed = 0;

  struct Block {
    std::string name;
    std::vector<float> values;
  };
  std::vector<Block> blocks;

  bool operator==(const ModelCheckpoint&) const = default;
};

ModelCheckpoint checkpoint_from_network(Network<float>& net, int input_w,
                                        int input_h, int epoch, uint64_t seed);

// Builds a network and installs the checkpoint's values. Throws DataError if
// block names or shapes do not match the configuration.
Network<float> network_from_checkpoint(const ModelCheckpoint& ckpt);

void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path);
ModelCheckpoint load_checkpoint(const std::string& path);

} // namespace lesionseg
