#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lesionseg/augment.hpp"
#include "lesionseg/checkpoint.hpp"
#include "lesionseg/manifest.hpp"
#include "lesionseg/network.hpp"

namespace lesionseg {

enum class LossKind { bce, soft_jaccard };

struct TrainConfig {
  int input_w = 96;
  int input_h = 64;
  LossKind loss = LossKind::soft_jaccard;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int epochs = 30;
  int batch_size = 8;
  uint64_t master_seed = 1;
  AugmentSpec augment;
  int checkpoint_every = 0;          // 0 = final checkpoint only
  std::string checkpoint_dir;       // used when checkpoint_every > 0
  bool verbose = false;              // progress lines on stdout

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;           // 1-based
  double mean_loss = 0.0;
  double mean_jaccard = 0.0;  // training Jaccard at threshold 0.5
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  ModelCheckpoint checkpoint;
  TrainLog log;
};

// Epoch loop: seeded shuffle, per-sample augmentation regenerated from the
// originals every batch (rng derived from (master_seed, epoch, sample index)),
// resize to the network input size, forward/backward, SGD step.
TrainResult train(const Manifest& manifest, const TrainConfig& tc,
                  const NetworkConfig& nc);

void write_train_log_csv(const TrainLog& log, const std::string& path);

} // namespace lesionseg
