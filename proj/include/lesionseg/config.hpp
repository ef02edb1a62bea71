#pragma once

#include <string>

#include "lesionseg/augment.hpp"
#include "lesionseg/ensemble.hpp"
#include "lesionseg/network.hpp"
#include "lesionseg/train.hpp"

namespace lesionseg {

// Whole-pipeline configuration, parsed from a sectioned key=value file.
// Unknown sections or keys abort parsing; every field has a documented
// default, so an empty file is valid.
struct PipelineConfig {
  uint64_t master_seed = 1;
  TrainConfig train;
  NetworkConfig network;
  AugmentSpec augment;
  EnsembleConfig ensemble;
};

// Strict parse. Member checkpoint paths resolve relative to the config file.
PipelineConfig load_config(const std::string& path);

} // namespace lesionseg
