#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hypad/config.hpp"
#include "hypad/nets.hpp"
#include "hypad/optim.hpp"
#include "hypad/series.hpp"

namespace hypad {

// Versioned binary container: magic, format version, config digest, the
// canonical config text, then length-prefixed named fp64 arrays (model
// parameters, optimizer moments, scaler). Little-endian throughout.
struct Checkpoint {
  RunConfig config;          // training-time configuration
  std::string config_text;   // canonical rendering the digest covers
  uint64_t digest = 0;
  nets::ModelBundle model;
  series::MinMaxScaler scaler;
  std::vector<optim::AdamState> gen_state;
  std::vector<optim::AdamState> critic_x_state;
  std::vector<optim::AdamState> critic_z_state;

  nets::TrainMode train_mode() const { return config.train_mode(); }
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

// Verifies magic, version and that the stored digest matches the stored
// config text before reconstructing the model.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Structure fields of `run` must agree with the checkpoint (window width,
// dims, hidden sizes, channels, geometry); scoring-mode families must be
// compatible. Raises ConfigError otherwise.
void check_compatible(const Checkpoint& ckpt, const RunConfig& run);

}  // namespace hypad
