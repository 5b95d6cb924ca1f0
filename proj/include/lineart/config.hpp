#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lineart/losses.hpp"

namespace lineart {

// Training configuration. The config file is a flat YAML mapping whose keys are exactly
// the field names below (loss weights as lambda_adv / lambda_rec / lambda_perc /
// lambda_style). Unknown keys are rejected.
struct TrainConfig {
  int64_t image_size = 256;
  int64_t batch_size = 16;
  int64_t iterations = 250000;
  double lr_g = 1e-4;
  double lr_d = 2e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  LossWeights weights;
  uint64_t seed = 0;
  LsganTargets lsgan_targets = LsganTargets::Standard;
  int64_t checkpoint_every = 5000;

  int64_t base_channels = 32;
  int64_t res_blocks = 4;
  int64_t le_iterations = 2000;
  double tps_magnitude = 0.08;
  int64_t tps_grid = 5;
  std::string dataset;             // root holding color/ (and sketch/)
  std::string output_dir = "runs/default";
  std::string line_extractor;      // checkpoint; empty → paired sketches are used as lines
  std::string feature_extractor;   // VGG-19 weights; empty → perceptual/style terms disabled

  // Full-scale settings: 256 px, batch 16, 250k iterations.
  static TrainConfig full();
  // Laptop-scale preset: 64×64, batch 4, 2000 iterations.
  static TrainConfig desk();

  // Throws ConfigError naming the offending field.
  void validate() const;

  // Sets one field from its textual value; throws ConfigError for an unknown key or an
  // unparsable value.
  void set(const std::string& key, const std::string& value);

  std::string to_yaml() const;
};

std::vector<std::string> config_keys();

// Parse onto the default (full-scale) settings.
TrainConfig load_config(const std::filesystem::path& path);
TrainConfig parse_config(const std::string& yaml_text);

// Apply only the keys present in the document onto an existing config.
void apply_config(TrainConfig& config, const std::string& yaml_text);
void apply_config_file(TrainConfig& config, const std::filesystem::path& path);
void save_config(const TrainConfig& config, const std::filesystem::path& path);

}  // namespace lineart
