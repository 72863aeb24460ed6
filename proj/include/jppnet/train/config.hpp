// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "jppnet/io/kv_config.hpp"
#include "jppnet/net/config.hpp"

namespace jpp::train {

enum class Mode { kJoint, kStructure };

/// Where the parsing loss is evaluated: on the output grid against
/// nearest-resized labels, or on scores upsampled to the crop resolution.
enum class LossResolution { kOutput, kInput };

std::string mode_name(Mode m);
Mode mode_from_name(const std::string& name);

struct AugmentConfig {
  bool enabled = true;
  double scale_min = 0.75;
  double scale_max = 1.25;
  double flip_prob = 0.5;
  int crop_size = 128;
};

struct TrainConfig {
  std::filesystem::path dataset;
  std::string split = "train";
  std::uint64_t seed = 0;
  net::NetConfig net;
  AugmentConfig augment;

  // Phase A trains the parsing-only network; phase B the full network
  // (joint mode) or the structure-sensitive fine-tune (ss mode).
  int phase_a_epochs = 30;
  int phase_b_epochs = 30;
  int batch_size = 1;
  int max_samples = 0;  // 0 = whole split

  double learning_rate = 0.01;
  double lr_power = 0.9;
  double momentum = 0.9;
  double weight_decay = 0.0;
  double grad_clip = 0.0;  // global-norm clip, 0 = off

  std::vector<double> parsing_stage_weights;  // default 1 per stage
  std::vector<double> pose_stage_weights;
  LossResolution parsing_loss_resolution = LossResolution::kOutput;
  double pose_sigma = 1.0;       // output-grid pixels
  double structure_sigma = 3.0;  // output-grid pixels
  double divergence_limit = 1e6;

  /// Reads every TrainConfig key plus the network keys from one flat file.
  /// Keys outside those and `extra_keys` raise ConfigError.
  static TrainConfig from_config(const io::KeyValueConfig& cfg,
                                 const std::vector<std::string>& extra_keys = {});
  static std::vector<std::string> config_keys();
  void validate() const;

  /// Stage weights padded with 1.0 to `stages` entries.
  std::vector<double> parsing_weights(int stages) const;
  std::vector<double> pose_weights(int stages) const;
};

}  // namespace jpp::train
