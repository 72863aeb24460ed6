// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "jppnet/io/kv_config.hpp"

namespace jpp::net {

/// Architecture hyper-parameters. The full preset carries the published
/// channel widths; the toy preset divides every width by eight.
struct NetConfig {
  std::string preset = "toy";
  int input_size = 128;
  int stem_channels = 8;
  std::array<int, 4> stage_channels{32, 64, 128, 256};  // res2..res5 outputs
  std::array<int, 4> stage_blocks{1, 1, 1, 1};
  int bottleneck_ratio = 4;
  int output_stride = 8;  // 8 or 16
  std::vector<int> aspp_rates{2, 4, 6};
  std::array<int, 2> part_channels{64, 32};
  std::array<int, 8> joint_channels{64, 64, 32, 32, 32, 32, 64, 16};
  int remap_channels = 16;
  int refine_concat = 64;
  std::array<int, 5> refine_channels{64, 32, 32, 32, 32};
  std::array<int, 5> refine_kernels{3, 5, 7, 9, 1};
  int refine_stages = 1;
  bool msc = false;
  std::vector<double> msc_scales{1.0, 0.75, 0.5};
  bool with_pose = true;
  double residual_init_scale = 0.1;

  static NetConfig toy();
  static NetConfig full();
  /// Reads `preset` first, then overrides any of: input_size, stem_channels,
  /// stage_channels, stage_blocks, output_stride, aspp_rates, refine_stages,
  /// msc, msc_scales, with_pose, residual_init_scale.
  static NetConfig from_config(const io::KeyValueConfig& cfg);
  static const std::vector<std::string>& config_keys();

  /// Throws ConfigError, e.g. when the refinement concat width disagrees
  /// with remap + context channels.
  void validate() const;

  int output_size() const { return input_size / output_stride; }
  int parsing_context_channels() const { return part_channels[1]; }
  int pose_context_channels() const { return joint_channels[5]; }

  nlohmann::json to_json() const;
  static NetConfig from_json(const nlohmann::json& j);
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

}  // namespace jpp::net
