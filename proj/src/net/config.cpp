// SPDX-License-Identifier: Apache-2.0
#include "jppnet/net/config.hpp"

#include <algorithm>

#include "jppnet/core/errors.hpp"
#include "jppnet/core/taxonomy.hpp"

namespace jpp::net {

NetConfig NetConfig::toy() { return NetConfig{}; }

NetConfig NetConfig::full() {
  NetConfig c;
  c.preset = "full";
  c.input_size = 384;
  c.stem_channels = 64;
  c.stage_channels = {256, 512, 1024, 2048};
  c.stage_blocks = {3, 4, 23, 3};
  c.aspp_rates = {6, 12, 18, 24};
  c.part_channels = {512, 256};
  c.joint_channels = {512, 512, 256, 256, 256, 256, 512, 16};
  c.remap_channels = 128;
  c.refine_concat = 512;
  c.refine_channels = {512, 256, 256, 256, 256};
  c.refine_stages = 2;
  return c;
}

const std::vector<std::string>& NetConfig::config_keys() {
  static const std::vector<std::string> keys = {
      "preset",       "input_size",    "stem_channels", "stage_channels", "stage_blocks",
      "output_stride", "aspp_rates",   "refine_stages", "msc",            "msc_scales",
      "with_pose",    "residual_init_scale"};
  return keys;
}

NetConfig NetConfig::from_config(const io::KeyValueConfig& cfg) {
  const std::string preset = cfg.get_string("preset", "toy");
  NetConfig c;
  if (preset == "full") {
    c = full();
  } else if (preset != "toy") {
    throw ConfigError("config key 'preset' must be toy or full, got '" + preset + "'");
  }
  auto four = [&cfg](const char* key, std::array<int, 4> fallback) {
    const auto v = cfg.get_ints(key, {fallback.begin(), fallback.end()});
    if (v.size() != 4) throw ConfigError(std::string("config key '") + key + "' needs 4 values");
    return std::array<int, 4>{v[0], v[1], v[2], v[3]};
  };
  c.input_size = static_cast<int>(cfg.get_int("input_size", c.input_size));
  c.stem_channels = static_cast<int>(cfg.get_int("stem_channels", c.stem_channels));
  c.stage_channels = four("stage_channels", c.stage_channels);
  c.stage_blocks = four("stage_blocks", c.stage_blocks);
  c.output_stride = static_cast<int>(cfg.get_int("output_stride", c.output_stride));
  c.aspp_rates = cfg.get_ints("aspp_rates", c.aspp_rates);
  c.refine_stages = static_cast<int>(cfg.get_int("refine_stages", c.refine_stages));
  c.msc = cfg.get_bool("msc", c.msc);
  c.msc_scales = cfg.get_doubles("msc_scales", c.msc_scales);
  c.with_pose = cfg.get_bool("with_pose", c.with_pose);
  c.residual_init_scale = cfg.get_double("residual_init_scale", c.residual_init_scale);
  c.validate();
  return c;
}

void NetConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (output_stride != 8 && output_stride != 16) fail("output_stride must be 8 or 16");
  if (input_size < output_stride || input_size % output_stride != 0) {
    fail("input_size " + std::to_string(input_size) + " is not a multiple of the output stride " +
         std::to_string(output_stride));
  }
  if (stem_channels < 1) fail("stem_channels must be positive");
  for (int i = 0; i < 4; ++i) {
    if (stage_channels[i] < bottleneck_ratio || stage_channels[i] % bottleneck_ratio != 0) {
      fail("stage_channels must be positive multiples of " + std::to_string(bottleneck_ratio));
    }
    if (stage_blocks[i] < 1) fail("stage_blocks must be at least 1");
  }
  if (aspp_rates.empty()) fail("aspp_rates must not be empty");
  for (int r : aspp_rates) {
    if (r < 1) fail("aspp_rates must be positive");
  }
  if (joint_channels[7] != kNumJoints) fail("the last joint-module conv must have 16 channels");
  if (refine_stages < 0 || refine_stages > 2) fail("refine_stages must be 0, 1 or 2");
  if (refine_concat != 2 * remap_channels + pose_context_channels() ||
      refine_concat != 2 * remap_channels + parsing_context_channels()) {
    fail("refinement concat width " + std::to_string(refine_concat) +
         " does not equal 2 x remap + context channels");
  }
  if (refine_channels[4] != pose_context_channels() ||
      refine_channels[4] != parsing_context_channels()) {
    fail("refinement context width must match the module context width");
  }
  if (msc_scales.empty()) fail("msc_scales must not be empty");
  for (double s : msc_scales) {
    if (!(s > 0.0)) fail("msc_scales must be positive");
  }
  if (!with_pose && refine_stages != 0) fail("a parsing-only network has no refinement stages");
  if (!(residual_init_scale >= 0.0)) fail("residual_init_scale must be non-negative");
}

nlohmann::json NetConfig::to_json() const {
  return {{"preset", preset},
          {"input_size", input_size},
          {"stem_channels", stem_channels},
          {"stage_channels", stage_channels},
          {"stage_blocks", stage_blocks},
          {"bottleneck_ratio", bottleneck_ratio},
          {"output_stride", output_stride},
          {"aspp_rates", aspp_rates},
          {"part_channels", part_channels},
          {"joint_channels", joint_channels},
          {"remap_channels", remap_channels},
          {"refine_concat", refine_concat},
          {"refine_channels", refine_channels},
          {"refine_kernels", refine_kernels},
          {"refine_stages", refine_stages},
          {"msc", msc},
          {"msc_scales", msc_scales},
          {"with_pose", with_pose},
          {"residual_init_scale", residual_init_scale}};
}

NetConfig NetConfig::from_json(const nlohmann::json& j) {
  NetConfig c;
  try {
    j.at("preset").get_to(c.preset);
    j.at("input_size").get_to(c.input_size);
    j.at("stem_channels").get_to(c.stem_channels);
    j.at("stage_channels").get_to(c.stage_channels);
    j.at("stage_blocks").get_to(c.stage_blocks);
    j.at("bottleneck_ratio").get_to(c.bottleneck_ratio);
    j.at("output_stride").get_to(c.output_stride);
    j.at("aspp_rates").get_to(c.aspp_rates);
    j.at("part_channels").get_to(c.part_channels);
    j.at("joint_channels").get_to(c.joint_channels);
    j.at("remap_channels").get_to(c.remap_channels);
    j.at("refine_concat").get_to(c.refine_concat);
    j.at("refine_channels").get_to(c.refine_channels);
    j.at("refine_kernels").get_to(c.refine_kernels);
    j.at("refine_stages").get_to(c.refine_stages);
    j.at("msc").get_to(c.msc);
    j.at("msc_scales").get_to(c.msc_scales);
    j.at("with_pose").get_to(c.with_pose);
    j.at("residual_init_scale").get_to(c.residual_init_scale);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed network description: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace jpp::net
