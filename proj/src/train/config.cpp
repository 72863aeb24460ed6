// SPDX-License-Identifier: Apache-2.0
#include "jppnet/train/config.hpp"

#include <algorithm>

#include "jppnet/core/errors.hpp"

namespace jpp::train {

std::string mode_name(Mode m) { return m == Mode::kJoint ? "joint" : "ss"; }

Mode mode_from_name(const std::string& name) {
  if (name == "joint") return Mode::kJoint;
  if (name == "ss") return Mode::kStructure;
  throw ConfigError("training mode must be joint or ss, got '" + name + "'");
}

std::vector<std::string> TrainConfig::config_keys() {
  std::vector<std::string> known = {
      "dataset",        "split",           "seed",           "augment",
      "scale_min",      "scale_max",       "flip_prob",      "crop_size",
      "phase_a_epochs", "phase_b_epochs",  "batch_size",     "max_samples",
      "learning_rate",  "lr_power",        "momentum",       "weight_decay",
      "grad_clip",      "parsing_stage_weights", "pose_stage_weights", "pose_sigma",
      "structure_sigma", "divergence_limit", "parsing_loss_resolution"};
  const auto& net_keys = net::NetConfig::config_keys();
  known.insert(known.end(), net_keys.begin(), net_keys.end());
  return known;
}

TrainConfig TrainConfig::from_config(const io::KeyValueConfig& cfg,
                                     const std::vector<std::string>& extra_keys) {
  std::vector<std::string> known = config_keys();
  known.insert(known.end(), extra_keys.begin(), extra_keys.end());
  if (auto unknown = cfg.unknown_keys(known); !unknown.empty()) {
    throw ConfigError("unknown config key '" + unknown.front() + "'");
  }

  TrainConfig c;
  c.net = net::NetConfig::from_config(cfg);
  c.dataset = cfg.get_string("dataset", "");
  c.split = cfg.get_string("split", c.split);
  const long long seed = cfg.get_int("seed", 0);
  if (seed < 0) throw ConfigError("config key 'seed' must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.augment.enabled = cfg.get_bool("augment", c.augment.enabled);
  c.augment.scale_min = cfg.get_double("scale_min", c.augment.scale_min);
  c.augment.scale_max = cfg.get_double("scale_max", c.augment.scale_max);
  c.augment.flip_prob = cfg.get_double("flip_prob", c.augment.flip_prob);
  c.augment.crop_size = static_cast<int>(cfg.get_int("crop_size", c.net.input_size));
  c.phase_a_epochs = static_cast<int>(cfg.get_int("phase_a_epochs", c.phase_a_epochs));
  c.phase_b_epochs = static_cast<int>(cfg.get_int("phase_b_epochs", c.phase_b_epochs));
  c.batch_size = static_cast<int>(cfg.get_int("batch_size", c.batch_size));
  c.max_samples = static_cast<int>(cfg.get_int("max_samples", c.max_samples));
  c.learning_rate = cfg.get_double("learning_rate", c.learning_rate);
  c.lr_power = cfg.get_double("lr_power", c.lr_power);
  c.momentum = cfg.get_double("momentum", c.momentum);
  c.weight_decay = cfg.get_double("weight_decay", c.weight_decay);
  c.grad_clip = cfg.get_double("grad_clip", c.grad_clip);
  c.parsing_stage_weights = cfg.get_doubles("parsing_stage_weights", {});
  c.pose_stage_weights = cfg.get_doubles("pose_stage_weights", {});
  const std::string res = cfg.get_string("parsing_loss_resolution", "output");
  if (res == "output") {
    c.parsing_loss_resolution = LossResolution::kOutput;
  } else if (res == "input") {
    c.parsing_loss_resolution = LossResolution::kInput;
  } else {
    throw ConfigError("parsing_loss_resolution must be output or input, got '" + res + "'");
  }
  c.pose_sigma = cfg.get_double("pose_sigma", c.pose_sigma);
  c.structure_sigma = cfg.get_double("structure_sigma", c.structure_sigma);
  c.divergence_limit = cfg.get_double("divergence_limit", c.divergence_limit);
  c.validate();
  return c;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  net.validate();
  if (!(augment.scale_min > 0.0) || augment.scale_max < augment.scale_min) {
    fail("scale_min/scale_max must satisfy 0 < scale_min <= scale_max");
  }
  if (!(augment.flip_prob >= 0.0 && augment.flip_prob <= 1.0)) fail("flip_prob must be in [0, 1]");
  if (augment.crop_size != net.input_size) fail("crop_size must equal input_size");
  if (phase_a_epochs < 0 || phase_b_epochs < 0) fail("epoch counts must be non-negative");
  if (batch_size < 1) fail("batch_size must be at least 1");
  if (max_samples < 0) fail("max_samples must be non-negative");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0, 1)");
  if (weight_decay < 0.0 || grad_clip < 0.0 || lr_power < 0.0) {
    fail("weight_decay, grad_clip and lr_power must be non-negative");
  }
  for (double w : parsing_stage_weights) {
    if (!(w >= 0.0)) fail("parsing_stage_weights must be non-negative");
  }
  for (double w : pose_stage_weights) {
    if (!(w >= 0.0)) fail("pose_stage_weights must be non-negative");
  }
  const auto stages = static_cast<std::size_t>(net.refine_stages + 1);
  if (parsing_stage_weights.size() > stages || pose_stage_weights.size() > stages) {
    fail("more stage weights than stages");
  }
  if (!(pose_sigma > 0.0) || !(structure_sigma > 0.0)) fail("sigmas must be positive");
  if (!(divergence_limit > 0.0)) fail("divergence_limit must be positive");
}

namespace {
std::vector<double> padded(const std::vector<double>& w, int stages) {
  std::vector<double> out(w.begin(), w.end());
  out.resize(static_cast<std::size_t>(std::max(stages, 0)), 1.0);
  return out;
}
}  // namespace

std::vector<double> TrainConfig::parsing_weights(int stages) const {
  return padded(parsing_stage_weights, stages);
}
std::vector<double> TrainConfig::pose_weights(int stages) const {
  return padded(pose_stage_weights, stages);
}

}  // namespace jpp::train
