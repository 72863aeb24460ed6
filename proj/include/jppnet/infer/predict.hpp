// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jppnet/core/types.hpp"
#include "jppnet/io/kv_config.hpp"
#include "jppnet/metrics/decode.hpp"
#include "jppnet/net/checkpoint.hpp"

namespace jpp::infer {

struct InferConfig {
  std::vector<double> scales{0.75, 0.5, 1.25};
  bool flip = true;
  float detect_threshold = metrics::kDefaultDetectThreshold;

  /// Keys: scales, flip, detect_threshold. Other keys are ignored so the
  /// same file can also carry training settings.
  static InferConfig from_config(const io::KeyValueConfig& cfg);
  static const std::vector<std::string>& config_keys();
  void validate() const;
};

/// Raw outputs of one stage at the model's output resolution.
struct StageMaps {
  HeatmapStack parsing;             // 20 channels, logits
  std::optional<HeatmapStack> pose; // 16 channels
};

/// Anything that maps an image to per-stage score maps. Inputs passed to
/// `run` always have sides that are multiples of `stride()`.
class Model {
 public:
  virtual ~Model() = default;
  virtual int stride() const = 0;
  virtual std::vector<StageMaps> run(const RgbImage& image) const = 0;
};

/// A trained network restored from a checkpoint.
class NetModel final : public Model {
 public:
  explicit NetModel(const net::Checkpoint& ckpt);
  static std::unique_ptr<NetModel> load(const std::filesystem::path& path);

  int stride() const override { return net_.config().output_stride; }
  std::vector<StageMaps> run(const RgbImage& image) const override;
  const net::NetConfig& config() const { return net_.config(); }

 private:
  net::JppNet<float> net_;
};

struct Prediction {
  LabelMap labels;
  JointSet joints;                       // all absent without pose outputs
  HeatmapStack parsing_probabilities;    // 20 x H x W
  std::optional<HeatmapStack> pose_heatmaps;  // 16 x H x W
};

/// For every scale (and its mirrored twin when flip is on) the image is
/// resized, run, and each output brought back to native resolution; mirrored
/// outputs are un-flipped with their left/right channels exchanged. Parsing
/// scores are resized bilinearly, turned into softmax probabilities and
/// averaged over scales, flips and stages; pose averages the final stage's
/// heatmaps over scales and flips. Both are decoded once at native
/// resolution.
Prediction predict(const Model& model, const RgbImage& image, const InferConfig& cfg);

/// Writes `out`/labels/<id>.png and, for models with pose outputs,
/// `out`/poses.json in the dataset's own formats. Returns the ids written.
std::vector<std::string> batch_predict(const Model& model, const std::filesystem::path& dataset,
                                       const std::string& split, const InferConfig& cfg,
                                       const std::filesystem::path& out);

/// Ground-truth archive of a split in the same layout, for identity checks.
std::vector<std::string> write_ground_truth_archive(const std::filesystem::path& dataset,
                                                    const std::string& split,
                                                    const std::filesystem::path& out);

}  // namespace jpp::infer
