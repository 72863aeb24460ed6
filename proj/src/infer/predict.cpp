// SPDX-License-Identifier: Apache-2.0
#include "jppnet/infer/predict.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "jppnet/core/errors.hpp"
#include "jppnet/core/geometry.hpp"
#include "jppnet/io/png.hpp"
#include "jppnet/synthgen/dataset.hpp"

namespace jpp::infer {
namespace fs = std::filesystem;

InferConfig InferConfig::from_config(const io::KeyValueConfig& cfg) {
  InferConfig c;
  c.scales = cfg.get_doubles("scales", c.scales);
  c.flip = cfg.get_bool("flip", c.flip);
  c.detect_threshold = static_cast<float>(cfg.get_double("detect_threshold", c.detect_threshold));
  c.validate();
  return c;
}

const std::vector<std::string>& InferConfig::config_keys() {
  static const std::vector<std::string> keys = {"scales", "flip", "detect_threshold"};
  return keys;
}

void InferConfig::validate() const {
  if (scales.empty()) throw ConfigError("scales must list at least one scale");
  for (double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("scales must be positive");
  }
  if (!(detect_threshold >= 0.0F)) throw ConfigError("detect_threshold must be non-negative");
}

NetModel::NetModel(const net::Checkpoint& ckpt) : net_(ckpt.net, 0) {
  net::load_weights(net_, ckpt, true);
}

std::unique_ptr<NetModel> NetModel::load(const fs::path& path) {
  return std::make_unique<NetModel>(net::read_checkpoint(path));
}

namespace {

HeatmapStack to_stack(const nn::Tensor<float>& t) {
  HeatmapStack s(t.dim(0), t.dim(1), t.dim(2));
  std::copy(t.data(), t.data() + t.size(), s.values().begin());
  return s;
}

nn::Tensor<float> to_tensor(const HeatmapStack& s) {
  nn::Tensor<float> t({s.channels(), s.height(), s.width()});
  std::copy(s.values().begin(), s.values().end(), t.data());
  return t;
}

void add_into(HeatmapStack& acc, const HeatmapStack& x) {
  if (acc.channels() == 0) {
    acc = x;
    return;
  }
  auto dst = acc.values();
  auto src = x.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void divide(HeatmapStack& acc, double n) {
  for (float& v : acc.values()) v = static_cast<float>(v / n);
}

}  // namespace

std::vector<StageMaps> NetModel::run(const RgbImage& image) const {
  nn::NoGradGuard no_grad;
  const auto outputs = net_.forward(net::image_tensor<float>(image));
  std::vector<StageMaps> maps;
  for (const auto& o : outputs) {
    StageMaps m;
    m.parsing = to_stack(o.parsing->value);
    if (o.pose) m.pose = to_stack(o.pose->value);
    maps.push_back(std::move(m));
  }
  return maps;
}

Prediction predict(const Model& model, const RgbImage& image, const InferConfig& cfg) {
  cfg.validate();
  const int H = image.height();
  const int W = image.width();
  const int stride = model.stride();

  HeatmapStack parsing_sum;
  HeatmapStack pose_sum;
  int parsing_terms = 0;
  int pose_terms = 0;
  for (double s : cfg.scales) {
    const int h = net::scaled_size(H, s, stride);
    const int w = net::scaled_size(W, s, stride);
    const RgbImage scaled = (h == H && w == W) ? image : resize_image(image, h, w);
    for (int f = 0; f < (cfg.flip ? 2 : 1); ++f) {
      const bool flipped = f == 1;
      const auto stages = model.run(flipped ? flip_image(scaled) : scaled);
      for (const StageMaps& stage : stages) {
        // Scores are resized before the softmax so sub-cell boundary
        // information carried by the logits survives upsampling.
        const nn::Tensor<float> scores =
            nn::resize_bilinear_tensor(to_tensor(stage.parsing), H, W, Alignment::kHalfPixel);
        HeatmapStack native = to_stack(nn::softmax_channels(scores));
        if (flipped) native = flip_class_scores(native);
        add_into(parsing_sum, native);
        ++parsing_terms;
      }
      if (!stages.empty() && stages.back().pose) {
        HeatmapStack native = resize_heatmaps(*stages.back().pose, H, W, Alignment::kOrigin);
        if (flipped) native = flip_heatmaps(native, true);
        add_into(pose_sum, native);
        ++pose_terms;
      }
    }
  }
  if (parsing_terms == 0) throw ShapeError("model produced no stage outputs");

  Prediction p;
  divide(parsing_sum, parsing_terms);
  p.labels = metrics::decode_parsing(parsing_sum);
  p.parsing_probabilities = std::move(parsing_sum);
  if (pose_terms > 0) {
    divide(pose_sum, pose_terms);
    p.joints = metrics::decode_pose(pose_sum, 1.0, cfg.detect_threshold);
    p.pose_heatmaps = std::move(pose_sum);
  }
  return p;
}

std::vector<std::string> batch_predict(const Model& model, const fs::path& dataset,
                                       const std::string& split, const InferConfig& cfg,
                                       const fs::path& out) {
  // Prediction needs images only; the joint annotations stay closed.
  const synthgen::DatasetReader reader(dataset, false);
  const auto& ids = reader.manifest().split(split);
  fs::create_directories(out / "labels");
  std::map<std::string, JointSet> poses;
  bool any_pose = false;
  for (const std::string& id : ids) {
    const synthgen::SampleRecord sample = reader.load(id);
    const Prediction p = predict(model, sample.image, cfg);
    try {
      io::write_png(out / "labels" / (id + ".png"), p.labels);
    } catch (const Error& e) {
      throw DataError("sample " + id + ": " + e.what());
    }
    any_pose = any_pose || p.pose_heatmaps.has_value();
    poses[id] = p.joints;
  }
  if (any_pose) synthgen::write_pose_file(out / "poses.json", poses);
  return ids;
}

std::vector<std::string> write_ground_truth_archive(const fs::path& dataset,
                                                    const std::string& split,
                                                    const fs::path& out) {
  const synthgen::DatasetReader reader(dataset, true);
  const auto& ids = reader.manifest().split(split);
  fs::create_directories(out / "labels");
  std::map<std::string, JointSet> poses;
  for (const std::string& id : ids) {
    const synthgen::SampleRecord sample = reader.load(id);
    io::write_png(out / "labels" / (id + ".png"), sample.labels);
    poses[id] = sample.joints;
  }
  synthgen::write_pose_file(out / "poses.json", poses);
  return ids;
}

}  // namespace jpp::infer
