// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "jppnet/core/types.hpp"
#include "jppnet/io/kv_config.hpp"
#include "jppnet/synthgen/render.hpp"
#include "jppnet/synthgen/skeleton.hpp"

namespace jpp::synthgen {

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr const char* kSplitNames[] = {"train", "val", "test"};

struct SampleRecord {
  std::string id;
  RgbImage image;
  LabelMap labels;
  JointSet joints;
  std::vector<ChallengeFactor> factors;  // sorted, unique

  bool has(ChallengeFactor f) const;
  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct DatasetManifest {
  int format_version = kDatasetFormatVersion;
  std::uint64_t seed = 0;
  Canvas canvas;
  /// Split name -> ordered sample ids.
  std::map<std::string, std::vector<std::string>> splits;
  std::map<std::string, std::vector<ChallengeFactor>> factors;

  const std::vector<std::string>& split(const std::string& name) const;
  std::size_t total_samples() const;
  /// Throws DataError on duplicate ids or ids without a factor entry.
  void validate() const;

  std::string to_json() const;
  static DatasetManifest from_json(const std::string& text, const std::string& origin);
};

struct GeneratorConfig {
  int train = 50;
  int val = 20;
  int test = 0;
  std::uint64_t seed = 0;
  Canvas canvas;
  TorsoAnchor anchor;
  StyleOptions style;

  /// Reads keys train, val, test, seed, canvas_height, canvas_width,
  /// occlusion_prob, truncate_top_prob, truncate_bottom_prob, back_view_prob,
  /// small_part_prob, hat_prob, skirt_prob, coat_prob, dress_prob,
  /// jumpsuit_prob. Negative counts and unknown keys raise ConfigError.
  static GeneratorConfig from_config(const io::KeyValueConfig& cfg);
  void validate() const;
};

/// Factor tags as a pure function of a sample's annotation:
///   head-missing  <=> head-top and upper-neck absent
///   upper-body    <=> both knees and both ankles absent
///   lower-body    <=> thorax, upper-neck, head-top and both shoulders absent
///   full-body     <=> all 16 joints present
///   occlusion     <=> at least one joint is occluded-but-annotated
///   back-view     <=> the subject's right shoulder (else hip, else arm region)
///                     lies to the image right of its left counterpart
std::vector<ChallengeFactor> derive_factors(const LabelMap& labels, const JointSet& joints);

std::string sample_id(const std::string& split, int index);

/// Generates one sample; randomness depends only on (seed, id).
SampleRecord generate_sample(const GeneratorConfig& config, const std::string& id);

/// Writes the whole dataset under `root`:
///   {split}/images/<id>.png, {split}/labels/<id>.png, poses.json,
///   manifest.json, taxonomy.tsv.
DatasetManifest generate_dataset(const GeneratorConfig& config, const std::filesystem::path& root);

/// Reads samples from a dataset directory. With `with_poses` false the
/// annotation file is never opened and joints come back absent.
class DatasetReader {
 public:
  explicit DatasetReader(std::filesystem::path root, bool with_poses = true);

  const DatasetManifest& manifest() const { return manifest_; }
  const std::filesystem::path& root() const { return root_; }

  SampleRecord load(const std::string& id) const;
  std::vector<SampleRecord> load_split(const std::string& split) const;
  void for_each(const std::string& split, const std::function<void(const SampleRecord&)>& fn) const;

  /// Number of times any reader in this process opened poses.json.
  static std::size_t pose_file_reads();

 private:
  std::string split_of(const std::string& id) const;
  void ensure_poses() const;

  std::filesystem::path root_;
  bool with_poses_;
  DatasetManifest manifest_;
  std::map<std::string, std::string> split_of_;
  mutable bool poses_loaded_ = false;
  mutable std::map<std::string, JointSet> poses_;
};

SampleRecord load_sample(const std::filesystem::path& root, const std::string& id);

/// Joint annotation file helpers (map id -> 16 records [x, y, v]).
std::map<std::string, JointSet> read_pose_file(const std::filesystem::path& path);
void write_pose_file(const std::filesystem::path& path, const std::map<std::string, JointSet>& poses);

/// Reads a single-channel label PNG, reporting out-of-range values with `id`.
LabelMap read_label_png(const std::filesystem::path& path, const std::string& id);

}  // namespace jpp::synthgen
