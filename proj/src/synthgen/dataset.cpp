// SPDX-License-Identifier: Apache-2.0
#include "jppnet/synthgen/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "jppnet/core/errors.hpp"
#include "jppnet/core/random.hpp"
#include "jppnet/io/png.hpp"

namespace jpp::synthgen {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<std::size_t> g_pose_file_reads{0};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

void create_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

json joints_to_json(const JointSet& joints) {
  json arr = json::array();
  for (const JointRecord& r : joints.records()) {
    arr.push_back(json::array({r.x, r.y, static_cast<int>(r.visibility)}));
  }
  return arr;
}

JointSet joints_from_json(const json& arr, const std::string& id) {
  if (!arr.is_array() || arr.size() != static_cast<std::size_t>(kNumJoints)) {
    throw DataError("malformed joint record for sample " + id + ": expected 16 entries");
  }
  JointSet joints;
  for (int j = 0; j < kNumJoints; ++j) {
    const json& rec = arr[static_cast<std::size_t>(j)];
    if (!rec.is_array() || rec.size() != 3 || !rec[0].is_number() || !rec[1].is_number() ||
        !rec[2].is_number_integer()) {
      throw DataError("malformed joint record for sample " + id + ", joint " +
                      std::string(joint_name(j)));
    }
    const int v = rec[2].get<int>();
    const double x = rec[0].get<double>(), y = rec[1].get<double>();
    if (v < 0 || v > 2) {
      throw DataError("invalid visibility code " + std::to_string(v) + " for sample " + id +
                      ", joint " + std::string(joint_name(j)));
    }
    if (v == 0) {
      if (x != JointRecord::kAbsentCoordinate || y != JointRecord::kAbsentCoordinate) {
        throw DataError("absent joint without sentinel coordinates for sample " + id);
      }
      continue;
    }
    joints.set(j, JointRecord::at(x, y, static_cast<Visibility>(v)));
  }
  return joints;
}

bool is_absent(const JointSet& j, Joint joint) { return !j[joint].present(); }

std::optional<double> region_mean_x(const LabelMap& labels, Part part) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      if (labels.at(y, x) == index_of(part)) {
        sum += x;
        ++n;
      }
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

bool SampleRecord::has(ChallengeFactor f) const {
  return std::find(factors.begin(), factors.end(), f) != factors.end();
}

const std::vector<std::string>& DatasetManifest::split(const std::string& name) const {
  auto it = splits.find(name);
  if (it == splits.end()) throw DataError("dataset has no split '" + name + "'");
  return it->second;
}

std::size_t DatasetManifest::total_samples() const {
  std::size_t n = 0;
  for (const auto& [name, ids] : splits) n += ids.size();
  return n;
}

void DatasetManifest::validate() const {
  std::set<std::string> seen;
  for (const auto& [name, ids] : splits) {
    for (const auto& id : ids) {
      if (!seen.insert(id).second) throw DataError("duplicate sample id in manifest: " + id);
      if (factors.find(id) == factors.end()) {
        throw DataError("manifest has no factor entry for sample " + id);
      }
    }
  }
}

std::string DatasetManifest::to_json() const {
  json j;
  j["format_version"] = format_version;
  j["seed"] = seed;
  j["canvas"] = {{"height", canvas.height}, {"width", canvas.width}};
  json sp = json::object();
  for (const auto& [name, ids] : splits) sp[name] = ids;
  j["splits"] = sp;
  json fac = json::object();
  for (const auto& [id, fs_] : factors) {
    json names = json::array();
    for (ChallengeFactor f : fs_) names.push_back(std::string(factor_name(f)));
    fac[id] = names;
  }
  j["factors"] = fac;
  return j.dump(1) + "\n";
}

DatasetManifest DatasetManifest::from_json(const std::string& text, const std::string& origin) {
  DatasetManifest m;
  try {
    const json j = json::parse(text);
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kDatasetFormatVersion) {
      throw DataError("unsupported dataset format version " + std::to_string(m.format_version) +
                      " in " + origin);
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    m.canvas.height = j.at("canvas").at("height").get<int>();
    m.canvas.width = j.at("canvas").at("width").get<int>();
    for (const auto& [name, ids] : j.at("splits").items()) {
      m.splits[name] = ids.get<std::vector<std::string>>();
    }
    for (const auto& [id, names] : j.at("factors").items()) {
      std::vector<ChallengeFactor> fs_;
      for (const auto& n : names) {
        auto f = factor_from_name(n.get<std::string>());
        if (!f) throw DataError("unknown challenge factor '" + n.get<std::string>() + "' for " + id);
        fs_.push_back(*f);
      }
      m.factors[id] = fs_;
    }
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + origin + ": " + e.what());
  }
  m.validate();
  return m;
}

GeneratorConfig GeneratorConfig::from_config(const io::KeyValueConfig& cfg) {
  static const std::vector<std::string> kKnown = {
      "train",          "val",           "test",         "seed",
      "canvas_height",  "canvas_width",  "occlusion_prob", "truncate_top_prob",
      "truncate_bottom_prob", "back_view_prob", "small_part_prob", "hat_prob",
      "skirt_prob",     "coat_prob",     "dress_prob",   "jumpsuit_prob"};
  if (auto unknown = cfg.unknown_keys(kKnown); !unknown.empty()) {
    throw ConfigError("unknown gen-data config key '" + unknown.front() + "'");
  }
  GeneratorConfig c;
  auto count = [&cfg](const char* key, int fallback) {
    const long long v = cfg.get_int(key, fallback);
    if (v < 0) throw ConfigError(std::string("config key '") + key + "' must be non-negative");
    return static_cast<int>(v);
  };
  c.train = count("train", c.train);
  c.val = count("val", c.val);
  c.test = count("test", c.test);
  const long long seed = cfg.get_int("seed", 0);
  if (seed < 0) throw ConfigError("config key 'seed' must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.canvas.height = count("canvas_height", c.canvas.height);
  c.canvas.width = count("canvas_width", c.canvas.width);
  c.style.occlusion_prob = cfg.get_double("occlusion_prob", c.style.occlusion_prob);
  c.anchor.truncate_top_prob = cfg.get_double("truncate_top_prob", c.anchor.truncate_top_prob);
  c.anchor.truncate_bottom_prob =
      cfg.get_double("truncate_bottom_prob", c.anchor.truncate_bottom_prob);
  c.anchor.back_view_prob = cfg.get_double("back_view_prob", c.anchor.back_view_prob);
  c.style.small_part_prob = cfg.get_double("small_part_prob", c.style.small_part_prob);
  c.style.hat_prob = cfg.get_double("hat_prob", c.style.hat_prob);
  c.style.skirt_prob = cfg.get_double("skirt_prob", c.style.skirt_prob);
  c.style.coat_prob = cfg.get_double("coat_prob", c.style.coat_prob);
  c.style.dress_prob = cfg.get_double("dress_prob", c.style.dress_prob);
  c.style.jumpsuit_prob = cfg.get_double("jumpsuit_prob", c.style.jumpsuit_prob);
  c.validate();
  return c;
}

void GeneratorConfig::validate() const {
  if (train < 0 || val < 0 || test < 0) throw ConfigError("split counts must be non-negative");
  if (canvas.height < 32 || canvas.width < 32) {
    throw ConfigError("canvas must be at least 32x32");
  }
  auto prob = [](double p, const char* key) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError(std::string("config key '") + key + "' must be in [0, 1]");
    }
  };
  prob(style.occlusion_prob, "occlusion_prob");
  prob(anchor.truncate_top_prob, "truncate_top_prob");
  prob(anchor.truncate_bottom_prob, "truncate_bottom_prob");
  prob(anchor.back_view_prob, "back_view_prob");
  prob(style.small_part_prob, "small_part_prob");
  prob(style.hat_prob, "hat_prob");
  prob(style.skirt_prob, "skirt_prob");
  prob(style.coat_prob + style.dress_prob + style.jumpsuit_prob, "coat_prob + dress_prob + jumpsuit_prob");
  prob(anchor.truncate_top_prob + anchor.truncate_bottom_prob, "truncate_top_prob + truncate_bottom_prob");
}

std::vector<ChallengeFactor> derive_factors(const LabelMap& labels, const JointSet& joints) {
  std::vector<ChallengeFactor> out;
  bool occluded = false;
  for (const JointRecord& r : joints.records()) occluded |= r.visibility == Visibility::kOccluded;
  if (occluded) out.push_back(ChallengeFactor::kOcclusion);
  if (joints.count_present() == kNumJoints) out.push_back(ChallengeFactor::kFullBody);
  if (is_absent(joints, Joint::kRKnee) && is_absent(joints, Joint::kLKnee) &&
      is_absent(joints, Joint::kRAnkle) && is_absent(joints, Joint::kLAnkle)) {
    out.push_back(ChallengeFactor::kUpperBody);
  }
  const bool head_missing = is_absent(joints, Joint::kHeadTop) && is_absent(joints, Joint::kUpperNeck);
  if (head_missing && is_absent(joints, Joint::kThorax) && is_absent(joints, Joint::kRShoulder) &&
      is_absent(joints, Joint::kLShoulder)) {
    out.push_back(ChallengeFactor::kLowerBody);
  }
  if (head_missing) out.push_back(ChallengeFactor::kHeadMissing);

  std::optional<bool> back;
  auto pair_order = [&joints](Joint r, Joint l) -> std::optional<bool> {
    if (joints[r].present() && joints[l].present()) return joints[r].x > joints[l].x;
    return std::nullopt;
  };
  back = pair_order(Joint::kRShoulder, Joint::kLShoulder);
  if (!back) back = pair_order(Joint::kRHip, Joint::kLHip);
  if (!back) {
    const auto r = region_mean_x(labels, Part::kRightArm);
    const auto l = region_mean_x(labels, Part::kLeftArm);
    if (r && l) back = *r > *l;
  }
  if (back.value_or(false)) out.push_back(ChallengeFactor::kBackView);
  std::sort(out.begin(), out.end());
  return out;
}

std::string sample_id(const std::string& split, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%06d", split.c_str(), index);
  return buf;
}

SampleRecord generate_sample(const GeneratorConfig& config, const std::string& id) {
  Rng rng(derive_seed(config.seed, hash_string(id)));
  SkeletonSpec spec = SkeletonSpec::standard(config.canvas);
  spec.anchor = config.anchor;
  const SampledSkeleton skeleton = sample_skeleton(rng, config.canvas, spec);
  const RenderStyle style = RenderStyle::sample(rng, skeleton, config.canvas, config.style);
  Rendering r = rasterize_person(skeleton, style, config.canvas);
  SampleRecord rec;
  rec.id = id;
  rec.factors = derive_factors(r.labels, r.joints);
  rec.image = std::move(r.image);
  rec.labels = std::move(r.labels);
  rec.joints = r.joints;
  return rec;
}

DatasetManifest generate_dataset(const GeneratorConfig& config, const fs::path& root) {
  config.validate();
  DatasetManifest manifest;
  manifest.seed = config.seed;
  manifest.canvas = config.canvas;
  std::map<std::string, JointSet> poses;

  const std::pair<const char*, int> counts[] = {
      {"train", config.train}, {"val", config.val}, {"test", config.test}};
  for (const auto& [split, n] : counts) {
    auto& ids = manifest.splits[split];
    if (n > 0) {
      create_dirs(root / split / "images");
      create_dirs(root / split / "labels");
    }
    for (int i = 0; i < n; ++i) {
      const std::string id = sample_id(split, i);
      SampleRecord rec = generate_sample(config, id);
      io::write_png(root / split / "images" / (id + ".png"), rec.image);
      io::write_png(root / split / "labels" / (id + ".png"), rec.labels);
      poses[id] = rec.joints;
      manifest.factors[id] = rec.factors;
      ids.push_back(id);
    }
  }
  create_dirs(root);
  write_pose_file(root / "poses.json", poses);
  write_text(root / "manifest.json", manifest.to_json());
  std::ostringstream tax;
  write_taxonomy(tax);
  write_text(root / "taxonomy.tsv", tax.str());
  return manifest;
}

std::map<std::string, JointSet> read_pose_file(const fs::path& path) {
  const std::string text = read_text(path);
  std::map<std::string, JointSet> out;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError("malformed joint file " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw DataError("joint file must hold an object: " + path.string());
  for (const auto& [id, arr] : j.items()) out[id] = joints_from_json(arr, id);
  return out;
}

void write_pose_file(const fs::path& path, const std::map<std::string, JointSet>& poses) {
  std::string text = "{\n";
  bool first = true;
  for (const auto& [id, joints] : poses) {
    if (!first) text += ",\n";
    first = false;
    text += json(id).dump() + ": " + joints_to_json(joints).dump();
  }
  text += "\n}\n";
  write_text(path, text);
}

LabelMap read_label_png(const fs::path& path, const std::string& id) {
  if (!fs::exists(path)) throw DataError("missing label map for sample " + id + ": " + path.string());
  io::GrayImage g = io::read_png_gray(path);
  for (std::uint8_t v : g.values) {
    if (v >= kNumPartClasses) {
      throw DataError("label index out of range (" + std::to_string(static_cast<int>(v)) +
                      ") in sample " + id);
    }
  }
  return LabelMap::from_values(g.height, g.width, std::move(g.values));
}

DatasetReader::DatasetReader(fs::path root, bool with_poses)
    : root_(std::move(root)), with_poses_(with_poses) {
  const fs::path mpath = root_ / "manifest.json";
  manifest_ = DatasetManifest::from_json(read_text(mpath), mpath.string());
  for (const auto& [split, ids] : manifest_.splits) {
    for (const auto& id : ids) split_of_[id] = split;
  }
}

std::size_t DatasetReader::pose_file_reads() { return g_pose_file_reads.load(); }

std::string DatasetReader::split_of(const std::string& id) const {
  auto it = split_of_.find(id);
  if (it == split_of_.end()) throw DataError("sample " + id + " is not listed in the manifest");
  return it->second;
}

void DatasetReader::ensure_poses() const {
  if (poses_loaded_) return;
  ++g_pose_file_reads;
  poses_ = read_pose_file(root_ / "poses.json");
  poses_loaded_ = true;
}

SampleRecord DatasetReader::load(const std::string& id) const {
  const std::string split = split_of(id);
  SampleRecord rec;
  rec.id = id;
  const fs::path image_path = root_ / split / "images" / (id + ".png");
  if (!fs::exists(image_path)) {
    throw DataError("missing image for sample " + id + ": " + image_path.string());
  }
  rec.image = io::read_png_rgb(image_path);
  rec.labels = read_label_png(root_ / split / "labels" / (id + ".png"), id);
  if (rec.labels.height() != rec.image.height() || rec.labels.width() != rec.image.width()) {
    throw DataError("image and label map sizes differ for sample " + id);
  }
  if (with_poses_) {
    ensure_poses();
    auto it = poses_.find(id);
    if (it == poses_.end()) throw DataError("no joint record for sample " + id);
    rec.joints = it->second;
  }
  rec.factors = manifest_.factors.at(id);
  return rec;
}

std::vector<SampleRecord> DatasetReader::load_split(const std::string& split) const {
  std::vector<SampleRecord> out;
  for_each(split, [&out](const SampleRecord& r) { out.push_back(r); });
  return out;
}

void DatasetReader::for_each(const std::string& split,
                             const std::function<void(const SampleRecord&)>& fn) const {
  for (const auto& id : manifest_.split(split)) fn(load(id));
}

SampleRecord load_sample(const fs::path& root, const std::string& id) {
  return DatasetReader(root).load(id);
}

}  // namespace jpp::synthgen
