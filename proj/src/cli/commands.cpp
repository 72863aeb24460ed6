// SPDX-License-Identifier: Apache-2.0
#include "jppnet/cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "jppnet/core/errors.hpp"
#include "jppnet/io/png.hpp"
#include "jppnet/metrics/report.hpp"
#include "jppnet/selfsup/structure.hpp"
#include "jppnet/synthgen/dataset.hpp"

namespace jpp::cli {
namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::vector<std::string> experiment_extra_keys() {
  std::vector<std::string> keys = infer::InferConfig::config_keys();
  keys.push_back("eval_split");
  return keys;
}

std::vector<fs::path> report_files(const fs::path& dir) {
  return {dir / "parsing.tsv", dir / "pose.tsv", dir / "per_class_iou.tsv", dir / "factors.tsv",
          dir / "report.json"};
}

std::string tables(std::span<const metrics::MethodReport> rows, bool factors) {
  std::string out = metrics::parsing_table(rows) + "\n" + metrics::pose_table(rows);
  if (factors) out += "\n" + metrics::factor_table(rows);
  return out;
}

metrics::MethodReport evaluate_archive(const fs::path& dataset, const std::string& split,
                                       const fs::path& archive, const std::string& method,
                                       bool factors) {
  const bool with_pose = fs::exists(archive / "poses.json");
  const synthgen::DatasetReader reader(dataset, with_pose);
  std::map<std::string, JointSet> predicted_poses;
  if (with_pose) predicted_poses = synthgen::read_pose_file(archive / "poses.json");
  std::vector<metrics::SampleMetrics> rows;
  for (const std::string& id : reader.manifest().split(split)) {
    const fs::path label_path = archive / "labels" / (id + ".png");
    if (!fs::exists(label_path)) throw DataError("no predicted labels for sample " + id);
    const LabelMap pred = synthgen::read_label_png(label_path, id);
    const synthgen::SampleRecord gt = reader.load(id);
    if (with_pose) {
      auto it = predicted_poses.find(id);
      if (it == predicted_poses.end()) throw DataError("no predicted joints for sample " + id);
      rows.push_back(metrics::evaluate_sample(id, pred, gt.labels, &it->second, &gt.joints));
    } else {
      rows.push_back(metrics::evaluate_sample(id, pred, gt.labels));
    }
  }
  metrics::MethodReport report;
  report.method = method;
  report.summary = metrics::summarize(rows);
  if (factors) report.factors = metrics::factor_report(reader.manifest(), rows);
  return report;
}

}  // namespace

CommandResult run_guarded(const std::function<CommandResult()>& body) {
  CommandResult failed;
  try {
    return body();
  } catch (const ConfigError& e) {
    failed.exit_code = kExitUsage;
    failed.summary = std::string("configuration error: ") + e.what();
  } catch (const DataError& e) {
    failed.exit_code = kExitData;
    failed.summary = std::string("data error: ") + e.what();
  } catch (const std::exception& e) {
    failed.exit_code = kExitRuntime;
    failed.summary = std::string("error: ") + e.what();
  }
  return failed;
}

train::TrainConfig experiment_train_config(const io::KeyValueConfig& cfg) {
  return train::TrainConfig::from_config(cfg, experiment_extra_keys());
}

infer::InferConfig experiment_infer_config(const io::KeyValueConfig& cfg) {
  return infer::InferConfig::from_config(cfg);
}

std::string experiment_eval_split(const io::KeyValueConfig& cfg) {
  return cfg.get_string("eval_split", "val");
}

io::KeyValueConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed) {
  io::KeyValueConfig cfg = io::KeyValueConfig::load(path);
  if (seed) cfg.set("seed", std::to_string(*seed));
  return cfg;
}

void echo_config(const fs::path& config, const fs::path& out, std::optional<std::uint64_t> seed) {
  fs::create_directories(out);
  write_text(out / "config.txt", read_text(config));
  if (seed) write_text(out / "overrides.txt", "seed = " + std::to_string(*seed) + "\n");
}

CommandResult cmd_gen_data(const fs::path& config, const fs::path& out,
                           std::optional<std::uint64_t> seed) {
  const auto cfg = synthgen::GeneratorConfig::from_config(load_config(config, seed));
  const synthgen::DatasetManifest manifest = synthgen::generate_dataset(cfg, out);
  echo_config(config, out, seed);
  CommandResult r;
  r.reports = {out / "manifest.json", out / "poses.json"};
  std::ostringstream ss;
  ss << "generated " << manifest.total_samples() << " samples in " << out.string();
  for (const auto& [split, ids] : manifest.splits) ss << "\n  " << split << ": " << ids.size();
  r.summary = ss.str();
  return r;
}

CommandResult cmd_train(const fs::path& config, train::Mode mode, const fs::path& out, bool resume,
                        std::optional<std::uint64_t> seed,
                        const std::function<void(const train::EpochRecord&)>& on_epoch) {
  const train::TrainConfig cfg = experiment_train_config(load_config(config, seed));
  echo_config(config, out, seed);
  train::TrainOptions options;
  options.resume = resume;
  options.on_epoch = on_epoch;
  const train::TrainResult result = train::train(cfg, mode, out, options);
  CommandResult r;
  r.reports = {result.checkpoint, out / "train_log.jsonl"};
  std::ostringstream ss;
  ss << train::mode_name(mode) << " training finished after " << result.steps << " steps";
  if (!result.log.empty()) ss << ", last epoch loss " << result.log.back().loss;
  ss << "\ncheckpoint: " << result.checkpoint.string();
  r.summary = ss.str();
  return r;
}

CommandResult cmd_predict(const PredictRequest& request) {
  if (!fs::is_regular_file(request.checkpoint)) {
    throw DataError("no checkpoint at " + request.checkpoint.string());
  }
  const auto model = infer::NetModel::load(request.checkpoint);
  const fs::path archive = request.out / "preds";
  const auto ids = infer::batch_predict(*model, request.dataset, request.split, request.infer, archive);
  CommandResult r;
  r.reports = {archive};
  r.summary = "wrote " + std::to_string(ids.size()) + " predictions to " + archive.string();
  return r;
}

CommandResult cmd_eval(const EvalRequest& request) {
  if (!fs::exists(request.source)) {
    throw DataError("no prediction archive or checkpoint at " + request.source.string());
  }
  fs::path archive = request.source;
  std::string method = request.method;
  if (fs::is_regular_file(request.source)) {
    const net::Checkpoint ckpt = net::read_checkpoint(request.source);
    const infer::NetModel model(ckpt);
    archive = request.out / "preds";
    infer::batch_predict(model, request.dataset, request.split, request.infer, archive);
    if (method.empty()) method = ckpt.meta.value("mode", "joint") == "ss" ? "SS-JPPNet" : "JPPNet";
  }
  if (fs::is_directory(request.source) && fs::exists(request.source / "manifest.json")) {
    archive = request.out / "preds";
    infer::write_ground_truth_archive(request.source, request.split, archive);
    if (method.empty()) method = "Ground truth";
  }
  if (method.empty()) method = "Prediction";
  const std::vector<metrics::MethodReport> rows = {
      evaluate_archive(request.dataset, request.split, archive, method, request.factors)};
  metrics::write_reports(request.out, rows);
  CommandResult r;
  r.reports = report_files(request.out);
  r.summary = tables(rows, request.factors);
  return r;
}

const std::vector<AblationVariant>& ablation_variants() {
  static const std::vector<AblationVariant> variants = {
      {"Joint", "joint", false, 0},
      {"Joint+MSC", "joint_msc", true, 0},
      {"Joint+S1", "joint_s1", false, 1},
      {"Joint+MSC+S1", "joint_msc_s1", true, 1},
      {"Joint+MSC+S2", "joint_msc_s2", true, 2},
  };
  return variants;
}

namespace {

// Variant config: stage toggles applied, stage weight lists cut to the
// variant's stage count.
io::KeyValueConfig variant_config(const io::KeyValueConfig& base, const AblationVariant& v) {
  io::KeyValueConfig c = base;
  c.set("msc", v.msc ? "true" : "false");
  c.set("refine_stages", std::to_string(v.refine_stages));
  c.set("with_pose", "true");
  for (const std::string key : {"parsing_stage_weights", "pose_stage_weights"}) {
    const auto raw = c.find(key);
    if (!raw) continue;
    std::vector<std::string> items;
    std::stringstream ss(*raw);
    for (std::string item; std::getline(ss, item, ',');) items.push_back(item);
    items.resize(std::min(items.size(), static_cast<std::size_t>(v.refine_stages + 1)));
    std::string joined;
    for (const auto& item : items) joined += (joined.empty() ? "" : ",") + item;
    c.set(key, joined);
  }
  return c;
}

}  // namespace

CommandResult cmd_ablate(const fs::path& config, const fs::path& out,
                         std::optional<std::uint64_t> seed) {
  const io::KeyValueConfig base = load_config(config, seed);
  // Reject bad configs before any work.
  for (const AblationVariant& v : ablation_variants()) experiment_train_config(variant_config(base, v));
  const infer::InferConfig infer_cfg = experiment_infer_config(base);
  const std::string split = experiment_eval_split(base);
  echo_config(config, out, seed);

  std::vector<metrics::MethodReport> rows;
  for (const AblationVariant& v : ablation_variants()) {
    const io::KeyValueConfig variant = variant_config(base, v);
    const fs::path dir = out / v.slug;
    fs::create_directories(dir);
    write_text(dir / "config.txt", "# " + v.name + "\n" + variant.to_string());

    const train::TrainConfig cfg = experiment_train_config(variant);
    const train::TrainResult trained = train::train(cfg, train::Mode::kJoint, dir);
    const infer::NetModel model(net::read_checkpoint(trained.checkpoint));
    const fs::path eval_dir = dir / "eval";
    infer::batch_predict(model, cfg.dataset, split, infer_cfg, eval_dir / "preds");
    const std::vector<metrics::MethodReport> row = {
        evaluate_archive(cfg.dataset, split, eval_dir / "preds", v.name, false)};
    metrics::write_reports(eval_dir, row);
    rows.push_back(row.front());
  }
  metrics::write_reports(out, rows);
  CommandResult r;
  r.reports = report_files(out);
  r.summary = tables(rows, false);
  return r;
}

CommandResult cmd_report(const std::vector<fs::path>& inputs, const fs::path& out) {
  if (inputs.empty()) throw ConfigError("report needs at least one report directory");
  std::vector<metrics::MethodReport> rows;
  bool factors = false;
  for (const fs::path& in : inputs) {
    fs::path file = fs::is_directory(in) ? in / "report.json" : in;
    if (!fs::exists(file) && fs::exists(in / "eval" / "report.json")) file = in / "eval" / "report.json";
    if (!fs::exists(file)) throw DataError("no report at " + file.string());
    std::ifstream f(file, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    for (auto& row : metrics::parse_report_json(ss.str(), file.string())) {
      factors = factors || !row.factors.empty();
      rows.push_back(std::move(row));
    }
  }
  metrics::write_reports(out, rows);
  CommandResult r;
  r.reports = report_files(out);
  r.summary = tables(rows, factors);
  return r;
}

CommandResult cmd_pseudo_joints(const fs::path& dataset, const std::string& id,
                                const fs::path& out_png, double sigma) {
  const synthgen::DatasetReader reader(dataset, false);
  const synthgen::SampleRecord sample = reader.load(id);
  const HeatmapStack stack = selfsup::pseudo_joints_from_parsing(
      sample.labels, sample.labels.height(), sample.labels.width(), sigma);
  if (out_png.has_parent_path()) fs::create_directories(out_png.parent_path());
  io::write_png(out_png, selfsup::heatmap_grid(stack));
  CommandResult r;
  r.reports = {out_png};
  r.summary = "wrote pseudo-joint heatmaps of " + id + " to " + out_png.string();
  return r;
}

}  // namespace jpp::cli
