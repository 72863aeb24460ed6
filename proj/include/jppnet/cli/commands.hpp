// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "jppnet/infer/predict.hpp"
#include "jppnet/io/kv_config.hpp"
#include "jppnet/train/config.hpp"
#include "jppnet/train/trainer.hpp"

namespace jpp::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitRuntime = 3 };

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> reports;
  std::string summary;
};

/// Runs `body`, mapping ConfigError to exit 1, DataError to exit 2 and any
/// other failure to exit 3 with the message as summary.
CommandResult run_guarded(const std::function<CommandResult()>& body);

/// Experiment files hold training keys, inference keys and `eval_split`.
train::TrainConfig experiment_train_config(const io::KeyValueConfig& cfg);
infer::InferConfig experiment_infer_config(const io::KeyValueConfig& cfg);
std::string experiment_eval_split(const io::KeyValueConfig& cfg);

/// Loads a config file; `seed` (when given) replaces its `seed` key.
io::KeyValueConfig load_config(const std::filesystem::path& path,
                               std::optional<std::uint64_t> seed);

/// Copies the config file byte for byte to `out`/config.txt and records a
/// seed override, if any, in `out`/overrides.txt.
void echo_config(const std::filesystem::path& config, const std::filesystem::path& out,
                 std::optional<std::uint64_t> seed);

CommandResult cmd_gen_data(const std::filesystem::path& config, const std::filesystem::path& out,
                           std::optional<std::uint64_t> seed = std::nullopt);

CommandResult cmd_train(const std::filesystem::path& config, train::Mode mode,
                        const std::filesystem::path& out, bool resume = false,
                        std::optional<std::uint64_t> seed = std::nullopt,
                        const std::function<void(const train::EpochRecord&)>& on_epoch = {});

struct PredictRequest {
  std::filesystem::path checkpoint;
  std::filesystem::path dataset;
  std::string split = "val";
  infer::InferConfig infer;
  std::filesystem::path out;  // archive goes to out/preds
};
CommandResult cmd_predict(const PredictRequest& request);

struct EvalRequest {
  std::filesystem::path dataset;
  /// A prediction archive directory, a checkpoint file, or a dataset root
  /// (scored as its own ground-truth archive).
  std::filesystem::path source;
  std::string split = "val";
  bool factors = false;
  std::string method;  // empty: derived from the source
  infer::InferConfig infer;
  std::filesystem::path out;
};
/// Writes parsing.tsv, pose.tsv, per_class_iou.tsv, factors.tsv (when
/// requested) and report.json into `out`.
CommandResult cmd_eval(const EvalRequest& request);

struct AblationVariant {
  std::string name;  // e.g. "Joint+MSC+S1"
  std::string slug;  // directory name
  bool msc = false;
  int refine_stages = 0;
};
const std::vector<AblationVariant>& ablation_variants();

/// Trains and evaluates every variant under `out`/<slug>/ (each with its own
/// echoed config.txt) and writes the comparison tables into `out`.
CommandResult cmd_ablate(const std::filesystem::path& config, const std::filesystem::path& out,
                         std::optional<std::uint64_t> seed = std::nullopt);

/// Concatenates the method rows of several report.json files.
CommandResult cmd_report(const std::vector<std::filesystem::path>& inputs,
                         const std::filesystem::path& out);

/// Renders the nine pseudo-joint heatmaps of one sample's labels as a 3x3
/// PNG grid.
CommandResult cmd_pseudo_joints(const std::filesystem::path& dataset, const std::string& id,
                                const std::filesystem::path& out_png, double sigma);

}  // namespace jpp::cli
