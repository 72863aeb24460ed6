// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "jppnet/train/config.hpp"
#include "jppnet/train/losses.hpp"

namespace jpp::train {

/// One line of the epoch log (train_log.jsonl).
struct EpochRecord {
  std::string phase;  // "A" or "B"
  int epoch = 0;      // 1-based within the phase
  long step = 0;      // global optimizer step at the end of the epoch
  double learning_rate = 0.0;
  double loss = 0.0;  // mean total loss over the epoch's samples
  std::vector<double> parsing;
  std::vector<double> pose;
  double l_joint = 0.0;
  double grad_norm = 0.0;  // mean over the epoch's steps

  std::string to_json() const;
  static EpochRecord from_json(const std::string& line);
};

struct TrainOptions {
  bool resume = false;
  /// Stop after this many epochs in this invocation (negative = run to the
  /// end). Used to simulate interruption.
  int epoch_budget = -1;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  std::filesystem::path checkpoint;  // model.ckpt, or latest.ckpt when stopped early
  bool finished = false;
  long steps = 0;
  std::vector<EpochRecord> log;  // records written by this invocation
};

/// Output layout under `out`: phase_a.ckpt, latest.ckpt, model.ckpt,
/// train_log.jsonl.
///
/// Phase A trains the parsing-only network (backbone and part module) on
/// the parsing loss. Joint mode then trains the configured network with
/// every layer present in phase A initialised from it. Structure mode
/// fine-tunes the phase A network under the structure-sensitive loss and
/// never opens the joint annotations.
TrainResult train_jppnet(const TrainConfig& cfg, const std::filesystem::path& out,
                         const TrainOptions& options = {});
TrainResult train_ssjppnet(const TrainConfig& cfg, const std::filesystem::path& out,
                           const TrainOptions& options = {});
TrainResult train(const TrainConfig& cfg, Mode mode, const std::filesystem::path& out,
                  const TrainOptions& options = {});

/// Parsing-only variant of a network description.
net::NetConfig parsing_only(net::NetConfig cfg);

std::vector<EpochRecord> read_train_log(const std::filesystem::path& path);

}  // namespace jpp::train
