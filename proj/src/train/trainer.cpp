// SPDX-License-Identifier: Apache-2.0
#include "jppnet/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "jppnet/core/errors.hpp"
#include "jppnet/core/geometry.hpp"
#include "jppnet/core/random.hpp"
#include "jppnet/net/checkpoint.hpp"
#include "jppnet/train/augment.hpp"
#include "jppnet/train/optimizer.hpp"

namespace jpp::train {
namespace fs = std::filesystem;
using nlohmann::json;

std::string EpochRecord::to_json() const {
  json j = {{"phase", phase},   {"epoch", epoch},       {"step", step},
            {"lr", learning_rate}, {"loss", loss},     {"parsing", parsing},
            {"pose", pose},     {"l_joint", l_joint},   {"grad_norm", grad_norm}};
  return j.dump();
}

EpochRecord EpochRecord::from_json(const std::string& line) {
  try {
    const json j = json::parse(line);
    EpochRecord r;
    r.phase = j.at("phase").get<std::string>();
    r.epoch = j.at("epoch").get<int>();
    r.step = j.at("step").get<long>();
    r.learning_rate = j.at("lr").get<double>();
    r.loss = j.at("loss").get<double>();
    r.parsing = j.at("parsing").get<std::vector<double>>();
    r.pose = j.at("pose").get<std::vector<double>>();
    r.l_joint = j.at("l_joint").get<double>();
    r.grad_norm = j.at("grad_norm").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed training log line: ") + e.what());
  }
}

std::vector<EpochRecord> read_train_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read training log " + path.string());
  std::vector<EpochRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(EpochRecord::from_json(line));
  }
  return out;
}

net::NetConfig parsing_only(net::NetConfig cfg) {
  cfg.with_pose = false;
  cfg.refine_stages = 0;
  return cfg;
}

namespace {

struct Phase {
  std::string name;
  net::NetConfig net;
  Mode loss_mode;
  int epochs;
};

std::vector<Phase> plan(const TrainConfig& cfg, Mode mode) {
  const net::NetConfig base = parsing_only(cfg.net);
  std::vector<Phase> phases;
  phases.push_back({"A", base, Mode::kJoint, cfg.phase_a_epochs});
  if (mode == Mode::kJoint) {
    phases.push_back({"B", cfg.net, Mode::kJoint, cfg.phase_b_epochs});
  } else {
    phases.push_back({"B", base, Mode::kStructure, cfg.phase_b_epochs});
  }
  return phases;
}

struct Position {
  std::size_t phase = 0;
  int epoch = 0;  // completed epochs in `phase`
  long step = 0;
};

constexpr const char* kVelocityPrefix = "velocity/";

void save_state(const fs::path& path, const net::JppNet<float>& model,
                const SgdMomentum<float>* sgd, const json& meta) {
  net::Checkpoint ckpt;
  ckpt.net = model.config();
  ckpt.meta = meta;
  net::store_weights(model, ckpt);
  if (sgd) {
    for (const auto& [name, v] : sgd->velocity()) ckpt.tensors.emplace(kVelocityPrefix + name, v);
  }
  net::write_checkpoint(path, ckpt);
}

void restore_velocity(const net::Checkpoint& ckpt, const net::JppNet<float>& model,
                      SgdMomentum<float>& sgd) {
  for (const auto& [name, p] : model.parameters().entries()) {
    auto it = ckpt.tensors.find(kVelocityPrefix + name);
    if (it == ckpt.tensors.end()) continue;
    if (!it->second.same_shape(p->value)) {
      throw DataError("momentum tensor for " + name + " has the wrong shape");
    }
    sgd.velocity().insert_or_assign(name, it->second);
  }
}

/// Keeps the log lines up to `step` so a resumed run appends after them.
void truncate_log(const fs::path& path, long step) {
  std::vector<std::string> kept;
  if (fs::exists(path)) {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (EpochRecord::from_json(line).step <= step) kept.push_back(line);
    }
  }
  std::ofstream out(path, std::ios::trunc);
  for (const auto& line : kept) out << line << '\n';
}

std::vector<synthgen::SampleRecord> load_samples(const TrainConfig& cfg, Mode mode) {
  if (cfg.dataset.empty()) throw ConfigError("config key 'dataset' is required for training");
  if (!fs::exists(cfg.dataset / "manifest.json")) {
    throw DataError("no dataset at " + cfg.dataset.string() + " (manifest.json missing)");
  }
  // Structure mode trains from parsing labels alone.
  const synthgen::DatasetReader reader(cfg.dataset, mode == Mode::kJoint);
  const auto& ids = reader.manifest().split(cfg.split);
  std::size_t n = ids.size();
  if (cfg.max_samples > 0) n = std::min(n, static_cast<std::size_t>(cfg.max_samples));
  if (n == 0) throw DataError("split '" + cfg.split + "' has no samples");
  std::vector<synthgen::SampleRecord> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) samples.push_back(reader.load(ids[i]));
  return samples;
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, const std::string& phase, int epoch,
                                     std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, hash_string("order/" + phase + "/" + std::to_string(epoch))));
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i - 1)));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

bool diverged(double v, double limit) { return !std::isfinite(v) || std::abs(v) > limit; }

}  // namespace

TrainResult train(const TrainConfig& cfg, Mode mode, const fs::path& out,
                  const TrainOptions& options) {
  cfg.validate();
  const std::vector<Phase> phases = plan(cfg, mode);
  const auto samples = load_samples(cfg, mode);
  fs::create_directories(out);
  const fs::path log_path = out / "train_log.jsonl";
  const fs::path latest_path = out / "latest.ckpt";
  const fs::path phase_a_path = out / "phase_a.ckpt";

  Position pos;
  std::optional<net::Checkpoint> resume_ckpt;
  if (options.resume) {
    if (!fs::exists(latest_path)) {
      throw ConfigError("nothing to resume: " + latest_path.string() + " does not exist");
    }
    resume_ckpt = net::read_checkpoint(latest_path);
    const json& meta = resume_ckpt->meta;
    if (meta.value("mode", "") != mode_name(mode)) {
      throw ConfigError("checkpoint in " + out.string() + " was written in mode '" +
                        meta.value("mode", "") + "'");
    }
    const std::string phase = meta.at("phase").get<std::string>();
    pos.phase = phase == "A" ? 0 : 1;
    pos.epoch = meta.at("epoch").get<int>();
    pos.step = meta.at("step").get<long>();
    if (!(resume_ckpt->net == phases[pos.phase].net)) {
      throw ConfigError("resumed checkpoint does not match the configured network");
    }
    truncate_log(log_path, pos.step);
  } else {
    std::ofstream(log_path, std::ios::trunc);
  }

  TrainResult result;
  result.steps = pos.step;
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  const long steps_per_epoch = static_cast<long>((samples.size() + batch - 1) / batch);
  int budget = options.epoch_budget;

  for (std::size_t p = pos.phase; p < phases.size(); ++p) {
    const Phase& phase = phases[p];
    net::JppNet<float> model(phase.net, cfg.seed);
    SgdMomentum<float> sgd(cfg.momentum, cfg.weight_decay, cfg.grad_clip);
    int first_epoch = 0;
    if (resume_ckpt && p == pos.phase) {
      net::load_weights(model, *resume_ckpt, true);
      restore_velocity(*resume_ckpt, model, sgd);
      first_epoch = pos.epoch;
      resume_ckpt.reset();
    } else if (p > 0) {
      net::load_weights(model, net::read_checkpoint(phase_a_path), false);
    }

    const int stages = phase.net.refine_stages + 1;
    const LossWeights weights = LossWeights::from(cfg, stages);
    const bool pose_targets = phase.net.with_pose && phase.loss_mode == Mode::kJoint;
    const int out_size = phase.net.output_size();
    const long phase_steps = steps_per_epoch * phase.epochs;

    for (int epoch = first_epoch; epoch < phase.epochs; ++epoch) {
      if (budget == 0) {
        result.checkpoint = latest_path;
        return result;
      }
      const auto order = epoch_order(cfg.seed, phase.name, epoch + 1, samples.size());
      EpochRecord rec;
      rec.phase = phase.name;
      rec.epoch = epoch + 1;
      rec.parsing.assign(static_cast<std::size_t>(stages), 0.0);
      if (pose_targets) rec.pose.assign(static_cast<std::size_t>(stages), 0.0);
      double grad_norm_sum = 0.0;

      for (long it = 0; it < steps_per_epoch; ++it) {
        const long phase_step = static_cast<long>(epoch) * steps_per_epoch + it;
        const double lr =
            poly_learning_rate(cfg.learning_rate, cfg.lr_power, phase_step, phase_steps);
        const std::size_t begin = static_cast<std::size_t>(it) * batch;
        const std::size_t end = std::min(samples.size(), begin + batch);
        const float inv = 1.0F / static_cast<float>(end - begin);
        for (std::size_t k = begin; k < end; ++k) {
          const synthgen::SampleRecord& sample = samples[order[k]];
          Rng rng(derive_seed(cfg.seed, hash_string(phase.name + "/" + std::to_string(epoch + 1) +
                                                    "/" + sample.id)));
          const synthgen::SampleRecord aug = augment(sample, rng, cfg.augment);
          LossTargets targets;
          targets.labels = weights.upsample_scores
                               ? aug.labels
                               : resize_label_map(aug.labels, out_size, out_size);
          if (pose_targets) {
            targets.pose = gt_pose_heatmaps(aug.joints, out_size, out_size,
                                            phase.net.output_stride, cfg.pose_sigma);
          }
          const auto outputs = model.forward(net::image_tensor<float>(aug.image));
          LossResult<float> loss = total_loss(outputs, targets, weights, phase.loss_mode);
          const LossBreakdown& b = loss.breakdown;
          if (diverged(b.total, cfg.divergence_limit)) {
            throw DivergenceError("training diverged: total loss " + std::to_string(b.total) +
                                  " at phase " + phase.name + " epoch " +
                                  std::to_string(epoch + 1) + " step " +
                                  std::to_string(pos.step + 1) + " sample " + sample.id);
          }
          rec.loss += b.total;
          for (std::size_t s = 0; s < b.parsing.size(); ++s) rec.parsing[s] += b.parsing[s];
          for (std::size_t s = 0; s < b.pose.size(); ++s) rec.pose[s] += b.pose[s];
          rec.l_joint += b.l_joint;
          nn::backward(nn::scale(loss.total, inv));
        }
        grad_norm_sum += sgd.step(model.parameters(), lr);
        rec.learning_rate = lr;
        ++pos.step;
      }

      const double n = static_cast<double>(samples.size());
      rec.loss /= n;
      for (double& v : rec.parsing) v /= n;
      for (double& v : rec.pose) v /= n;
      rec.l_joint /= n;
      rec.grad_norm = grad_norm_sum / static_cast<double>(steps_per_epoch);
      rec.step = pos.step;
      if (diverged(rec.grad_norm, cfg.divergence_limit)) {
        throw DivergenceError("training diverged: gradient norm " +
                              std::to_string(rec.grad_norm) + " at phase " + phase.name +
                              " epoch " + std::to_string(epoch + 1));
      }

      const json meta = {{"mode", mode_name(mode)}, {"phase", phase.name},
                         {"epoch", epoch + 1},      {"step", pos.step},
                         {"seed", cfg.seed}};
      save_state(latest_path, model, &sgd, meta);
      {
        std::ofstream log(log_path, std::ios::app);
        log << rec.to_json() << '\n';
      }
      result.log.push_back(rec);
      result.steps = pos.step;
      if (options.on_epoch) options.on_epoch(rec);
      if (budget > 0) --budget;
    }

    if (p == 0) {
      save_state(phase_a_path, model, nullptr,
                 {{"mode", mode_name(mode)}, {"phase", "A"}, {"epoch", phase.epochs},
                  {"step", pos.step}, {"seed", cfg.seed}});
    }
    if (p + 1 == phases.size()) {
      save_state(out / "model.ckpt", model, nullptr,
                 {{"mode", mode_name(mode)}, {"kind", "model"}, {"step", pos.step},
                  {"seed", cfg.seed}});
    }
  }

  result.checkpoint = out / "model.ckpt";
  result.finished = true;
  return result;
}

TrainResult train_jppnet(const TrainConfig& cfg, const fs::path& out,
                         const TrainOptions& options) {
  return train(cfg, Mode::kJoint, out, options);
}

TrainResult train_ssjppnet(const TrainConfig& cfg, const fs::path& out,
                           const TrainOptions& options) {
  return train(cfg, Mode::kStructure, out, options);
}

}  // namespace jpp::train
