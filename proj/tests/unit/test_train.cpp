// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "jppnet/core/errors.hpp"
#include "jppnet/core/geometry.hpp"
#include "jppnet/metrics/decode.hpp"
#include "jppnet/net/checkpoint.hpp"
#include "jppnet/synthgen/dataset.hpp"
#include "jppnet/train/augment.hpp"
#include "jppnet/train/losses.hpp"
#include "jppnet/train/optimizer.hpp"
#include "jppnet/train/trainer.hpp"
#include "test_util.hpp"

namespace jpp::train {
namespace {

using nn::Tensor;
using nn::Var;

synthgen::SampleRecord sample(int index, std::uint64_t seed = 5) {
  synthgen::GeneratorConfig g;
  g.seed = seed;
  return synthgen::generate_sample(g, synthgen::sample_id("train", index));
}

TEST(TrainConfig, DefaultsAndValidation) {
  const TrainConfig c = TrainConfig::from_config(io::KeyValueConfig::parse(""));
  EXPECT_DOUBLE_EQ(c.augment.scale_min, 0.75);
  EXPECT_DOUBLE_EQ(c.augment.scale_max, 1.25);
  EXPECT_DOUBLE_EQ(c.momentum, 0.9);
  EXPECT_EQ(c.parsing_weights(3), (std::vector<double>{1.0, 1.0, 1.0}));
  EXPECT_EQ(c.net, net::NetConfig::toy());

  auto bad = [](const std::string& text) {
    return [text] { TrainConfig::from_config(io::KeyValueConfig::parse(text)); };
  };
  EXPECT_THROW(bad("flip_prob = 1.5")(), ConfigError);
  EXPECT_THROW(bad("pose_stage_weights = 1, -1")(), ConfigError);
  EXPECT_THROW(bad("parsing_stage_weights = 1, 1, 1")(), ConfigError);  // toy has 2 stages
  EXPECT_THROW(bad("learning_rate = 0")(), ConfigError);
  EXPECT_THROW(bad("scale_min = 1.3")(), ConfigError);
  try {
    bad("epochs = 3")();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("epochs"), std::string::npos);
  }
  const TrainConfig d = TrainConfig::from_config(
      io::KeyValueConfig::parse("input_size = 64\nrefine_stages = 2\npose_stage_weights = 0, 2"));
  EXPECT_EQ(d.augment.crop_size, 64);
  EXPECT_EQ(d.pose_weights(3), (std::vector<double>{0.0, 2.0, 1.0}));
}

TEST(Augment, IdentityParametersKeepTheSample) {
  const auto s = sample(0);
  const auto out = apply_augment(s, {1.0, 0, 0, false}, 128);
  EXPECT_EQ(out.image, s.image);
  EXPECT_EQ(out.labels, s.labels);
  EXPECT_EQ(out.joints, s.joints);

  AugmentConfig off;
  off.enabled = false;
  Rng rng(1);
  EXPECT_EQ(augment(s, rng, off), s);
}

TEST(Augment, CropPadsWithBackgroundAndMarksJointsAbsent) {
  const auto s = sample(1);
  const auto out = apply_augment(s, {1.0, -10, 20, false}, 128);
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 10; ++x) {
      EXPECT_EQ(out.labels.at(y, x), 0);
      EXPECT_EQ(out.image.at(y, x), kPadColor);
    }
  }
  EXPECT_EQ(out.labels.at(0, 10), s.labels.at(20, 0));
  for (int j = 0; j < kNumJoints; ++j) {
    const JointRecord& r = s.joints[j];
    const bool keep = r.present() && r.y >= 20.0;
    EXPECT_EQ(out.joints[j].present(), keep) << j;
    if (keep) {
      EXPECT_DOUBLE_EQ(out.joints[j].x, r.x + 10.0);
      EXPECT_DOUBLE_EQ(out.joints[j].y, r.y - 20.0);
    }
  }
}

TEST(Augment, FlipRoutesThroughCoreFlips) {
  const auto s = sample(2);
  for (const AugmentParams p : {AugmentParams{0.8, -5, 3, false}, AugmentParams{1.2, 17, 9, false}}) {
    AugmentParams flipped = p;
    flipped.flip = true;
    const auto a = apply_augment(s, p, 128);
    const auto b = apply_augment(s, flipped, 128);
    EXPECT_EQ(b.labels, flip_label_map(a.labels));
    EXPECT_EQ(b.image, flip_image(a.image));
    EXPECT_EQ(b.joints, flip_joint_set(a.joints, 128));
  }
}

// Visible wrists and ankles must sit on pixels of their own side's limb
// (or the side-neutral accessories drawn over it).
TEST(Augment, JointsStayOnTheirOwnLimbs) {
  using P = Part;
  const std::map<Joint, std::set<int>> allowed = {
      {Joint::kRWrist, {index_of(P::kRightArm), index_of(P::kGloves)}},
      {Joint::kLWrist, {index_of(P::kLeftArm), index_of(P::kGloves)}},
      {Joint::kRAnkle, {index_of(P::kRightLeg), index_of(P::kRightShoe), index_of(P::kSocks)}},
      {Joint::kLAnkle, {index_of(P::kLeftLeg), index_of(P::kLeftShoe), index_of(P::kSocks)}}};
  AugmentConfig cfg;
  int checked = 0, matched = 0;
  for (int i = 0; i < 500; ++i) {
    const auto s = sample(i % 50);
    Rng rng(derive_seed(9, static_cast<std::uint64_t>(i)));
    const auto a = augment(s, rng, cfg);
    for (const auto& [joint, classes] : allowed) {
      const JointRecord& r = a.joints[joint];
      if (r.visibility != Visibility::kVisible) continue;
      ++checked;
      const int cx = static_cast<int>(std::lround(r.x));
      const int cy = static_cast<int>(std::lround(r.y));
      bool hit = false;
      for (int y = cy - 2; y <= cy + 2; ++y) {
        for (int x = cx - 2; x <= cx + 2; ++x) {
          if (y >= 0 && x >= 0 && y < 128 && x < 128 && classes.count(a.labels.at(y, x))) hit = true;
        }
      }
      matched += hit ? 1 : 0;
    }
  }
  ASSERT_GT(checked, 1000);
  EXPECT_GE(static_cast<double>(matched) / checked, 0.97) << matched << "/" << checked;
}

TEST(GtPoseHeatmaps, AbsentJointsGiveZeroChannels) {
  const HeatmapStack h = gt_pose_heatmaps(JointSet(), 16, 16, 8, 1.0);
  EXPECT_EQ(h.channels(), 16);
  for (float v : h.values()) EXPECT_EQ(v, 0.0F);
}

TEST(GtPoseHeatmaps, PeakAtJointOverStride) {
  JointSet j;
  j.set(Joint::kHeadTop, JointRecord::at(80, 40));
  const HeatmapStack h = gt_pose_heatmaps(j, 16, 16, 8, 1.0);
  EXPECT_FLOAT_EQ(h.at(index_of(Joint::kHeadTop), 5, 10), 1.0F);
  const JointSet d = metrics::decode_pose(h, 8.0);
  EXPECT_DOUBLE_EQ(d[Joint::kHeadTop].x, 80.0);
  EXPECT_DOUBLE_EQ(d[Joint::kHeadTop].y, 40.0);
  EXPECT_FALSE(d[Joint::kRAnkle].present());
}

TEST(GtPoseHeatmaps, DecodeRoundTripWithinOneStride) {
  for (int i = 0; i < 30; ++i) {
    const auto s = sample(i);
    const HeatmapStack h = gt_pose_heatmaps(s.joints, 16, 16, 8, 1.5);
    const JointSet d = metrics::decode_pose(h, 8.0);
    for (int j = 0; j < kNumJoints; ++j) {
      const JointRecord& g = s.joints[j];
      ASSERT_EQ(d[j].present(), g.present()) << s.id << " " << j;
      if (!g.present()) continue;
      EXPECT_LE(std::abs(d[j].x - g.x), 8.0);
      EXPECT_LE(std::abs(d[j].y - g.y), 8.0);
    }
  }
}

Var<double> logits_for(const LabelMap& m, double margin) {
  Tensor<double> t({kNumPartClasses, m.height(), m.width()});
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) t.at(m.at(y, x), y, x) = margin;
  }
  return nn::leaf(t);
}

LabelMap random_labels(Rng& rng, int h, int w) {
  LabelMap m(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(y, x, static_cast<std::uint8_t>(rng.uniform_int(0, 19)));
  }
  return m;
}

TEST(ParsingLoss, LimitsAndSymmetry) {
  Rng rng(3);
  const LabelMap gt = random_labels(rng, 5, 7);
  EXPECT_LT(parsing_loss(logits_for(gt, 40.0), gt)->value[0], 1e-15);
  EXPECT_NEAR(parsing_loss(nn::constant(Tensor<double>({20, 5, 7}, 0.3)), gt)->value[0],
              std::log(20.0), 1e-12);

  // Transposing pixels in both scores and labels leaves the mean unchanged.
  Tensor<double> scores({20, 5, 7});
  for (double& v : scores.values()) v = rng.uniform(-3, 3);
  Tensor<double> t_scores({20, 7, 5});
  LabelMap t_gt(7, 5);
  for (int c = 0; c < 20; ++c) {
    for (int y = 0; y < 5; ++y) {
      for (int x = 0; x < 7; ++x) t_scores.at(c, x, y) = scores.at(c, y, x);
    }
  }
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 7; ++x) t_gt.set(x, y, gt.at(y, x));
  }
  EXPECT_NEAR(parsing_loss(nn::constant(scores), gt)->value[0],
              parsing_loss(nn::constant(t_scores), t_gt)->value[0], 1e-12);
  EXPECT_THROW(parsing_loss(nn::constant(t_scores), gt), ShapeError);
}

TEST(PoseLoss, MatchesFlatEnumeration) {
  Rng rng(4);
  HeatmapStack gt(16, 3, 4);
  for (float& v : gt.values()) v = static_cast<float>(rng.uniform());
  Tensor<double> same({16, 3, 4});
  for (std::size_t i = 0; i < same.size(); ++i) same[i] = gt.values()[i];
  EXPECT_EQ(pose_loss(nn::constant(same), gt)->value[0], 0.0);

  Tensor<double> shifted = same;
  for (double& v : shifted.values()) v += 0.5;
  EXPECT_NEAR(pose_loss(nn::constant(shifted), gt)->value[0], 0.25, 1e-15);

  Tensor<double> pred({16, 3, 4});
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pred[i] = rng.uniform(-1, 1);
    const double d = pred[i] - static_cast<double>(gt.values()[i]);
    sum += d * d;
  }
  EXPECT_NEAR(pose_loss(nn::constant(pred), gt)->value[0], sum / 192.0, 1e-15);
  EXPECT_THROW(pose_loss(nn::constant(Tensor<double>({16, 4, 3})), gt), ShapeError);
}

std::vector<net::StageOutputs<double>> random_stages(Rng& rng, int n, bool pose) {
  std::vector<net::StageOutputs<double>> stages(static_cast<std::size_t>(n));
  for (auto& s : stages) {
    Tensor<double> p({20, 4, 4});
    for (double& v : p.values()) v = rng.uniform(-2, 2);
    s.parsing = nn::leaf(p);
    if (pose) {
      Tensor<double> q({16, 4, 4});
      for (double& v : q.values()) v = rng.uniform(0, 1);
      s.pose = nn::leaf(q);
    }
  }
  return stages;
}

LossTargets random_targets(Rng& rng) {
  LossTargets t;
  t.labels = random_labels(rng, 4, 4);
  HeatmapStack h(16, 4, 4);
  for (float& v : h.values()) v = static_cast<float>(rng.uniform());
  t.pose = h;
  return t;
}

TEST(TotalLoss, JointModeIsTheWeightedSum) {
  Rng rng(5);
  const auto targets = random_targets(rng);
  const auto one = random_stages(rng, 1, true);
  const auto r1 = total_loss(one, targets, {{1.0}, {1.0}}, Mode::kJoint);
  EXPECT_NEAR(r1.breakdown.total,
              parsing_loss(one[0].parsing, targets.labels)->value[0] +
                  pose_loss(one[0].pose, *targets.pose)->value[0],
              1e-12);

  const auto three = random_stages(rng, 3, true);
  const LossWeights w{{0.5, 1.5, 2.0}, {3.0, 0.25, 1.0}};
  const auto r = total_loss(three, targets, w, Mode::kJoint);
  double expect = 0.0;
  for (int s = 0; s < 3; ++s) {
    expect += w.parsing[s] * r.breakdown.parsing[s] + w.pose[s] * r.breakdown.pose[s];
  }
  EXPECT_NEAR(r.breakdown.total, expect, 1e-12);
  EXPECT_EQ(r.total->value[0], r.breakdown.total);

  // Zeroing stage 0 removes exactly its contribution.
  LossWeights z = w;
  z.parsing[0] = 0.0;
  z.pose[0] = 0.0;
  const auto rz = total_loss(three, targets, z, Mode::kJoint);
  EXPECT_NEAR(rz.breakdown.total,
              r.breakdown.total - 0.5 * r.breakdown.parsing[0] - 3.0 * r.breakdown.pose[0], 1e-12);

  // Doubling one weight adds that component once more.
  LossWeights d = w;
  d.pose[1] *= 2.0;
  EXPECT_NEAR(total_loss(three, targets, d, Mode::kJoint).breakdown.total,
              r.breakdown.total + 0.25 * r.breakdown.pose[1], 1e-12);
}

TEST(TotalLoss, StructureModeAnnihilatesOnPerfectParsing) {
  const auto s = sample(3);
  const LabelMap gt = resize_label_map(s.labels, 32, 32);
  std::vector<net::StageOutputs<double>> stages(1);
  stages[0].parsing = logits_for(gt, 5.0);
  LossTargets t;
  t.labels = gt;
  const auto r = total_loss(stages, t, {{1.0}, {1.0}}, Mode::kStructure);
  EXPECT_GT(r.breakdown.parsing[0], 0.0);
  EXPECT_EQ(r.breakdown.l_joint, 0.0);
  EXPECT_EQ(r.breakdown.total, 0.0);

  // A wrong prediction gives l_joint > 0 and total = l_joint * weighted CE.
  LabelMap shifted(32, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) shifted.set(y, x, gt.at(y, std::max(0, x - 4)));
  }
  stages[0].parsing = logits_for(shifted, 5.0);
  const auto w = total_loss(stages, t, {{2.0}, {}}, Mode::kStructure);
  EXPECT_GT(w.breakdown.l_joint, 0.0);
  EXPECT_NEAR(w.breakdown.total, w.breakdown.l_joint * 2.0 * w.breakdown.parsing[0], 1e-12);
}

TEST(TotalLoss, UpsampledScoresCompareAtLabelResolution) {
  Rng rng(6);
  auto stages = random_stages(rng, 1, false);
  LossTargets t;
  t.labels = random_labels(rng, 32, 32);
  LossWeights w{{1.0}, {}};
  EXPECT_THROW(total_loss(stages, t, w, Mode::kJoint), ShapeError);
  w.upsample_scores = true;
  const auto r = total_loss(stages, t, w, Mode::kJoint);
  const auto up = nn::resize_bilinear(stages[0].parsing, 32, 32, Alignment::kHalfPixel);
  EXPECT_NEAR(r.breakdown.total, parsing_loss(up, t.labels)->value[0], 1e-12);
}

TEST(Optimizer, PolyDecayAndMomentumUpdate) {
  EXPECT_DOUBLE_EQ(poly_learning_rate(0.1, 0.9, 0, 100), 0.1);
  EXPECT_NEAR(poly_learning_rate(0.1, 0.9, 50, 100), 0.1 * std::pow(0.5, 0.9), 1e-15);
  EXPECT_DOUBLE_EQ(poly_learning_rate(0.1, 0.9, 100, 100), 0.0);

  net::ParameterStore<double> params;
  auto w = params.add("w", Tensor<double>({2}, 1.0));
  SgdMomentum<double> sgd(0.9, 0.0);
  double v = 0.0, x = 1.0;
  for (int step = 0; step < 4; ++step) {
    w->grad_buffer()[0] = 2.0 * w->value[0];  // d/dx x^2
    const double g = 2.0 * x;
    v = 0.9 * v - 0.1 * g;
    x += v;
    sgd.step(params, 0.1);
    EXPECT_NEAR(w->value[0], x, 1e-15);
    EXPECT_DOUBLE_EQ(w->value[1], 1.0);  // no gradient, no decay
  }
  EXPECT_EQ(w->grad.size(), 0U);
}

// Small datasets and networks for end-to-end training checks.
struct TinyRun {
  testing::TempDir dir{"train"};
  TrainConfig cfg;

  explicit TinyRun(int samples = 3) {
    synthgen::GeneratorConfig g;
    g.train = samples;
    g.val = 0;
    g.seed = 11;
    g.canvas = {64, 64};
    synthgen::generate_dataset(g, dir / "data");
    cfg = TrainConfig::from_config(io::KeyValueConfig::parse(
        "input_size = 64\nphase_a_epochs = 2\nphase_b_epochs = 2\nlearning_rate = 0.005\n"));
    cfg.dataset = dir / "data";
    cfg.seed = 4;
  }
};

TEST(Trainer, DeterministicAndPhaseACheckpointHasNoRefinement) {
  TinyRun run;
  const auto a = train_jppnet(run.cfg, run.dir / "a");
  const auto b = train_jppnet(run.cfg, run.dir / "b");
  ASSERT_TRUE(a.finished);
  EXPECT_EQ(a.steps, 12);
  EXPECT_EQ(testing::read_file(run.dir / "a/train_log.jsonl"),
            testing::read_file(run.dir / "b/train_log.jsonl"));
  EXPECT_EQ(testing::read_file(run.dir / "a/model.ckpt"), testing::read_file(run.dir / "b/model.ckpt"));

  const auto log = read_train_log(run.dir / "a/train_log.jsonl");
  ASSERT_EQ(log.size(), 4U);
  EXPECT_EQ(log[0].phase, "A");
  EXPECT_TRUE(log[0].pose.empty());
  EXPECT_EQ(log[3].phase, "B");
  EXPECT_EQ(log[3].pose.size(), 2U);
  EXPECT_EQ(log[3].step, 12);

  const net::Checkpoint pa = net::read_checkpoint(run.dir / "a/phase_a.ckpt");
  for (const auto& [name, t] : pa.tensors) {
    EXPECT_EQ(name.find("refine"), std::string::npos) << name;
    EXPECT_EQ(name.find("joint."), std::string::npos) << name;
  }
  EXPECT_TRUE(pa.tensors.count("part.conv-2.weight"));
  const net::Checkpoint model = net::read_checkpoint(run.dir / "a/model.ckpt");
  EXPECT_TRUE(model.tensors.count("pose_refine1.conv-6.weight"));
  // Phase B starts from phase A, so the shared backbone moved on from it.
  const auto before = pa.tensors.at("res1.conv.weight").values();
  const auto after = model.tensors.at("res1.conv.weight").values();
  EXPECT_FALSE(std::equal(before.begin(), before.end(), after.begin(), after.end()));
}

TEST(Trainer, ResumeContinuesTheRunExactly) {
  TinyRun run;
  train_jppnet(run.cfg, run.dir / "full");
  for (int budget : {1, 2}) {
    const auto dir = run.dir / ("resumed" + std::to_string(budget));
    TrainOptions first;
    first.epoch_budget = budget;
    const auto partial = train_jppnet(run.cfg, dir, first);
    EXPECT_FALSE(partial.finished);
    // A stale line past the checkpoint is dropped on resume.
    std::ofstream(dir / "train_log.jsonl", std::ios::app)
        << EpochRecord{"B", 9, 999, 0, 0, {}, {}, 0, 0}.to_json() << '\n';
    TrainOptions resume;
    resume.resume = true;
    const auto rest = train_jppnet(run.cfg, dir, resume);
    EXPECT_TRUE(rest.finished);
    EXPECT_EQ(testing::read_file(dir / "train_log.jsonl"),
              testing::read_file(run.dir / "full/train_log.jsonl"));
    EXPECT_EQ(testing::read_file(dir / "model.ckpt"), testing::read_file(run.dir / "full/model.ckpt"));
    long last = 0;
    for (const auto& r : read_train_log(dir / "train_log.jsonl")) {
      EXPECT_GT(r.step, last);
      last = r.step;
    }
  }
  TrainOptions resume;
  resume.resume = true;
  EXPECT_THROW(train_jppnet(run.cfg, run.dir / "nothing", resume), ConfigError);
  EXPECT_THROW(train_ssjppnet(run.cfg, run.dir / "full", resume), ConfigError);
}

TEST(Trainer, StructureModeNeverReadsJointAnnotations) {
  TinyRun run;
  const std::size_t before = synthgen::DatasetReader::pose_file_reads();
  const auto r = train_ssjppnet(run.cfg, run.dir / "ss");
  EXPECT_EQ(synthgen::DatasetReader::pose_file_reads(), before);
  ASSERT_TRUE(r.finished);
  const net::Checkpoint ckpt = net::read_checkpoint(r.checkpoint);
  EXPECT_FALSE(ckpt.net.with_pose);
  EXPECT_EQ(ckpt.net.refine_stages, 0);
  const auto log = read_train_log(run.dir / "ss/train_log.jsonl");
  ASSERT_EQ(log.size(), 4U);
  EXPECT_EQ(log[0].l_joint, 0.0);
  EXPECT_GT(log[2].l_joint, 0.0);
  // The joint-mode loader does read them.
  train_jppnet(run.cfg, run.dir / "joint");
  EXPECT_GT(synthgen::DatasetReader::pose_file_reads(), before);
}

TEST(Trainer, DivergenceAndMissingData) {
  TinyRun run(1);
  TrainConfig c = run.cfg;
  c.divergence_limit = 1e-3;
  try {
    train_jppnet(c, run.dir / "div");
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("train_000000"), std::string::npos) << e.what();
  }
  c = run.cfg;
  c.dataset = run.dir / "missing";
  EXPECT_THROW(train_jppnet(c, run.dir / "x"), DataError);
}

}  // namespace
}  // namespace jpp::train
