// SPDX-License-Identifier: Apache-2.0
// Acceptance runner: one PASS/FAIL line per criterion.
//   jppnet_acceptance [--only 1,5,...] [--work DIR] [--tool PATH]
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "jppnet/cli/commands.hpp"
#include "jppnet/core/random.hpp"
#include "jppnet/metrics/decode.hpp"
#include "jppnet/metrics/parsing.hpp"
#include "jppnet/metrics/pose.hpp"
#include "jppnet/metrics/report.hpp"
#include "jppnet/net/jppnet.hpp"
#include "jppnet/nn/ops.hpp"
#include "jppnet/selfsup/structure.hpp"
#include "jppnet/synthgen/dataset.hpp"
#include "jppnet/train/losses.hpp"
#include "jppnet/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace jpp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

struct Context {
  fs::path work;
  std::string tool;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

LabelMap random_labels(Rng& rng, int h, int w) {
  LabelMap m(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(y, x, static_cast<std::uint8_t>(rng.uniform_int(0, 19)));
  }
  return m;
}

JointSet random_full_pose(Rng& rng, double head_len) {
  JointSet j;
  for (int i = 0; i < kNumJoints; ++i) {
    j.set(i, JointRecord::at(rng.uniform(10, 90), rng.uniform(10, 90)));
  }
  const double nx = rng.uniform(30, 70), ny = rng.uniform(30, 70), a = rng.uniform(0, 6.283);
  j.set(Joint::kUpperNeck, JointRecord::at(nx, ny));
  j.set(Joint::kHeadTop, JointRecord::at(nx + head_len * std::cos(a), ny + head_len * std::sin(a)));
  return j;
}

cli::CommandResult must(const cli::CommandResult& r, const std::string& what) {
  if (r.exit_code != cli::kExitOk) throw std::runtime_error(what + " failed: " + r.summary);
  return r;
}

metrics::MethodReport only_row(const fs::path& dir) {
  const auto rows = metrics::parse_report_json(read_file(dir / "report.json"), dir.string());
  if (rows.size() != 1) throw std::runtime_error("expected one report row in " + dir.string());
  return rows.front();
}

// 1. Confusion, IoU and accuracies against a per-pixel brute force.
Outcome metrics_oracle() {
  Rng rng(2024);
  double worst = 0.0;
  bool counts_ok = true;
  for (int trial = 0; trial < 200; ++trial) {
    const LabelMap p = random_labels(rng, 16, 16), g = random_labels(rng, 16, 16);
    const metrics::ConfusionMatrix c = metrics::accumulate_confusion(p, g);
    std::array<std::array<std::uint64_t, 20>, 20> brute{};
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) ++brute[g.at(y, x)][p.at(y, x)];
    }
    for (int a = 0; a < 20; ++a) {
      for (int b = 0; b < 20; ++b) counts_ok = counts_ok && c.at(a, b) == brute[a][b];
    }
    double hits = 0, acc = 0, iou = 0;
    int n_acc = 0, n_iou = 0;
    for (int k = 0; k < 20; ++k) {
      double tp = 0, gt = 0, pr = 0;
      for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
          tp += g.at(y, x) == k && p.at(y, x) == k;
          gt += g.at(y, x) == k;
          pr += p.at(y, x) == k;
        }
      }
      hits += tp;
      if (gt > 0) acc += tp / gt, ++n_acc;
      if (gt + pr - tp > 0) iou += tp / (gt + pr - tp), ++n_iou;
    }
    const metrics::ParsingScores s = metrics::parsing_scores(c);
    worst = std::max({worst, std::abs(s.overall_accuracy - hits / 256.0),
                      std::abs(s.mean_accuracy - acc / n_acc), std::abs(s.mean_iou - iou / n_iou)});
  }
  return {counts_ok && worst <= 1e-12,
          "200 pairs, counts " + std::string(counts_ok ? "exact" : "MISMATCH") +
              ", max fraction error " + fmt(worst)};
}

// 2. PCKh properties.
Outcome pckh_properties() {
  Rng rng(7);
  bool perfect = true, displaced = true, invariant = true;
  std::vector<metrics::PckhVector> all_perfect, all_far;
  for (int i = 0; i < 200; ++i) {
    const double head = rng.uniform(4, 20);
    const JointSet gt = random_full_pose(rng, head);
    all_perfect.push_back(metrics::pckh(gt, gt));
    JointSet far;
    for (int j = 0; j < kNumJoints; ++j) {
      const double a = rng.uniform(0, 6.283);
      far.set(j, JointRecord::at(gt[j].x + 0.51 * head * std::cos(a),
                                 gt[j].y + 0.51 * head * std::sin(a)));
    }
    all_far.push_back(metrics::pckh(far, gt));

    JointSet noisy;
    for (int j = 0; j < kNumJoints; ++j) {
      noisy.set(j, JointRecord::at(gt[j].x + rng.uniform(-head, head),
                                   gt[j].y + rng.uniform(-head, head)));
    }
    const double s = rng.uniform(0.5, 3.0), tx = rng.uniform(-50, 50), ty = rng.uniform(-50, 50);
    auto move = [&](const JointSet& in) {
      JointSet out;
      for (int j = 0; j < kNumJoints; ++j) out.set(j, JointRecord::at(in[j].x * s + tx, in[j].y * s + ty));
      return out;
    };
    invariant = invariant && metrics::pckh(move(noisy), move(gt)) == metrics::pckh(noisy, gt);
  }
  const metrics::PckhScores sp = metrics::aggregate_pckh(all_perfect);
  for (const auto& g : sp.groups) perfect = perfect && g && *g == 1.0;
  perfect = perfect && sp.total == 1.0;
  const metrics::PckhScores sf = metrics::aggregate_pckh(all_far);
  for (const auto& g : sf.groups) displaced = displaced && g && *g == 0.0;
  displaced = displaced && sf.total == 0.0;

  // Head segment 10; a 3-4-5 offset puts the wrist exactly at 0.5 x 10.
  JointSet gt;
  gt.set(Joint::kHeadTop, JointRecord::at(20, 10));
  gt.set(Joint::kUpperNeck, JointRecord::at(20, 20));
  gt.set(Joint::kRWrist, JointRecord::at(40, 40));
  JointSet pred = gt;
  pred.set(Joint::kRWrist, JointRecord::at(43, 44));
  const bool boundary =
      metrics::pckh(pred, gt)[index_of(Joint::kRWrist)] == metrics::JointOutcome::kCorrect;

  const bool ok = perfect && displaced && invariant && boundary;
  return {ok, std::string("perfect ") + (perfect ? "1.0" : "FAIL") + ", 0.51x displaced " +
                  (displaced ? "0.0" : "FAIL") + ", translate/scale " +
                  (invariant ? "exact" : "FAIL") + ", 0.50 boundary " +
                  (boundary ? "correct" : "FAIL")};
}

// 3. Joint structure loss and structure-sensitive loss.
Outcome structure_losses() {
  Rng rng(3);
  const LabelMap m = random_labels(rng, 24, 24);
  const HeatmapStack s = selfsup::pseudo_joints_from_parsing(m, 24, 24);
  const double l_same = selfsup::joint_structure_loss(s, s).l_joint;
  const double l_struct_same = selfsup::structure_sensitive_loss(l_same, 2.7);

  HeatmapStack gt(kNumPseudoJoints, 6, 6), zero(kNumPseudoJoints, 6, 6);
  gt.at(4, 2, 3) = 1.0F;
  const double single = selfsup::joint_structure_loss(zero, gt).l_joint;

  bool exact = true;
  for (int i = 0; i < 1000; ++i) {
    const LabelMap p = random_labels(rng, 12, 12), g = random_labels(rng, 12, 12);
    const double l_parsing = rng.uniform(0.0, 4.0);
    const auto r = selfsup::structure_report(p, g, l_parsing);
    exact = exact && r.l_structure == r.l_joint * l_parsing;
  }
  const bool ok = l_same == 0.0 && l_struct_same == 0.0 && single == 0.5 && exact;
  return {ok, "identical -> " + fmt(l_same) + "/" + fmt(l_struct_same) + ", single pixel -> " +
                  fmt(single) + ", 1000 products " + (exact ? "exact" : "INEXACT")};
}

// 4. Full-preset layer shapes on a 384 x 384 input.
Outcome full_preset_shapes() {
  net::NetConfig c = net::NetConfig::full();
  c.refine_stages = 2;
  const net::JppNet<float> model(c, 1);
  std::vector<net::LayerTrace> trace;
  model.set_trace(&trace);
  nn::NoGradGuard guard;
  const auto out = model.forward(nn::Tensor<float>({3, 384, 384}));

  std::vector<std::pair<std::string, int>> rows = {
      {"res3", 512}, {"res4", 1024}, {"res5", 2048}, {"part.conv-1", 512}, {"part.conv-2", 256},
      {"part.aspp", 20}};
  const int joint[] = {512, 512, 256, 256, 256, 256, 512, 16};
  for (int i = 0; i < 8; ++i) rows.emplace_back("joint.conv-" + std::to_string(i + 1), joint[i]);
  for (int s = 1; s <= 2; ++s) {
    for (const std::string kind : {"pose_refine", "parsing_refine"}) {
      const std::string p = kind + std::to_string(s);
      rows.emplace_back(p + ".remap-1", 128);
      rows.emplace_back(p + ".remap-2", 128);
      rows.emplace_back(p + ".concat", 512);
      const int conv[] = {512, 256, 256, 256, 256};
      for (int i = 0; i < 5; ++i) rows.emplace_back(p + ".conv-" + std::to_string(i + 1), conv[i]);
      rows.emplace_back(kind == "pose_refine" ? p + ".conv-6" : p + ".aspp",
                        kind == "pose_refine" ? 16 : 20);
    }
  }
  int matched = 0;
  std::string bad;
  for (const auto& [name, channels] : rows) {
    auto it = std::find_if(trace.begin(), trace.end(),
                           [&](const net::LayerTrace& t) { return t.name == name; });
    if (it != trace.end() && it->shape == std::vector<int>{channels, 48, 48}) {
      ++matched;
    } else if (bad.empty()) {
      bad = " first mismatch " + name;
    }
  }
  bool kernels = true;
  const int ladder[] = {3, 5, 7, 9, 1};
  for (int i = 0; i < 5; ++i) {
    for (const std::string p : {"pose_refine1", "parsing_refine2"}) {
      const auto& w = model.parameters().get(p + ".conv-" + std::to_string(i + 1) + ".weight")->value;
      kernels = kernels && w.dim(2) == ladder[i] && w.dim(3) == ladder[i];
    }
  }
  bool stages = out.size() == 3;
  for (const auto& s : out) {
    stages = stages && s.parsing->value.shape() == std::vector<int>{20, 48, 48} &&
             s.pose->value.shape() == std::vector<int>{16, 48, 48};
  }
  const bool ok = matched == static_cast<int>(rows.size()) && kernels && stages;
  return {ok, std::to_string(matched) + "/" + std::to_string(rows.size()) +
                  " rows match, kernel ladder " + (kernels ? "3,5,7,9,1" : "WRONG") +
                  ", 3 stages of 20/16 x 48x48 " + (stages ? "ok" : "WRONG") + bad};
}

// 5. Analytic vs central-difference gradients of the total loss.
net::NetConfig tiny_net(bool with_pose) {
  net::NetConfig c;
  c.input_size = 16;
  c.stem_channels = 4;
  c.stage_channels = {8, 8, 8, 8};
  c.stage_blocks = {1, 1, 1, 1};
  c.aspp_rates = {1, 2};
  c.part_channels = {8, 4};
  c.joint_channels = {8, 8, 4, 4, 4, 4, 8, 16};
  c.remap_channels = 2;
  c.refine_concat = 8;
  c.refine_channels = {8, 4, 4, 4, 4};
  c.refine_stages = with_pose ? 1 : 0;
  c.with_pose = with_pose;
  c.residual_init_scale = 1.0;
  c.validate();
  return c;
}

std::pair<double, int> gradient_check(train::Mode mode, std::uint64_t seed) {
  const bool joint = mode == train::Mode::kJoint;
  net::JppNet<double> model(tiny_net(joint), seed);
  Rng rng(seed);
  // Zero biases put dead channels exactly on the ReLU kink; move off it.
  for (auto& [name, v] : model.parameters().entries()) {
    if (name.ends_with(".bias")) {
      for (double& b : v->value.values()) b = rng.uniform(-0.1, 0.1);
    }
  }
  nn::Tensor<double> image({3, 16, 16});
  for (double& v : image.values()) v = rng.uniform(-1, 1);
  train::LossTargets targets;
  targets.labels = LabelMap(16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      // Blocky labels so that several pseudo-joint regions are present.
      const int cls[] = {13, 5, 9, 14, 15, 16, 17, 0};
      targets.labels.set(y, x, static_cast<std::uint8_t>(cls[(y / 4) * 2 % 8 + (x / 8)]));
    }
  }
  if (joint) {
    JointSet j;
    for (int k = 0; k < kNumJoints; ++k) j.set(k, JointRecord::at(rng.uniform(0, 15), rng.uniform(0, 15)));
    targets.pose = train::gt_pose_heatmaps(j, 2, 2, 8, 1.0);
  }
  train::LossWeights weights;
  weights.parsing = std::vector<double>(joint ? 2 : 1, 1.0);
  weights.pose = std::vector<double>(joint ? 2 : 0, 1.0);
  weights.upsample_scores = true;

  auto loss_value = [&]() {
    nn::NoGradGuard guard;
    return train::total_loss(model.forward(image), targets, weights, mode).breakdown.total;
  };
  model.parameters().zero_grad();
  {
    auto result = train::total_loss(model.forward(image), targets, weights, mode);
    nn::backward(result.total);
  }

  std::vector<std::tuple<std::string, nn::Var<double>, std::size_t>> picks;
  const auto& entries = model.parameters().entries();
  while (picks.size() < 240) {
    const auto& [name, v] = entries[rng.uniform_int(0, static_cast<int>(entries.size()) - 1)];
    picks.emplace_back(name, v, static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(v->value.size()) - 1)));
  }
  double worst = 0.0;
  int checked = 0;
  const double h = 1e-6;
  for (auto& [name, v, i] : picks) {
    const double analytic = v->grad.empty() ? 0.0 : v->grad.values()[i];
    const double w0 = v->value.values()[i];
    v->value.values()[i] = w0 + h;
    const double up = loss_value();
    v->value.values()[i] = w0 - h;
    const double down = loss_value();
    v->value.values()[i] = w0;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    // Gradients below 1e-7 are compared absolutely; float noise dominates there.
    const double err = scale > 1e-7 ? std::abs(analytic - numeric) / scale
                                    : std::abs(analytic - numeric) / 1e-7 * 1e-4;
    worst = std::max(worst, err);
    ++checked;
  }
  return {worst, checked};
}

Outcome gradient_checks() {
  const auto [joint_err, joint_n] = gradient_check(train::Mode::kJoint, 5);
  const auto [ss_err, ss_n] = gradient_check(train::Mode::kStructure, 6);
  const bool ok = joint_err < 1e-3 && ss_err < 1e-3 && joint_n >= 200 && ss_n >= 200;
  return {ok, "joint: " + std::to_string(joint_n) + " weights, max rel err " + fmt(joint_err) +
                  "; ss: " + std::to_string(ss_n) + " weights, max rel err " + fmt(ss_err)};
}

// 6. Overfit ten samples.
Outcome overfit(const Context& ctx) {
  const fs::path dir = ctx.work / "overfit";
  fs::remove_all(dir);
  write_file(dir / "data.cfg", "train = 10\nval = 0\nseed = 3\n");
  must(cli::cmd_gen_data(dir / "data.cfg", dir / "data"), "gen-data");
  write_file(dir / "train.cfg",
             "dataset = " + (dir / "data").string() +
                 "\naugment = false\nphase_a_epochs = 60\nphase_b_epochs = 140\n"
                 "learning_rate = 0.01\ngrad_clip = 5\npose_sigma = 1.5\n"
                 "pose_stage_weights = 50, 50\nparsing_loss_resolution = input\n"
                 "scales = 1.0\nflip = false\n");
  const auto train_cfg = cli::experiment_train_config(io::KeyValueConfig::load(dir / "train.cfg"));
  must(cli::cmd_train(dir / "train.cfg", train::Mode::kJoint, dir / "run"), "train");
  const auto log = train::read_train_log(dir / "run" / "train_log.jsonl");
  const long steps = log.empty() ? 0 : log.back().step;

  cli::EvalRequest req;
  req.dataset = dir / "data";
  req.source = dir / "run" / "model.ckpt";
  req.split = "train";
  req.infer = cli::experiment_infer_config(io::KeyValueConfig::load(dir / "train.cfg"));
  req.out = dir / "eval";
  must(cli::cmd_eval(req), "eval");
  const auto row = only_row(req.out);
  const double miou = row.summary.parsing->mean_iou;
  const double pckh = row.summary.pose ? row.summary.pose->total : 0.0;
  const bool ok = steps <= 2000 && miou >= 0.85 && pckh >= 0.9 && train_cfg.net.preset == "toy";
  return {ok, std::to_string(steps) + " iterations, train mIoU " + fmt(miou) + ", PCKh@0.5 " +
                  fmt(pckh)};
}

// 7. Equal cross-entropy, displaced limb centroid -> larger structure loss.
Outcome structure_separation() {
  synthgen::GeneratorConfig g;
  g.style.occlusion_prob = 0.0;
  g.anchor.truncate_top_prob = 0.0;
  g.anchor.truncate_bottom_prob = 0.0;
  int pairs = 0, separated = 0;
  double worst_ce_gap = 0.0;
  for (int i = 0; pairs < 24 && i < 200; ++i) {
    const synthgen::SampleRecord rec = synthgen::generate_sample(g, synthgen::sample_id("train", i));
    const LabelMap& gt = rec.labels;
    for (Part limb : {Part::kLeftArm, Part::kRightArm, Part::kLeftLeg, Part::kRightLeg}) {
      std::vector<std::pair<int, int>> limb_px, bg_px;
      for (int y = 0; y < gt.height(); ++y) {
        for (int x = 0; x < gt.width(); ++x) {
          if (gt.at(y, x) == index_of(limb)) limb_px.emplace_back(y, x);
          if (gt.at(y, x) == 0) bg_px.emplace_back(y, x);
        }
      }
      if (limb_px.size() < 8) continue;
      // Displaced: the lower half of the limb is predicted as background.
      std::sort(limb_px.begin(), limb_px.end());
      const std::size_t k = limb_px.size() / 2;
      LabelMap displaced = gt, preserved = gt;
      for (std::size_t n = limb_px.size() - k; n < limb_px.size(); ++n) {
        displaced.set(limb_px[n].first, limb_px[n].second, Part::kBackground);
      }
      // Preserved: as many background pixels predicted as a class no region uses.
      for (std::size_t n = 0; n < k; ++n) preserved.set(bg_px[n].first, bg_px[n].second, Part::kDress);

      auto logits_of = [](const LabelMap& m) {
        nn::Tensor<double> t({kNumPartClasses, m.height(), m.width()});
        for (int y = 0; y < m.height(); ++y) {
          for (int x = 0; x < m.width(); ++x) t.at(m.at(y, x), y, x) = 4.0;
        }
        return t;
      };
      nn::NoGradGuard guard;
      const double ce_d =
          train::parsing_loss<double>(nn::constant(logits_of(displaced)), gt)->value.values()[0];
      const double ce_p =
          train::parsing_loss<double>(nn::constant(logits_of(preserved)), gt)->value.values()[0];
      worst_ce_gap = std::max(worst_ce_gap, std::abs(ce_d - ce_p) / ce_p);
      const double s_d = selfsup::structure_report(displaced, gt, ce_d).l_structure;
      const double s_p = selfsup::structure_report(preserved, gt, ce_p).l_structure;
      ++pairs;
      separated += s_d > s_p;
    }
  }
  const bool ok = pairs >= 20 && separated == pairs && worst_ce_gap < 1e-12;
  return {ok, std::to_string(separated) + "/" + std::to_string(pairs) +
                  " pairs separated, max relative cross-entropy gap " + fmt(worst_ce_gap)};
}

// 8. Ablation grid on 200 samples, re-run from an echoed config.
Outcome ablation(const Context& ctx) {
  const fs::path dir = ctx.work / "ablation";
  fs::remove_all(dir);
  write_file(dir / "data.cfg", "train = 160\nval = 40\nseed = 11\n");
  must(cli::cmd_gen_data(dir / "data.cfg", dir / "data"), "gen-data");
  write_file(dir / "ablate.cfg",
             "dataset = " + (dir / "data").string() +
                 "\nseed = 1\nphase_a_epochs = 6\nphase_b_epochs = 12\nlearning_rate = 0.01\n"
                 "grad_clip = 5\npose_sigma = 1.5\npose_stage_weights = 50, 50, 50\n"
                 "parsing_loss_resolution = input\neval_split = val\n");
  must(cli::cmd_ablate(dir / "ablate.cfg", dir / "grid"), "ablate");

  const auto rows = metrics::parse_report_json(read_file(dir / "grid" / "report.json"), "grid");
  std::vector<std::string> names;
  for (const auto& r : rows) names.push_back(r.method);
  const bool five = names == std::vector<std::string>{"Joint", "Joint+MSC", "Joint+S1",
                                                      "Joint+MSC+S1", "Joint+MSC+S2"};
  bool echoes = true;
  for (const auto& v : cli::ablation_variants()) {
    const auto cfg = io::KeyValueConfig::load(dir / "grid" / v.slug / "config.txt");
    echoes = echoes && cfg.get_bool("msc", !v.msc) == v.msc &&
             cfg.get_int("refine_stages", -1) == v.refine_stages;
  }

  const fs::path echoed = dir / "grid" / "joint_msc_s1" / "config.txt";
  must(cli::cmd_train(echoed, train::Mode::kJoint, dir / "rerun"), "re-run train");
  cli::EvalRequest req;
  req.dataset = dir / "data";
  req.source = dir / "rerun" / "model.ckpt";
  req.split = "val";
  req.method = "Joint+MSC+S1";
  req.infer = cli::experiment_infer_config(io::KeyValueConfig::load(echoed));
  req.out = dir / "rerun_eval";
  must(cli::cmd_eval(req), "re-run eval");
  const bool same = read_file(req.out / "report.json") ==
                    read_file(dir / "grid" / "joint_msc_s1" / "eval" / "report.json");
  std::cout << read_file(dir / "grid" / "parsing.tsv") << read_file(dir / "grid" / "pose.tsv");
  return {five && echoes && same, std::string("five rows ") + (five ? "ok" : "WRONG") +
                                      ", config echoes " + (echoes ? "ok" : "WRONG") +
                                      ", Joint+MSC+S1 re-run " +
                                      (same ? "byte-identical" : "DIFFERS")};
}

// 9. Ground truth scored against itself.
Outcome identity(const Context& ctx) {
  const fs::path dir = ctx.work / "identity";
  fs::remove_all(dir);
  write_file(dir / "data.cfg", "train = 4\nval = 30\nseed = 9\n");
  must(cli::cmd_gen_data(dir / "data.cfg", dir / "data"), "gen-data");
  cli::EvalRequest req;
  req.dataset = dir / "data";
  req.source = dir / "data";
  req.factors = true;
  req.out = dir / "eval";
  must(cli::cmd_eval(req), "eval");
  const auto row = only_row(req.out);
  const auto& p = *row.summary.parsing;
  const double pckh = row.summary.pose ? row.summary.pose->total : 0.0;
  const bool ok = p.overall_accuracy == 1.0 && p.mean_accuracy == 1.0 && p.mean_iou == 1.0 &&
                  pckh == 1.0;
  return {ok, "overall " + fmt(p.overall_accuracy) + ", mean acc " + fmt(p.mean_accuracy) +
                  ", mIoU " + fmt(p.mean_iou) + ", PCKh " + fmt(pckh)};
}

// 10. gen-data -> train -> eval twice, byte-compared.
int run_tool(const std::string& tool, const std::string& args) {
  const int status = std::system((tool + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(const Context& ctx) {
  const fs::path dir = ctx.work / "determinism";
  fs::remove_all(dir);
  write_file(dir / "data.cfg", "train = 20\nval = 10\nseed = 4\n");
  const std::vector<std::string> files = {"parsing.tsv", "pose.tsv", "per_class_iou.tsv",
                                          "factors.tsv", "report.json"};
  std::vector<std::string> runs;
  for (int r = 0; r < 2; ++r) {
    const fs::path run = dir / ("run" + std::to_string(r));
    write_file(run / "train.cfg", "dataset = " + (run / "data").string() +
                                      "\nphase_a_epochs = 1\nphase_b_epochs = 1\n");
    if (!ctx.tool.empty()) {
      const std::string seed = " --seed 17";
      const bool ok =
          run_tool(ctx.tool, "gen-data --config " + (dir / "data.cfg").string() + " --out " +
                                 (run / "data").string() + seed) == 0 &&
          run_tool(ctx.tool, "train --config " + (run / "train.cfg").string() + " --out " +
                                 (run / "train").string() + seed) == 0 &&
          run_tool(ctx.tool, "eval --factors --dataset " + (run / "data").string() + " --pred " +
                                 (run / "train" / "model.ckpt").string() + " --out " +
                                 (run / "eval").string()) == 0;
      if (!ok) return {false, "command line run " + std::to_string(r) + " failed"};
    } else {
      must(cli::cmd_gen_data(dir / "data.cfg", run / "data", 17), "gen-data");
      must(cli::cmd_train(run / "train.cfg", train::Mode::kJoint, run / "train", false, 17), "train");
      cli::EvalRequest req;
      req.dataset = run / "data";
      req.source = run / "train" / "model.ckpt";
      req.factors = true;
      req.out = run / "eval";
      must(cli::cmd_eval(req), "eval");
    }
    std::string all;
    for (const auto& f : files) all += read_file(run / "eval" / f) + "\x1f";
    all += read_file(run / "train" / "train_log.jsonl");
    runs.push_back(all);
  }
  const bool ok = runs[0] == runs[1] && runs[0].size() > 100;
  return {ok, std::string(ctx.tool.empty() ? "in-process" : "separate processes") +
                  ", 5 reports + training log " + (ok ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  std::string work, tool;
  app.add_option("--only", only, "Criterion numbers to run")->delimiter(',');
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--tool", tool, "Path of the jppnet command line tool");
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.work = work.empty() ? fs::temp_directory_path() / ("jppnet-acceptance-" + std::to_string(::getpid()))
                          : fs::path(work);
  ctx.tool = tool;
  fs::create_directories(ctx.work);

  const std::vector<Criterion> criteria = {
      {1, "metrics oracle equivalence", 10, metrics_oracle},
      {2, "PCKh properties", 5, pckh_properties},
      {3, "joint and structure loss suite", 5, structure_losses},
      {4, "full-preset layer shapes", 120, full_preset_shapes},
      {5, "gradient check", 300, gradient_checks},
      {6, "overfit smoke", 900, [&] { return overfit(ctx); }},
      {7, "structure-sensitivity separation", 60, structure_separation},
      {8, "ablation harness", 7200, [&] { return ablation(ctx); }},
      {9, "end-to-end identity", 60, [&] { return identity(ctx); }},
      {10, "determinism", 1200, [&] { return determinism(ctx); }},
  };
  const std::set<int> selected(only.begin(), only.end());
  bool all = true;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = o.pass && in_time;
    all = all && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail
              << " (" << fmt(secs, 3) << " s of " << c.budget_seconds << " s"
              << (in_time ? "" : ", OVER BUDGET") << ")" << std::endl;
  }
  if (work.empty()) fs::remove_all(ctx.work);
  return all ? 0 : 1;
}
