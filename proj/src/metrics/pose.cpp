// SPDX-License-Identifier: Apache-2.0
#include "jppnet/metrics/pose.hpp"

#include <cmath>

#include "jppnet/core/errors.hpp"

namespace jpp::metrics {
namespace {

constexpr std::array<std::string_view, kNumPckhGroups> kGroupNames = {
    "Head", "Shoulder", "Elbow", "Wrist", "Hip", "Knee", "Ankle"};

}  // namespace

std::string_view pckh_group_name(PckhGroup g) { return kGroupNames[static_cast<std::size_t>(g)]; }

std::optional<PckhGroup> pckh_group_of(int joint) {
  switch (static_cast<Joint>(joint)) {
    case Joint::kHeadTop:
    case Joint::kUpperNeck: return PckhGroup::kHead;
    case Joint::kRShoulder:
    case Joint::kLShoulder: return PckhGroup::kShoulder;
    case Joint::kRElbow:
    case Joint::kLElbow: return PckhGroup::kElbow;
    case Joint::kRWrist:
    case Joint::kLWrist: return PckhGroup::kWrist;
    case Joint::kRHip:
    case Joint::kLHip: return PckhGroup::kHip;
    case Joint::kRKnee:
    case Joint::kLKnee: return PckhGroup::kKnee;
    case Joint::kRAnkle:
    case Joint::kLAnkle: return PckhGroup::kAnkle;
    default: return std::nullopt;
  }
}

std::optional<double> head_segment_length(const JointSet& gt) {
  const JointRecord& top = gt[Joint::kHeadTop];
  const JointRecord& neck = gt[Joint::kUpperNeck];
  if (!top.present() || !neck.present()) return std::nullopt;
  return std::hypot(top.x - neck.x, top.y - neck.y);
}

PckhVector pckh(const JointSet& pred, const JointSet& gt, double alpha) {
  PckhVector out{};
  const auto head = head_segment_length(gt);
  if (!head) return out;
  const double threshold = alpha * *head;
  for (int j = 0; j < kNumJoints; ++j) {
    if (!gt[j].present()) continue;
    bool ok = false;
    if (pred[j].present()) ok = std::hypot(pred[j].x - gt[j].x, pred[j].y - gt[j].y) <= threshold;
    out[static_cast<std::size_t>(j)] = ok ? JointOutcome::kCorrect : JointOutcome::kIncorrect;
  }
  return out;
}

void PckhCounts::add(const PckhVector& v) {
  for (int j = 0; j < kNumJoints; ++j) {
    const JointOutcome o = v[static_cast<std::size_t>(j)];
    if (o == JointOutcome::kNotEvaluated) continue;
    const bool ok = o == JointOutcome::kCorrect;
    ++evaluated;
    correct += ok;
    if (auto g = pckh_group_of(j)) {
      ++group_evaluated[static_cast<std::size_t>(*g)];
      group_correct[static_cast<std::size_t>(*g)] += ok;
    }
  }
}

PckhCounts& PckhCounts::operator+=(const PckhCounts& o) {
  for (int g = 0; g < kNumPckhGroups; ++g) {
    group_correct[g] += o.group_correct[g];
    group_evaluated[g] += o.group_evaluated[g];
  }
  correct += o.correct;
  evaluated += o.evaluated;
  return *this;
}

PckhScores pckh_scores(const PckhCounts& c) {
  if (c.evaluated == 0) throw DataError("no evaluated joints for PCKh");
  PckhScores s;
  for (int g = 0; g < kNumPckhGroups; ++g) {
    if (c.group_evaluated[g] > 0) {
      s.groups[g] = static_cast<double>(c.group_correct[g]) / static_cast<double>(c.group_evaluated[g]);
    }
  }
  s.total = static_cast<double>(c.correct) / static_cast<double>(c.evaluated);
  s.evaluated = c.evaluated;
  return s;
}

PckhScores aggregate_pckh(std::span<const PckhVector> samples) {
  PckhCounts c;
  for (const PckhVector& v : samples) c.add(v);
  return pckh_scores(c);
}

}  // namespace jpp::metrics
