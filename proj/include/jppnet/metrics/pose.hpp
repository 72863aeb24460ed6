// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "jppnet/core/types.hpp"

namespace jpp::metrics {

enum class PckhGroup : std::uint8_t { kHead = 0, kShoulder, kElbow, kWrist, kHip, kKnee, kAnkle };
inline constexpr int kNumPckhGroups = 7;

std::string_view pckh_group_name(PckhGroup g);
/// Group of a joint; pelvis and thorax have none and count toward Total only.
std::optional<PckhGroup> pckh_group_of(int joint);

/// Distance between head-top and upper-neck, absent unless both are present.
std::optional<double> head_segment_length(const JointSet& gt);

enum class JointOutcome : std::uint8_t { kNotEvaluated = 0, kCorrect, kIncorrect };
using PckhVector = std::array<JointOutcome, kNumJoints>;

/// Joint i is correct when the ground truth is present and the prediction lies
/// within alpha * head segment (inclusive). A missing prediction is incorrect.
/// Without a head segment every joint is not evaluated.
PckhVector pckh(const JointSet& pred, const JointSet& gt, double alpha = 0.5);

struct PckhCounts {
  std::array<std::uint64_t, kNumPckhGroups> group_correct{};
  std::array<std::uint64_t, kNumPckhGroups> group_evaluated{};
  std::uint64_t correct = 0;
  std::uint64_t evaluated = 0;

  void add(const PckhVector& v);
  PckhCounts& operator+=(const PckhCounts& o);
  friend bool operator==(const PckhCounts&, const PckhCounts&) = default;
};

struct PckhScores {
  // Absent for groups with no evaluated joint.
  std::array<std::optional<double>, kNumPckhGroups> groups{};
  double total = 0.0;
  std::uint64_t evaluated = 0;

  std::optional<double> group(PckhGroup g) const { return groups[static_cast<std::size_t>(g)]; }
};

/// Throws DataError when no joint was evaluated.
PckhScores pckh_scores(const PckhCounts& counts);
PckhScores aggregate_pckh(std::span<const PckhVector> samples);

}  // namespace jpp::metrics
