// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>

namespace jpp {

inline constexpr int kNumPartClasses = 20;
inline constexpr int kNumJoints = 16;
inline constexpr int kNumPseudoJoints = 9;
inline constexpr int kNumChallengeFactors = 6;

/// Parsing classes. Index 0 is background; 1-19 follow the per-class IoU
/// table column order of the LIP benchmark.
enum class Part : std::uint8_t {
  kBackground = 0,
  kHat,
  kHair,
  kGloves,
  kSunglasses,
  kUpperClothes,
  kDress,
  kCoat,
  kSocks,
  kPants,
  kJumpsuit,
  kScarf,
  kSkirt,
  kFace,
  kLeftArm,
  kRightArm,
  kLeftLeg,
  kRightLeg,
  kLeftShoe,
  kRightShoe,
};

/// Body joints in MPII order. Left/right are the subject's own sides.
enum class Joint : std::uint8_t {
  kRAnkle = 0,
  kRKnee,
  kRHip,
  kLHip,
  kLKnee,
  kLAnkle,
  kPelvis,
  kThorax,
  kUpperNeck,
  kHeadTop,
  kRWrist,
  kRElbow,
  kRShoulder,
  kLShoulder,
  kLElbow,
  kLWrist,
};

/// Region centroids used by the structure-sensitive loss.
enum class PseudoJoint : std::uint8_t {
  kHead = 0,
  kUpperBody,
  kLowerBody,
  kLeftArm,
  kRightArm,
  kLeftLeg,
  kRightLeg,
  kLeftShoe,
  kRightShoe,
};

enum class ChallengeFactor : std::uint8_t {
  kOcclusion = 0,
  kFullBody,
  kUpperBody,
  kLowerBody,
  kHeadMissing,
  kBackView,
};

constexpr int index_of(Part p) { return static_cast<int>(p); }
constexpr int index_of(Joint j) { return static_cast<int>(j); }
constexpr int index_of(PseudoJoint j) { return static_cast<int>(j); }
constexpr int index_of(ChallengeFactor f) { return static_cast<int>(f); }

std::string_view part_name(int index);
std::string_view joint_name(int index);
std::string_view pseudo_joint_name(int index);
std::string_view factor_name(ChallengeFactor f);

/// Short column heading used in per-class tables ("u-clothes", "Bkg", ...).
std::string_view part_table_heading(int index);

std::optional<int> part_from_name(std::string_view name);
std::optional<int> joint_from_name(std::string_view name);
std::optional<ChallengeFactor> factor_from_name(std::string_view name);

/// Left/right partner; self for unpaired entries.
int part_swap(int index);
int joint_swap(int index);
int pseudo_joint_swap(int index);

/// Lookup tables for hot loops.
const std::array<std::uint8_t, kNumPartClasses>& part_swap_table();
const std::array<int, kNumJoints>& joint_swap_table();

inline constexpr std::array<ChallengeFactor, kNumChallengeFactors> kAllFactors = {
    ChallengeFactor::kOcclusion,  ChallengeFactor::kFullBody,
    ChallengeFactor::kUpperBody,  ChallengeFactor::kLowerBody,
    ChallengeFactor::kHeadMissing, ChallengeFactor::kBackView,
};

/// Writes the canonical taxonomy as tab-separated rows
/// `kind  index  name  swap-partner`.
void write_taxonomy(std::ostream& out);

}  // namespace jpp
