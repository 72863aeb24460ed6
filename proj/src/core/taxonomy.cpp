// SPDX-License-Identifier: Apache-2.0
#include "jppnet/core/taxonomy.hpp"

#include <ostream>
#include <stdexcept>
#include <string>

namespace jpp {
namespace {

constexpr std::array<std::string_view, kNumPartClasses> kPartNames = {
    "background", "hat",        "hair",     "gloves",    "sunglasses",
    "upper-clothes", "dress",   "coat",     "socks",     "pants",
    "jumpsuit",   "scarf",      "skirt",    "face",      "left-arm",
    "right-arm",  "left-leg",   "right-leg", "left-shoe", "right-shoe",
};

constexpr std::array<std::string_view, kNumPartClasses> kPartHeadings = {
    "Bkg",   "hat",   "hair",   "gloves", "sunglasses", "u-clothes", "dress",
    "coat",  "socks", "pants",  "jumpsuit", "scarf",    "skirt",     "face",
    "l-arm", "r-arm", "l-leg",  "r-leg",  "l-shoe",     "r-shoe",
};

constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "r-ankle", "r-knee",     "r-hip",    "l-hip",      "l-knee",     "l-ankle",
    "pelvis",  "thorax",     "upper-neck", "head-top", "r-wrist",    "r-elbow",
    "r-shoulder", "l-shoulder", "l-elbow", "l-wrist",
};

constexpr std::array<std::string_view, kNumPseudoJoints> kPseudoNames = {
    "head",     "upper-body", "lower-body", "left-arm",  "right-arm",
    "left-leg", "right-leg",  "left-shoe",  "right-shoe",
};

constexpr std::array<std::string_view, kNumChallengeFactors> kFactorNames = {
    "occlusion", "full-body", "upper-body", "lower-body", "head-missing", "back-view",
};

constexpr std::array<std::uint8_t, kNumPartClasses> make_part_swap() {
  std::array<std::uint8_t, kNumPartClasses> t{};
  for (int i = 0; i < kNumPartClasses; ++i) t[i] = static_cast<std::uint8_t>(i);
  auto pair = [&t](Part a, Part b) {
    t[index_of(a)] = static_cast<std::uint8_t>(index_of(b));
    t[index_of(b)] = static_cast<std::uint8_t>(index_of(a));
  };
  pair(Part::kLeftArm, Part::kRightArm);
  pair(Part::kLeftLeg, Part::kRightLeg);
  pair(Part::kLeftShoe, Part::kRightShoe);
  return t;
}

constexpr std::array<int, kNumJoints> make_joint_swap() {
  std::array<int, kNumJoints> t{};
  for (int i = 0; i < kNumJoints; ++i) t[i] = i;
  auto pair = [&t](Joint a, Joint b) {
    t[index_of(a)] = index_of(b);
    t[index_of(b)] = index_of(a);
  };
  pair(Joint::kRAnkle, Joint::kLAnkle);
  pair(Joint::kRKnee, Joint::kLKnee);
  pair(Joint::kRHip, Joint::kLHip);
  pair(Joint::kRWrist, Joint::kLWrist);
  pair(Joint::kRElbow, Joint::kLElbow);
  pair(Joint::kRShoulder, Joint::kLShoulder);
  return t;
}

constexpr auto kPartSwap = make_part_swap();
constexpr auto kJointSwap = make_joint_swap();

template <std::size_t N>
std::string_view checked(const std::array<std::string_view, N>& names, int index,
                         const char* what) {
  if (index < 0 || index >= static_cast<int>(N)) {
    throw std::out_of_range(std::string(what) + " index out of range: " +
                            std::to_string(index));
  }
  return names[static_cast<std::size_t>(index)];
}

template <std::size_t N>
std::optional<int> find_name(const std::array<std::string_view, N>& names,
                             std::string_view name) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

}  // namespace

std::string_view part_name(int index) { return checked(kPartNames, index, "part"); }
std::string_view joint_name(int index) { return checked(kJointNames, index, "joint"); }
std::string_view pseudo_joint_name(int index) {
  return checked(kPseudoNames, index, "pseudo-joint");
}
std::string_view factor_name(ChallengeFactor f) {
  return kFactorNames[static_cast<std::size_t>(index_of(f))];
}
std::string_view part_table_heading(int index) {
  return checked(kPartHeadings, index, "part");
}

std::optional<int> part_from_name(std::string_view name) { return find_name(kPartNames, name); }
std::optional<int> joint_from_name(std::string_view name) {
  return find_name(kJointNames, name);
}
std::optional<ChallengeFactor> factor_from_name(std::string_view name) {
  auto i = find_name(kFactorNames, name);
  if (!i) return std::nullopt;
  return static_cast<ChallengeFactor>(*i);
}

int part_swap(int index) {
  checked(kPartNames, index, "part");
  return kPartSwap[static_cast<std::size_t>(index)];
}

int joint_swap(int index) {
  checked(kJointNames, index, "joint");
  return kJointSwap[static_cast<std::size_t>(index)];
}

int pseudo_joint_swap(int index) {
  checked(kPseudoNames, index, "pseudo-joint");
  // head, upper-body and lower-body are unpaired; the rest alternate left/right.
  if (index < index_of(PseudoJoint::kLeftArm)) return index;
  return (index - index_of(PseudoJoint::kLeftArm)) % 2 == 0 ? index + 1 : index - 1;
}

const std::array<std::uint8_t, kNumPartClasses>& part_swap_table() { return kPartSwap; }
const std::array<int, kNumJoints>& joint_swap_table() { return kJointSwap; }

void write_taxonomy(std::ostream& out) {
  out << "# kind\tindex\tname\tswap\n";
  for (int i = 0; i < kNumPartClasses; ++i) {
    out << "part\t" << i << '\t' << kPartNames[i] << '\t' << kPartNames[kPartSwap[i]] << '\n';
  }
  for (int i = 0; i < kNumJoints; ++i) {
    out << "joint\t" << i << '\t' << kJointNames[i] << '\t' << kJointNames[kJointSwap[i]]
        << '\n';
  }
  for (int i = 0; i < kNumPseudoJoints; ++i) {
    out << "pseudo-joint\t" << i << '\t' << kPseudoNames[i] << '\t'
        << kPseudoNames[pseudo_joint_swap(i)] << '\n';
  }
  for (int i = 0; i < kNumChallengeFactors; ++i) {
    out << "factor\t" << i << '\t' << kFactorNames[i] << '\t' << kFactorNames[i] << '\n';
  }
}

}  // namespace jpp
