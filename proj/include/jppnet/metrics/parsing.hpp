// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "jppnet/core/types.hpp"

namespace jpp::metrics {

/// 20x20 pixel counts; entry (g, p) counts pixels of ground truth g predicted
/// as p. Accumulators merge with += in any order.
class ConfusionMatrix {
 public:
  static constexpr int kClasses = kNumPartClasses;

  std::uint64_t at(int gt, int pred) const { return counts_[index(gt, pred)]; }
  void add(int gt, int pred, std::uint64_t n = 1) { counts_[index(gt, pred)] += n; }

  /// Throws ShapeError when the maps differ in size.
  void accumulate(const LabelMap& pred, const LabelMap& gt);

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend ConfusionMatrix operator+(ConfusionMatrix a, const ConfusionMatrix& b) { return a += b; }

  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(int gt) const;
  std::uint64_t col_sum(int pred) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  static std::size_t index(int gt, int pred);
  std::array<std::uint64_t, kClasses * kClasses> counts_{};
};

ConfusionMatrix accumulate_confusion(const LabelMap& pred, const LabelMap& gt,
                                     ConfusionMatrix acc = {});

struct ParsingScores {
  double overall_accuracy = 0.0;
  double mean_accuracy = 0.0;
  double mean_iou = 0.0;
  // Absent for classes with an empty ground-truth row / an empty union.
  std::array<std::optional<double>, kNumPartClasses> per_class_accuracy{};
  std::array<std::optional<double>, kNumPartClasses> per_class_iou{};
};

/// Throws DataError on an empty accumulator.
ParsingScores parsing_scores(const ConfusionMatrix& acc);

}  // namespace jpp::metrics
