// SPDX-License-Identifier: Apache-2.0
#include "jppnet/metrics/parsing.hpp"

#include <string>

#include "jppnet/core/errors.hpp"

namespace jpp::metrics {

std::size_t ConfusionMatrix::index(int gt, int pred) {
  if (gt < 0 || gt >= kClasses || pred < 0 || pred >= kClasses) {
    throw ShapeError("confusion index out of range: (" + std::to_string(gt) + ", " +
                     std::to_string(pred) + ")");
  }
  return static_cast<std::size_t>(gt) * kClasses + static_cast<std::size_t>(pred);
}

void ConfusionMatrix::accumulate(const LabelMap& pred, const LabelMap& gt) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw ShapeError("prediction is " + std::to_string(pred.height()) + "x" +
                     std::to_string(pred.width()) + " but ground truth is " +
                     std::to_string(gt.height()) + "x" + std::to_string(gt.width()));
  }
  const auto p = pred.values();
  const auto g = gt.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    ++counts_[static_cast<std::size_t>(g[i]) * kClasses + p[i]];
  }
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (std::uint64_t c : counts_) n += c;
  return n;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t n = 0;
  for (int k = 0; k < kClasses; ++k) n += at(k, k);
  return n;
}

std::uint64_t ConfusionMatrix::row_sum(int gt) const {
  std::uint64_t n = 0;
  for (int p = 0; p < kClasses; ++p) n += at(gt, p);
  return n;
}

std::uint64_t ConfusionMatrix::col_sum(int pred) const {
  std::uint64_t n = 0;
  for (int g = 0; g < kClasses; ++g) n += at(g, pred);
  return n;
}

ConfusionMatrix accumulate_confusion(const LabelMap& pred, const LabelMap& gt,
                                     ConfusionMatrix acc) {
  acc.accumulate(pred, gt);
  return acc;
}

ParsingScores parsing_scores(const ConfusionMatrix& acc) {
  const std::uint64_t total = acc.total();
  if (total == 0) throw DataError("cannot score an empty confusion matrix");
  ParsingScores s;
  s.overall_accuracy = static_cast<double>(acc.trace()) / static_cast<double>(total);
  double acc_sum = 0.0, iou_sum = 0.0;
  int acc_n = 0, iou_n = 0;
  for (int k = 0; k < ConfusionMatrix::kClasses; ++k) {
    const std::uint64_t diag = acc.at(k, k);
    const std::uint64_t row = acc.row_sum(k);
    const std::uint64_t uni = row + acc.col_sum(k) - diag;
    if (row > 0) {
      const double a = static_cast<double>(diag) / static_cast<double>(row);
      s.per_class_accuracy[k] = a;
      acc_sum += a;
      ++acc_n;
    }
    if (uni > 0) {
      const double iou = static_cast<double>(diag) / static_cast<double>(uni);
      s.per_class_iou[k] = iou;
      iou_sum += iou;
      ++iou_n;
    }
  }
  s.mean_accuracy = acc_sum / acc_n;
  s.mean_iou = iou_sum / iou_n;
  return s;
}

}  // namespace jpp::metrics
