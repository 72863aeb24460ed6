// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jppnet/metrics/parsing.hpp"
#include "jppnet/metrics/pose.hpp"
#include "jppnet/synthgen/dataset.hpp"

namespace jpp::metrics {

struct SampleMetrics {
  std::string id;
  ConfusionMatrix confusion;
  std::optional<PckhVector> pose;  // absent when pose was not evaluated
};

/// Pose is scored only when both joint sets are given.
SampleMetrics evaluate_sample(const std::string& id, const LabelMap& pred, const LabelMap& gt,
                              const JointSet* pred_joints = nullptr,
                              const JointSet* gt_joints = nullptr, double alpha = 0.5);

struct Summary {
  std::size_t samples = 0;
  ConfusionMatrix confusion;
  std::optional<ParsingScores> parsing;
  PckhCounts pose_counts;
  std::optional<PckhScores> pose;
};

Summary summarize(std::span<const SampleMetrics> samples);

struct FactorRow {
  ChallengeFactor factor{};
  Summary summary;  // pose excludes head-missing samples
};

/// One row per challenge factor, recomputed over the tagged samples only.
/// Throws DataError when a sample has no factor entry in the manifest.
std::vector<FactorRow> factor_report(const synthgen::DatasetManifest& manifest,
                                     std::span<const SampleMetrics> samples);

struct MethodReport {
  std::string method;
  Summary summary;
  std::vector<FactorRow> factors;
};

// Tab-separated tables, percentages with two decimals, "-" for empty cells.
std::string parsing_table(std::span<const MethodReport> rows);
std::string pose_table(std::span<const MethodReport> rows);
std::string per_class_iou_table(std::span<const MethodReport> rows);
std::string factor_table(std::span<const MethodReport> rows);
std::string report_json(std::span<const MethodReport> rows);

/// Inverse of report_json; summaries are rebuilt from the stored counts.
std::vector<MethodReport> parse_report_json(const std::string& text, const std::string& origin);

/// Writes parsing.tsv, pose.tsv, per_class_iou.tsv, factors.tsv and
/// report.json into `dir`.
void write_reports(const std::filesystem::path& dir, std::span<const MethodReport> rows);

}  // namespace jpp::metrics
