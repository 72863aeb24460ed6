// SPDX-License-Identifier: Apache-2.0
#include "jppnet/metrics/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "jppnet/core/errors.hpp"

namespace jpp::metrics {
namespace {

using nlohmann::json;

std::string pct(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * *v);
  return buf;
}

json opt(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

json parsing_json(const Summary& s) {
  if (!s.parsing) return nullptr;
  const ParsingScores& p = *s.parsing;
  json iou = json::object(), acc = json::object();
  for (int k = 0; k < kNumPartClasses; ++k) {
    const std::string name(part_name(k));
    iou[name] = opt(p.per_class_iou[k]);
    acc[name] = opt(p.per_class_accuracy[k]);
  }
  json confusion = json::array();
  for (int g = 0; g < kNumPartClasses; ++g) {
    json row = json::array();
    for (int q = 0; q < kNumPartClasses; ++q) row.push_back(s.confusion.at(g, q));
    confusion.push_back(row);
  }
  return {{"overall_accuracy", p.overall_accuracy},
          {"mean_accuracy", p.mean_accuracy},
          {"mean_iou", p.mean_iou},
          {"per_class_iou", iou},
          {"per_class_accuracy", acc},
          {"confusion", confusion}};
}

json pose_json(const Summary& s) {
  if (!s.pose) return nullptr;
  json j = json::object();
  for (int g = 0; g < kNumPckhGroups; ++g) {
    j[std::string(pckh_group_name(static_cast<PckhGroup>(g)))] = opt(s.pose->groups[g]);
  }
  j["Total"] = s.pose->total;
  j["evaluated_joints"] = s.pose->evaluated;
  j["correct_joints"] = s.pose_counts.correct;
  j["group_correct"] = s.pose_counts.group_correct;
  j["group_evaluated"] = s.pose_counts.group_evaluated;
  return j;
}

Summary summary_from_json(const json& j) {
  Summary s;
  s.samples = j.at("samples").get<std::size_t>();
  const json& parsing = j.at("parsing");
  if (!parsing.is_null()) {
    const json& rows = parsing.at("confusion");
    if (rows.size() != kNumPartClasses) throw DataError("confusion matrix must be 20x20");
    for (int g = 0; g < kNumPartClasses; ++g) {
      if (rows[g].size() != kNumPartClasses) throw DataError("confusion matrix must be 20x20");
      for (int q = 0; q < kNumPartClasses; ++q) s.confusion.add(g, q, rows[g][q].get<std::uint64_t>());
    }
    s.parsing = parsing_scores(s.confusion);
  }
  const json& pose = j.at("pose");
  if (!pose.is_null()) {
    s.pose_counts.correct = pose.at("correct_joints").get<std::uint64_t>();
    s.pose_counts.evaluated = pose.at("evaluated_joints").get<std::uint64_t>();
    s.pose_counts.group_correct = pose.at("group_correct").get<decltype(s.pose_counts.group_correct)>();
    s.pose_counts.group_evaluated =
        pose.at("group_evaluated").get<decltype(s.pose_counts.group_evaluated)>();
    s.pose = pckh_scores(s.pose_counts);
  }
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace

SampleMetrics evaluate_sample(const std::string& id, const LabelMap& pred, const LabelMap& gt,
                              const JointSet* pred_joints, const JointSet* gt_joints,
                              double alpha) {
  SampleMetrics m;
  m.id = id;
  try {
    m.confusion.accumulate(pred, gt);
  } catch (const ShapeError& e) {
    throw ShapeError("sample " + id + ": " + e.what());
  }
  if (pred_joints && gt_joints) m.pose = pckh(*pred_joints, *gt_joints, alpha);
  return m;
}

Summary summarize(std::span<const SampleMetrics> samples) {
  Summary s;
  for (const SampleMetrics& m : samples) {
    ++s.samples;
    s.confusion += m.confusion;
    if (m.pose) s.pose_counts.add(*m.pose);
  }
  if (s.confusion.total() > 0) s.parsing = parsing_scores(s.confusion);
  if (s.pose_counts.evaluated > 0) s.pose = pckh_scores(s.pose_counts);
  return s;
}

std::vector<FactorRow> factor_report(const synthgen::DatasetManifest& manifest,
                                     std::span<const SampleMetrics> samples) {
  std::map<ChallengeFactor, std::vector<SampleMetrics>> buckets;
  for (const SampleMetrics& m : samples) {
    auto it = manifest.factors.find(m.id);
    if (it == manifest.factors.end()) throw DataError("no factor tags for sample " + m.id);
    const bool head_missing =
        std::find(it->second.begin(), it->second.end(), ChallengeFactor::kHeadMissing) !=
        it->second.end();
    for (ChallengeFactor f : it->second) {
      SampleMetrics copy = m;
      if (head_missing) copy.pose.reset();
      buckets[f].push_back(std::move(copy));
    }
  }
  std::vector<FactorRow> rows;
  for (ChallengeFactor f : kAllFactors) {
    FactorRow row;
    row.factor = f;
    if (auto it = buckets.find(f); it != buckets.end()) row.summary = summarize(it->second);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string parsing_table(std::span<const MethodReport> rows) {
  std::string out = "Method\tOverall accuracy\tMean accuracy\tMean IoU\n";
  for (const MethodReport& r : rows) {
    const auto& p = r.summary.parsing;
    out += r.method + "\t" + pct(p ? std::optional(p->overall_accuracy) : std::nullopt) + "\t" +
           pct(p ? std::optional(p->mean_accuracy) : std::nullopt) + "\t" +
           pct(p ? std::optional(p->mean_iou) : std::nullopt) + "\n";
  }
  return out;
}

std::string pose_table(std::span<const MethodReport> rows) {
  std::string out = "Method";
  for (int g = 0; g < kNumPckhGroups; ++g) {
    out += "\t" + std::string(pckh_group_name(static_cast<PckhGroup>(g)));
  }
  out += "\tTotal\n";
  for (const MethodReport& r : rows) {
    const auto& p = r.summary.pose;
    out += r.method;
    for (int g = 0; g < kNumPckhGroups; ++g) out += "\t" + pct(p ? p->groups[g] : std::nullopt);
    out += "\t" + pct(p ? std::optional(p->total) : std::nullopt) + "\n";
  }
  return out;
}

std::string per_class_iou_table(std::span<const MethodReport> rows) {
  // Foreground classes first, background last, then the average.
  std::string out = "Method";
  for (int k = 1; k < kNumPartClasses; ++k) out += "\t" + std::string(part_table_heading(k));
  out += "\t" + std::string(part_table_heading(0)) + "\tAvg\n";
  for (const MethodReport& r : rows) {
    const auto& p = r.summary.parsing;
    out += r.method;
    for (int k = 1; k < kNumPartClasses; ++k) out += "\t" + pct(p ? p->per_class_iou[k] : std::nullopt);
    out += "\t" + pct(p ? p->per_class_iou[0] : std::nullopt);
    out += "\t" + pct(p ? std::optional(p->mean_iou) : std::nullopt) + "\n";
  }
  return out;
}

std::string factor_table(std::span<const MethodReport> rows) {
  std::string out =
      "Method\tFactor\tSamples\tOverall accuracy\tMean accuracy\tMean IoU\tPCKh joints\tPCKh\n";
  for (const MethodReport& r : rows) {
    for (const FactorRow& f : r.factors) {
      const Summary& s = f.summary;
      const auto& p = s.parsing;
      out += r.method + "\t" + std::string(factor_name(f.factor)) + "\t" +
             std::to_string(s.samples) + "\t" +
             pct(p ? std::optional(p->overall_accuracy) : std::nullopt) + "\t" +
             pct(p ? std::optional(p->mean_accuracy) : std::nullopt) + "\t" +
             pct(p ? std::optional(p->mean_iou) : std::nullopt) + "\t" +
             (s.pose ? std::to_string(s.pose->evaluated) : std::string("-")) + "\t" +
             pct(s.pose ? std::optional(s.pose->total) : std::nullopt) + "\n";
    }
  }
  return out;
}

std::string report_json(std::span<const MethodReport> rows) {
  json methods = json::array();
  for (const MethodReport& r : rows) {
    json factors = json::array();
    for (const FactorRow& f : r.factors) {
      factors.push_back({{"factor", std::string(factor_name(f.factor))},
                         {"samples", f.summary.samples},
                         {"parsing", parsing_json(f.summary)},
                         {"pose", pose_json(f.summary)}});
    }
    methods.push_back({{"method", r.method},
                       {"samples", r.summary.samples},
                       {"parsing", parsing_json(r.summary)},
                       {"pose", pose_json(r.summary)},
                       {"factors", factors}});
  }
  return json{{"methods", methods}}.dump(1) + "\n";
}

std::vector<MethodReport> parse_report_json(const std::string& text, const std::string& origin) {
  try {
    const json doc = json::parse(text);
    std::vector<MethodReport> rows;
    for (const json& m : doc.at("methods")) {
      MethodReport r;
      r.method = m.at("method").get<std::string>();
      r.summary = summary_from_json(m);
      for (const json& f : m.at("factors")) {
        FactorRow row;
        const auto factor = factor_from_name(f.at("factor").get<std::string>());
        if (!factor) throw DataError("unknown factor in " + origin);
        row.factor = *factor;
        row.summary = summary_from_json(f);
        r.factors.push_back(std::move(row));
      }
      rows.push_back(std::move(r));
    }
    return rows;
  } catch (const json::exception& e) {
    throw DataError("malformed report " + origin + ": " + e.what());
  }
}

void write_reports(const std::filesystem::path& dir, std::span<const MethodReport> rows) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "parsing.tsv", parsing_table(rows));
  write_file(dir / "pose.tsv", pose_table(rows));
  write_file(dir / "per_class_iou.tsv", per_class_iou_table(rows));
  write_file(dir / "factors.tsv", factor_table(rows));
  write_file(dir / "report.json", report_json(rows));
}

}  // namespace jpp::metrics
