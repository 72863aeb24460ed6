// SPDX-License-Identifier: Apache-2.0
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <string>
#include <vector>

#include "jppnet/cli/commands.hpp"
#include "jppnet/core/errors.hpp"
#include "jppnet/core/taxonomy.hpp"
#include "jppnet/core/types.hpp"
#include "jppnet/metrics/parsing.hpp"
#include "jppnet/metrics/pose.hpp"
#include "jppnet/selfsup/structure.hpp"

namespace py = pybind11;
using namespace jpp;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F32Array = py::array_t<float, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

LabelMap to_labels(const U8Array& a) {
  if (a.ndim() != 2) throw ShapeError("label map must be a 2-D array");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  return LabelMap::from_values(h, w, {a.data(), a.data() + a.size()});
}

HeatmapStack to_stack(const F32Array& a) {
  if (a.ndim() != 3) throw ShapeError("heatmap stack must be a 3-D array (C, H, W)");
  HeatmapStack s(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                 static_cast<int>(a.shape(2)));
  std::memcpy(s.values().data(), a.data(), sizeof(float) * s.values().size());
  return s;
}

py::array_t<float> from_stack(const HeatmapStack& s) {
  py::array_t<float> out({s.channels(), s.height(), s.width()});
  std::memcpy(out.mutable_data(), s.values().data(), sizeof(float) * s.values().size());
  return out;
}

// Rows of (x, y, visibility); visibility 0 marks an absent joint.
JointSet to_joints(const F64Array& a) {
  if (a.ndim() != 2 || a.shape(0) != kNumJoints || a.shape(1) != 3) {
    throw ShapeError("joints must be a (16, 3) array of x, y, visibility");
  }
  JointSet j;
  for (int i = 0; i < kNumJoints; ++i) {
    const double* r = a.data(i, 0);
    const int v = static_cast<int>(r[2]);
    if (v < 0 || v > 2) throw DataError("joint visibility must be 0, 1 or 2");
    if (v != 0) j.set(i, JointRecord::at(r[0], r[1], static_cast<Visibility>(v)));
  }
  return j;
}

py::dict scores_dict(const metrics::ParsingScores& s) {
  py::dict d;
  d["overall_accuracy"] = s.overall_accuracy;
  d["mean_accuracy"] = s.mean_accuracy;
  d["mean_iou"] = s.mean_iou;
  d["per_class_accuracy"] = s.per_class_accuracy;
  d["per_class_iou"] = s.per_class_iou;
  return d;
}

py::tuple result_tuple(const cli::CommandResult& r) {
  std::vector<std::string> reports;
  for (const auto& p : r.reports) reports.push_back(p.string());
  return py::make_tuple(r.exit_code, reports, r.summary);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Joint human parsing and pose estimation toolkit";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);

  m.attr("NUM_PART_CLASSES") = kNumPartClasses;
  m.attr("NUM_JOINTS") = kNumJoints;
  m.attr("NUM_PSEUDO_JOINTS") = kNumPseudoJoints;

  m.def("part_names", [] {
    std::vector<std::string> names;
    for (int i = 0; i < kNumPartClasses; ++i) names.emplace_back(part_name(i));
    return names;
  });
  m.def("joint_names", [] {
    std::vector<std::string> names;
    for (int i = 0; i < kNumJoints; ++i) names.emplace_back(joint_name(i));
    return names;
  });

  m.def(
      "confusion_matrix",
      [](const U8Array& pred, const U8Array& gt) {
        const auto acc = metrics::accumulate_confusion(to_labels(pred), to_labels(gt));
        py::array_t<std::uint64_t> out({kNumPartClasses, kNumPartClasses});
        auto v = out.mutable_unchecked<2>();
        for (int g = 0; g < kNumPartClasses; ++g) {
          for (int p = 0; p < kNumPartClasses; ++p) v(g, p) = acc.at(g, p);
        }
        return out;
      },
      py::arg("pred"), py::arg("gt"), "20x20 counts, rows ground truth, columns prediction.");

  m.def(
      "parsing_scores",
      [](const std::vector<U8Array>& preds, const std::vector<U8Array>& gts) {
        if (preds.size() != gts.size()) throw ShapeError("pred and gt lists differ in length");
        metrics::ConfusionMatrix acc;
        for (std::size_t i = 0; i < preds.size(); ++i) {
          acc = metrics::accumulate_confusion(to_labels(preds[i]), to_labels(gts[i]), acc);
        }
        return scores_dict(metrics::parsing_scores(acc));
      },
      py::arg("preds"), py::arg("gts"));

  m.def(
      "pckh",
      [](const F64Array& pred, const F64Array& gt, double alpha) {
        const auto v = metrics::pckh(to_joints(pred), to_joints(gt), alpha);
        std::vector<int> out;
        for (auto o : v) out.push_back(static_cast<int>(o));
        return out;
      },
      py::arg("pred"), py::arg("gt"), py::arg("alpha") = 0.5,
      "Per-joint outcome: 0 not evaluated, 1 correct, 2 incorrect.");

  m.def(
      "pckh_total",
      [](const std::vector<F64Array>& preds, const std::vector<F64Array>& gts, double alpha) {
        if (preds.size() != gts.size()) throw ShapeError("pred and gt lists differ in length");
        metrics::PckhCounts counts;
        for (std::size_t i = 0; i < preds.size(); ++i) {
          counts.add(metrics::pckh(to_joints(preds[i]), to_joints(gts[i]), alpha));
        }
        const auto s = metrics::pckh_scores(counts);
        py::dict d;
        d["total"] = s.total;
        for (int g = 0; g < metrics::kNumPckhGroups; ++g) {
          d[py::str(std::string(metrics::pckh_group_name(static_cast<metrics::PckhGroup>(g))))] =
              s.groups[g];
        }
        return d;
      },
      py::arg("preds"), py::arg("gts"), py::arg("alpha") = 0.5);

  m.def(
      "pseudo_joints",
      [](const U8Array& labels, int height, int width, double sigma) {
        const LabelMap l = to_labels(labels);
        if (height <= 0) height = l.height();
        if (width <= 0) width = l.width();
        return from_stack(selfsup::pseudo_joints_from_parsing(l, height, width, sigma));
      },
      py::arg("labels"), py::arg("height") = 0, py::arg("width") = 0,
      py::arg("sigma") = selfsup::kDefaultSigma);

  m.def(
      "joint_structure_loss",
      [](const F32Array& c_p, const F32Array& c_gt) {
        return selfsup::joint_structure_loss(to_stack(c_p), to_stack(c_gt)).l_joint;
      },
      py::arg("c_p"), py::arg("c_gt"));

  m.def("structure_sensitive_loss", &selfsup::structure_sensitive_loss, py::arg("l_joint"),
        py::arg("l_parsing"));

  m.def(
      "structure_report",
      [](const U8Array& pred, const U8Array& gt, double l_parsing, double sigma) {
        const auto r = selfsup::structure_report(to_labels(pred), to_labels(gt), l_parsing, sigma);
        py::dict d;
        d["l_joint"] = r.l_joint;
        d["l_parsing"] = r.l_parsing;
        d["l_structure"] = r.l_structure;
        d["n_present"] = r.n_present;
        return d;
      },
      py::arg("pred"), py::arg("gt"), py::arg("l_parsing"),
      py::arg("sigma") = selfsup::kDefaultSigma);

  // Command wrappers return (exit_code, report_paths, summary) and never raise.
  m.def(
      "gen_data",
      [](const std::string& config, const std::string& out) {
        return result_tuple(cli::run_guarded([&] { return cli::cmd_gen_data(config, out); }));
      },
      py::arg("config"), py::arg("out"));
  m.def(
      "train",
      [](const std::string& config, const std::string& out, const std::string& mode, bool resume) {
        py::gil_scoped_release release;
        auto r = cli::run_guarded(
            [&] { return cli::cmd_train(config, train::mode_from_name(mode), out, resume); });
        py::gil_scoped_acquire acquire;
        return result_tuple(r);
      },
      py::arg("config"), py::arg("out"), py::arg("mode") = "joint", py::arg("resume") = false);
  m.def(
      "evaluate",
      [](const std::string& dataset, const std::string& source, const std::string& out,
         const std::string& split, bool factors) {
        cli::EvalRequest req;
        req.dataset = dataset;
        req.source = source;
        req.out = out;
        req.split = split;
        req.factors = factors;
        return result_tuple(cli::run_guarded([&] { return cli::cmd_eval(req); }));
      },
      py::arg("dataset"), py::arg("source"), py::arg("out"), py::arg("split") = "val",
      py::arg("factors") = false);
  m.def(
      "ablate",
      [](const std::string& config, const std::string& out) {
        py::gil_scoped_release release;
        auto r = cli::run_guarded([&] { return cli::cmd_ablate(config, out); });
        py::gil_scoped_acquire acquire;
        return result_tuple(r);
      },
      py::arg("config"), py::arg("out"));
}
