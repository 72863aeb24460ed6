// SPDX-License-Identifier: Apache-2.0
// Command line front end: gen-data, train, eval, predict, ablate, report,
// pseudo-joints.
#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "jppnet/cli/commands.hpp"
#include "jppnet/core/errors.hpp"
#include "jppnet/io/kv_config.hpp"

namespace fs = std::filesystem;
using namespace jpp;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string config;
};

void need(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string("missing required option ") + flag);
}

infer::InferConfig infer_from(const Globals& g) {
  if (g.config.empty()) return {};
  return cli::experiment_infer_config(io::KeyValueConfig::load(g.config));
}

int finish(const cli::CommandResult& r) {
  if (r.exit_code == cli::kExitOk) {
    std::cout << r.summary << "\n";
    for (const auto& p : r.reports) std::cout << "report: " << p.string() << "\n";
  } else {
    std::cerr << "jppnet: " << r.summary << "\n";
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint human parsing and pose estimation experiments"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Override the config seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--config", g.config, "Experiment config file");

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  gen->fallthrough();

  auto* train = app.add_subcommand("train", "Train a model");
  train->fallthrough();
  std::string mode = "joint";
  bool resume = false;
  train->add_option("--mode", mode, "joint or ss")->check(CLI::IsMember({"joint", "ss"}));
  train->add_flag("--resume", resume, "Continue from latest.ckpt in --out");

  auto* eval = app.add_subcommand("eval", "Evaluate predictions or a checkpoint");
  eval->fallthrough();
  std::string eval_dataset, eval_source, eval_split = "val", eval_method;
  bool factors = false;
  eval->add_option("--dataset", eval_dataset, "Dataset directory")->required();
  eval->add_option("--pred", eval_source, "Prediction archive or checkpoint")->required();
  eval->add_option("--split", eval_split, "Dataset split");
  eval->add_option("--method", eval_method, "Method name in the report");
  eval->add_flag("--factors", factors, "Add the challenging-factor table");

  auto* predict = app.add_subcommand("predict", "Write a prediction archive");
  predict->fallthrough();
  std::string pred_ckpt, pred_dataset, pred_split = "val";
  predict->add_option("--checkpoint", pred_ckpt, "Model checkpoint")->required();
  predict->add_option("--dataset", pred_dataset, "Dataset directory")->required();
  predict->add_option("--split", pred_split, "Dataset split");

  auto* ablate = app.add_subcommand("ablate", "Train and evaluate the variant grid");
  ablate->fallthrough();

  auto* report = app.add_subcommand("report", "Merge report.json files into one table");
  report->fallthrough();
  std::vector<std::string> report_inputs;
  report->add_option("inputs", report_inputs, "Report directories or files")->required();

  auto* pseudo = app.add_subcommand("pseudo-joints", "Render pseudo-joint heatmaps of a sample");
  pseudo->fallthrough();
  std::string pj_dataset, pj_id;
  double pj_sigma = 3.0;
  pseudo->add_option("--dataset", pj_dataset, "Dataset directory")->required();
  pseudo->add_option("--id", pj_id, "Sample id")->required();
  pseudo->add_option("--sigma", pj_sigma, "Gaussian sigma in pixels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }

  const cli::CommandResult result = cli::run_guarded([&]() -> cli::CommandResult {
    if (*gen) {
      need(g.config, "--config");
      need(g.out, "--out");
      return cli::cmd_gen_data(g.config, g.out, g.seed);
    }
    if (*train) {
      need(g.config, "--config");
      need(g.out, "--out");
      auto progress = [](const train::EpochRecord& r) {
        std::cerr << "phase " << r.phase << " epoch " << r.epoch << " step " << r.step
                  << " loss " << r.loss << "\n";
      };
      return cli::cmd_train(g.config, train::mode_from_name(mode), g.out, resume, g.seed,
                            progress);
    }
    if (*eval) {
      need(g.out, "--out");
      cli::EvalRequest req;
      req.dataset = eval_dataset;
      req.source = eval_source;
      req.split = eval_split;
      req.factors = factors;
      req.method = eval_method;
      req.infer = infer_from(g);
      req.out = g.out;
      return cli::cmd_eval(req);
    }
    if (*predict) {
      need(g.out, "--out");
      cli::PredictRequest req;
      req.checkpoint = pred_ckpt;
      req.dataset = pred_dataset;
      req.split = pred_split;
      req.infer = infer_from(g);
      req.out = g.out;
      return cli::cmd_predict(req);
    }
    if (*ablate) {
      need(g.config, "--config");
      need(g.out, "--out");
      return cli::cmd_ablate(g.config, g.out, g.seed);
    }
    if (*report) {
      need(g.out, "--out");
      return cli::cmd_report({report_inputs.begin(), report_inputs.end()}, g.out);
    }
    need(g.out, "--out");
    return cli::cmd_pseudo_joints(pj_dataset, pj_id, fs::path(g.out) / (pj_id + "_pseudo.png"),
                                  pj_sigma);
  });
  return finish(result);
}
