//===- irperf.cpp - Command-line driver -----------------------------------===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Subcommands: gen, label, train, predict, bench.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 training failure.
//
//===----------------------------------------------------------------------===//

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "irperf/harness.hpp"
#include "irperf/io.hpp"
#include "irperf/oracle.hpp"
#include "irperf/synthgen.hpp"

using namespace irperf;

namespace {

int cmdGen(const std::string &kind, int count, uint64_t seed,
           const std::string &profile_path, const std::string &out) {
  GenProfile profile =
      profile_path.empty() ? defaultProfile() : loadGenProfile(profile_path);
  profile.seed = seed;
  bool cdfg = kind == "cdfg";
  std::vector<MiniProgram> programs =
      cdfg ? genLooping(profile, count) : genStraightline(profile, count);
  std::vector<IrGraph> graphs;
  for (int i = 0; i < count; ++i) {
    IrGraph g = cdfg ? extractCdfg(programs[i]) : extractDfg(programs[i]);
    if (g.id.empty()) g.id = kind + "_" + std::to_string(i);
    graphs.push_back(std::move(g));
  }
  writeGraphsJsonl(out, graphs);
  return 0;
}

int cmdLabel(const std::string &in, const std::string &rules_path,
             const std::string &out) {
  CostRules rules =
      rules_path.empty() ? defaultRules() : loadRules(rules_path);
  std::vector<IrGraph> graphs = readGraphsJsonl(in);
  for (IrGraph &g : graphs) g = labelAll(g, rules);
  writeGraphsJsonl(out, graphs);
  return 0;
}

std::vector<PackedGraph> packAll(const std::vector<IrGraph> &graphs) {
  std::vector<PackedGraph> out;
  for (const IrGraph &g : graphs) {
    std::vector<Violation> v = validate(g);
    if (!v.empty())
      throw Error("graph '" + g.id + "' invalid: " + v[0].locus + ": " +
                  v[0].message);
    out.push_back(packGraph(g));
  }
  return out;
}

void writeTrainLog(const std::string &path, const std::vector<EpochLog> &log) {
  std::ofstream out(path);
  out << std::setprecision(9);
  for (size_t e = 0; e < log.size(); ++e)
    out << "epoch " << e << " train_loss " << log[e].train_loss
        << " val_metric " << log[e].val_metric << '\n';
}

int cmdTrain(const std::string &strategy_name, const std::string &layer_name,
             const std::string &target_name_arg, const std::string &data,
             uint64_t seed, int epochs, const std::string &out) {
  StrategyKind strategy = strategyKindFromName(strategy_name);
  GnnLayerKind layer = layerKindFromName(layer_name);
  std::vector<PackedGraph> packed = packAll(readGraphsJsonl(data));
  SplitResult sp = split(packed, SplitFractions{}, /*seed=*/1);

  TrainOptions opts;
  opts.seed = seed;
  opts.epochs = epochs;

  Checkpoint ckpt;
  ckpt.info.strategy = strategy;
  ckpt.info.layer = layer;
  ckpt.info.target = target_name_arg;
  ckpt.info.seed = seed;

  std::vector<Target> targets;
  if (target_name_arg == "all")
    targets = {Target::Dsp, Target::Lut, Target::Ff, Target::Cp};
  else
    targets = {targetFromName(target_name_arg)};

  if (strategy == StrategyKind::KnowledgeInfused) {
    TrainedModel cls = trainNodeClassifier(sp.train, sp.val, layer, opts);
    writeTrainLog(out + ".classifier.log", cls.log);
    ckpt.classifier_best_epoch = cls.best_epoch;
    ckpt.classifier = std::move(cls.model);
  }
  for (Target t : targets) {
    TrainedModel tm =
        strategy == StrategyKind::OffTheShelf
            ? trainOffTheShelf(sp.train, sp.val, layer, t, opts)
        : strategy == StrategyKind::KnowledgeRich
            ? trainKnowledgeRich(sp.train, sp.val, layer, t, opts)
            : trainInfusedRegressor(sp.train, sp.val, layer, t, opts);
    writeTrainLog(targets.size() == 1
                      ? out + ".log"
                      : out + "." + targetName(t) + ".log",
                  tm.log);
    int ti = static_cast<int>(t);
    ckpt.best_epochs[ti] = tm.best_epoch;
    ckpt.regressors[ti] = std::move(tm.model);
  }
  saveCheckpoint(out, ckpt);
  return 0;
}

int cmdPredict(const std::string &model_path, const std::string &graph_path) {
  Checkpoint ckpt = loadCheckpoint(model_path);
  std::vector<IrGraph> graphs = readGraphsJsonl(graph_path);
  if (graphs.empty()) throw Error("no graphs in " + graph_path);
  if (ckpt.info.target == "all") {
    StrategyModel model = ckpt.toStrategyModel();
    for (const IrGraph &g : graphs) {
      PredictedLabels p = infer(model, g);
      std::cout << g.id << ' ' << p.dsp << ' ' << p.lut << ' ' << p.ff << ' '
                << p.cp_ns << '\n';
    }
  } else {
    Target t = targetFromName(ckpt.info.target);
    const GnnModel<float> *regressor = &*ckpt.regressors[static_cast<int>(t)];
    const GnnModel<float> *cls =
        ckpt.classifier ? &*ckpt.classifier : nullptr;
    if (ckpt.info.strategy == StrategyKind::KnowledgeRich)
      for (const IrGraph &g : graphs)
        if (!packGraph(g).has_node_labels)
          throw Error("knowledge-rich inference needs per-node resource "
                      "counts; graph '" + g.id + "' lacks them");
    std::vector<PackedGraph> packed;
    for (const IrGraph &g : graphs) packed.push_back(packGraph(g));
    std::vector<double> preds = predictTarget(*regressor, t, packed, cls);
    for (size_t i = 0; i < graphs.size(); ++i)
      std::cout << graphs[i].id << ' ' << ckpt.info.target << ' ' << preds[i]
                << '\n';
  }
  return 0;
}

int cmdBench(const std::string &spec_path, const std::string &report_dir) {
  ExperimentSpec spec = loadExperimentSpec(spec_path);
  std::vector<ExperimentDataset> datasets;
  for (const auto &[name, path] : spec.datasets)
    datasets.push_back({name, packAll(readGraphsJsonl(path))});
  std::filesystem::create_directories(report_dir);
  ResultTable table = runExperiment(spec, datasets, report_dir);
  Report report = renderReport(table);
  std::ofstream(report_dir + "/report.md") << report.markdown;
  std::ofstream(report_dir + "/report.csv") << report.csv;
  for (const RegressionCell &c : table.regression)
    if (!c.ok)
      std::cerr << "cell failed: " << c.dataset << '/'
                << strategyKindName(c.strategy) << '/' << layerKindName(c.layer)
                << '/' << targetName(c.target) << ": " << c.error << '\n';
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"IR-graph FPGA resource and timing predictor"};
  app.require_subcommand(1);

  std::string kind = "dfg", profile, out, in, rules, strategy = "off-the-shelf",
              layer = "rgcn", target = "all", data, model_path, graph_path,
              spec_path, report_dir;
  int count = 100, epochs = 100;
  uint64_t seed = 0;

  CLI::App *gen = app.add_subcommand("gen", "Generate a graph corpus");
  gen->add_option("--kind", kind)->check(CLI::IsMember({"dfg", "cdfg"}));
  gen->add_option("--count", count)->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed);
  gen->add_option("--profile", profile);
  gen->add_option("--out", out)->required();

  CLI::App *label = app.add_subcommand("label", "Attach oracle cost labels");
  label->add_option("--in", in)->required();
  label->add_option("--rules", rules);
  label->add_option("--out", out)->required();

  CLI::App *train = app.add_subcommand("train", "Train a strategy model");
  train->add_option("--strategy", strategy);
  train->add_option("--layer", layer);
  train->add_option("--target", target)
      ->check(CLI::IsMember({"all", "dsp", "lut", "ff", "cp"}));
  train->add_option("--data", data)->required();
  train->add_option("--seed", seed);
  train->add_option("--epochs", epochs)->check(CLI::PositiveNumber);
  train->add_option("--out", out)->required();

  CLI::App *predict = app.add_subcommand("predict", "Predict from a checkpoint");
  predict->add_option("--model", model_path)->required();
  predict->add_option("--graph", graph_path)->required();

  CLI::App *bench = app.add_subcommand("bench", "Run an experiment spec");
  bench->add_option("--spec", spec_path)->required();
  bench->add_option("--report", report_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  bool training = train->parsed() || bench->parsed();
  try {
    if (gen->parsed()) return cmdGen(kind, count, seed, profile, out);
    if (label->parsed()) return cmdLabel(in, rules, out);
    if (train->parsed())
      return cmdTrain(strategy, layer, target, data, seed, epochs, out);
    if (predict->parsed()) return cmdPredict(model_path, graph_path);
    if (bench->parsed()) return cmdBench(spec_path, report_dir);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return training ? 3 : 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return training ? 3 : 2;
  }
  return 1;
}
