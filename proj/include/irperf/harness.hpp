//===- harness.hpp - Experiment orchestration and reporting ---------------===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Dataset splitting, metrics, the multi-seed train/select/aggregate protocol,
// and deterministic report rendering (markdown + CSV).
//
//===----------------------------------------------------------------------===//

#ifndef IRPERF_HARNESS_HPP
#define IRPERF_HARNESS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "irperf/strategies.hpp"

namespace irperf {

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

/// Deterministic shuffled partition of [0, n). Sizes are round(n*f_train),
/// round(n*f_val), remainder. Throws if fractions are negative or don't sum
/// to 1, or if any part would be empty for n > 0.
std::array<std::vector<int>, 3> splitIndices(int n, const SplitFractions &f,
                                             uint64_t seed);

struct SplitResult {
  std::vector<PackedGraph> train, val, test;
};

SplitResult split(const std::vector<PackedGraph> &dataset,
                  const SplitFractions &f, uint64_t seed);

/// Mean of |pred - true| / max(|true|, 1). Throws on empty or length mismatch.
double mape(const std::vector<double> &preds, const std::vector<double> &trues);

/// Per-resource fraction of matching flag bits. Throws on empty or mismatch.
std::array<double, 3> accuracy(const std::vector<std::array<int, 3>> &preds,
                               const std::vector<std::array<int, 3>> &trues);

/// Classifier accuracy on a graph list; truth bit is flag==1 (the misc
/// sentinel on non-operation nodes counts as 0, matching training targets).
std::array<double, 3> classifierAccuracy(const GnnModel<float> &classifier,
                                         const std::vector<PackedGraph> &graphs);

struct ExperimentDataset {
  std::string name;  // e.g. "dfg", "cdfg"
  std::vector<PackedGraph> graphs;
};

struct ExperimentSpec {
  std::vector<std::pair<std::string, std::string>> datasets;  // name -> path
  std::vector<StrategyKind> strategies;
  std::vector<GnnLayerKind> layers;
  std::vector<Target> targets;
  std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
  int epochs = 100;
  SplitFractions fractions;
  uint64_t split_seed = 1;
  int select_count = 3;  // seeds with least validation error enter the mean
  int batch_size = 32;
  double lr = 1e-3;
  double dropout = 0.1;
  bool classification = true;  // emit the node-classification table
};

/// Throws on invalid fractions, duplicate seeds, or empty grids.
void validateSpec(const ExperimentSpec &spec);

struct SeedResult {
  uint64_t seed = 0;
  double val_metric = 0.0;
  double test_metric = 0.0;
  int best_epoch = -1;
  bool selected = false;
};

struct RegressionCell {
  std::string dataset;
  StrategyKind strategy = StrategyKind::OffTheShelf;
  GnnLayerKind layer = GnnLayerKind::GCN;
  Target target = Target::Dsp;
  std::vector<SeedResult> seeds;
  double aggregate = 0.0;  // mean test MAPE over selected seeds
  bool ok = false;
  std::string error;
};

struct ClassificationSeedResult {
  uint64_t seed = 0;
  double val_metric = 0.0;  // 1 - mean accuracy
  std::array<double, 3> test_acc{};
  int best_epoch = -1;
  bool selected = false;
};

struct ClassificationCell {
  std::string dataset;
  GnnLayerKind layer = GnnLayerKind::GCN;
  std::vector<ClassificationSeedResult> seeds;
  std::array<double, 3> aggregate_acc{};
  bool ok = false;
  std::string error;
};

struct ResultTable {
  std::vector<RegressionCell> regression;
  std::vector<ClassificationCell> classification;
};

/// Runs the full grid sequentially (the single-worker mode every determinism
/// guarantee is stated for). A failing cell is recorded, not fatal. When
/// `artifact_dir` is nonempty, per-seed training logs are written there.
ResultTable runExperiment(const ExperimentSpec &spec,
                          const std::vector<ExperimentDataset> &datasets,
                          const std::string &artifact_dir = "");

struct Report {
  std::string markdown;
  std::string csv;
};

/// Byte-stable rendering; best (lowest) MAPE per column is bolded in
/// markdown, best (highest) accuracy likewise.
Report renderReport(const ResultTable &table);

}  // namespace irperf

#endif  // IRPERF_HARNESS_HPP
