//===- strategies.hpp - The three prediction pipelines ----------*- C++ -*-===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Off-the-shelf: regress straight from bare graph features.
// Knowledge-rich: additionally embed ground-truth per-node resource counts.
// Knowledge-infused: two stages; a node classifier predicts per-node resource
// type bits, regressors consume graph + bits (trained with true bits).
//
//===----------------------------------------------------------------------===//

#pragma once

#include <array>
#include <optional>
#include <vector>

#include "irperf/gnn.hpp"

namespace irperf {

enum class StrategyKind : int { OffTheShelf = 0, KnowledgeRich, KnowledgeInfused };
enum class Target : int { Dsp = 0, Lut, Ff, Cp };
inline constexpr int kNumTargets = 4;

const char *strategyKindName(StrategyKind k);
StrategyKind strategyKindFromName(const std::string &name);
const char *targetName(Target t);
Target targetFromName(const std::string &name);

/// Regression targets train on log1p scale for resource counts and raw
/// nanoseconds for cp; predictions are mapped back before MAPE.
double targetTransform(Target t, const GraphLabels &labels);
double targetUntransform(Target t, double model_output);

struct TrainOptions {
  uint64_t seed = 0;
  int epochs = 100;
  double lr = 1e-3;
  int batch_size = 32;
  double dropout = 0.1;
};

struct EpochLog {
  double train_loss = 0.0;
  double val_metric = 0.0;  // MAPE for regression, 1 - mean accuracy for
                            // classification; lower is better
};

struct TrainedModel {
  GnnModel<float> model;
  std::vector<EpochLog> log;
  double best_val_metric = 0.0;
  int best_epoch = -1;
};

TrainedModel trainOffTheShelf(const std::vector<PackedGraph> &train,
                              const std::vector<PackedGraph> &val,
                              GnnLayerKind layer, Target target,
                              const TrainOptions &opts);

TrainedModel trainKnowledgeRich(const std::vector<PackedGraph> &train,
                                const std::vector<PackedGraph> &val,
                                GnnLayerKind layer, Target target,
                                const TrainOptions &opts);

TrainedModel trainNodeClassifier(const std::vector<PackedGraph> &train,
                                 const std::vector<PackedGraph> &val,
                                 GnnLayerKind layer, const TrainOptions &opts);

TrainedModel trainInfusedRegressor(const std::vector<PackedGraph> &train,
                                   const std::vector<PackedGraph> &val,
                                   GnnLayerKind layer, Target target,
                                   const TrainOptions &opts);

struct PredictedLabels {
  int dsp = 0;
  int lut = 0;
  int ff = 0;
  double cp_ns = 0.0;
};

struct StrategyModel {
  StrategyKind kind = StrategyKind::OffTheShelf;
  GnnLayerKind layer = GnnLayerKind::GCN;
  std::array<GnnModel<float>, kNumTargets> regressors;  // dsp, lut, ff, cp
  std::optional<GnnModel<float>> classifier;            // KnowledgeInfused only
};

/// Per-node resource-type bits from the classifier, thresholded at 0.5.
FlagOverride predictFlags(const GnnModel<float> &classifier, const Batch &batch);

/// Full four-target prediction for one graph. KnowledgeRich requires
/// oracle-labeled nodes and throws on bare graphs; the other two kinds never
/// read label fields.
PredictedLabels infer(const StrategyModel &model, const IrGraph &graph);

/// Single-target prediction over many graphs (evaluation path, no dropout).
/// `classifier` non-null selects the knowledge-infused two-step chain.
std::vector<double> predictTarget(const GnnModel<float> &regressor,
                                  Target target,
                                  const std::vector<PackedGraph> &graphs,
                                  const GnnModel<float> *classifier);

}  // namespace irperf
