//===- strategies.cpp - Training loops and inference ----------------------===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "irperf/strategies.hpp"

#include <algorithm>
#include <cmath>

namespace irperf {

const char *strategyKindName(StrategyKind k) {
  switch (k) {
    case StrategyKind::OffTheShelf:
      return "off-the-shelf";
    case StrategyKind::KnowledgeRich:
      return "knowledge-rich";
    case StrategyKind::KnowledgeInfused:
      return "knowledge-infused";
  }
  throw Error("bad strategy kind");
}

StrategyKind strategyKindFromName(const std::string &name) {
  for (StrategyKind k :
       {StrategyKind::OffTheShelf, StrategyKind::KnowledgeRich,
        StrategyKind::KnowledgeInfused})
    if (name == strategyKindName(k)) return k;
  throw Error("unknown strategy: " + name);
}

const char *targetName(Target t) {
  switch (t) {
    case Target::Dsp:
      return "dsp";
    case Target::Lut:
      return "lut";
    case Target::Ff:
      return "ff";
    case Target::Cp:
      return "cp";
  }
  throw Error("bad target");
}

Target targetFromName(const std::string &name) {
  for (Target t : {Target::Dsp, Target::Lut, Target::Ff, Target::Cp})
    if (name == targetName(t)) return t;
  throw Error("unknown target: " + name);
}

// Resource counts are regressed in raw space: the model's graph readout for
// them is a sum of per-node head outputs, so the natural scale is the count
// itself and the relative-error loss keeps gradients scale-free. Only the
// clamp at zero is undone at inference.
double targetTransform(Target t, const GraphLabels &l) {
  switch (t) {
    case Target::Dsp:
      return static_cast<double>(l.dsp);
    case Target::Lut:
      return static_cast<double>(l.lut);
    case Target::Ff:
      return static_cast<double>(l.ff);
    case Target::Cp:
      return l.cp_ns;
  }
  throw Error("bad target");
}

double targetUntransform(Target t, double y) {
  if (t == Target::Cp) return y;
  return std::max(0.0, y);
}

namespace {

double rawTarget(Target t, const GraphLabels &l) {
  switch (t) {
    case Target::Dsp:
      return l.dsp;
    case Target::Lut:
      return l.lut;
    case Target::Ff:
      return l.ff;
    case Target::Cp:
      return l.cp_ns;
  }
  throw Error("bad target");
}

std::vector<const PackedGraph *> ptrs(const std::vector<PackedGraph> &v) {
  std::vector<const PackedGraph *> out;
  out.reserve(v.size());
  for (const PackedGraph &g : v) out.push_back(&g);
  return out;
}

struct ParamSnapshot {
  std::vector<Mat<float>> values;
};

ParamSnapshot snapshot(const std::vector<TensorF> &params) {
  ParamSnapshot s;
  for (const TensorF &p : params) s.values.push_back(p.value());
  return s;
}

void restore(std::vector<TensorF> &params, const ParamSnapshot &s) {
  for (size_t i = 0; i < params.size(); ++i) params[i].value() = s.values[i];
}

// Parameters that never touched the loss (for example relation weights whose
// relation is absent from the batch) receive no gradient from backward(). Give
// them an explicit zero gradient so the optimizer step still covers them.
void fillMissingGrads(std::vector<TensorF> &params) {
  for (TensorF &p : params)
    if (!p.hasGrad())
      TensorF::accum(*p.node(), Mat<float>::Zero(p.node()->value.rows(),
                                                 p.node()->value.cols()));
}

double mapeOf(const std::vector<double> &preds,
              const std::vector<double> &trues) {
  double acc = 0.0;
  for (size_t i = 0; i < preds.size(); ++i)
    acc += std::abs(preds[i] - trues[i]) / std::max(std::abs(trues[i]), 1.0);
  return acc / static_cast<double>(preds.size());
}

constexpr int kEvalBatch = 64;

// Evaluation-time predictions for one model over a graph list (raw scale).
std::vector<double> predictRaw(const GnnModel<float> &model, Target target,
                               const std::vector<const PackedGraph *> &graphs,
                               const GnnModel<float> *classifier) {
  std::vector<double> out;
  for (size_t at = 0; at < graphs.size(); at += kEvalBatch) {
    std::vector<const PackedGraph *> chunk(
        graphs.begin() + at,
        graphs.begin() + std::min(graphs.size(), at + kEvalBatch));
    Batch b = makeBatch(chunk);
    FlagOverride flags;
    const FlagOverride *fp = nullptr;
    if (classifier) {
      flags = predictFlags(*classifier, b);
      fp = &flags;
    }
    TensorF y = model.forwardGraph(b, nullptr, fp);
    for (int i = 0; i < b.num_graphs; ++i)
      out.push_back(targetUntransform(target, y.value()(i, 0)));
  }
  return out;
}

// Shared regression trainer; `mode` decides which knowledge features the
// embedder consumes (Flags => teacher forcing with ground-truth bits).
TrainedModel trainRegressor(const std::vector<PackedGraph> &train,
                            const std::vector<PackedGraph> &val,
                            GnnLayerKind layer, KnowledgeMode mode,
                            Target target, const TrainOptions &opts) {
  if (train.empty() || val.empty()) throw Error("trainRegressor: empty split");
  for (const PackedGraph &g : train)
    if (!g.has_graph_labels)
      throw Error("trainRegressor: unlabeled graph " + g.id);
  if (mode != KnowledgeMode::None)
    for (const PackedGraph &g : train)
      if (!g.has_node_labels)
        throw Error("training needs per-node oracle labels (graph " + g.id +
                    ")");

  GnnConfig cfg;
  cfg.layer = layer;
  cfg.knowledge = mode;
  // Resource counts accumulate over nodes, so their readout sums per-node
  // head outputs (size-equivariant); timing is a path property and reads out
  // of a mean-pooled state instead.
  if (target == Target::Cp) {
    cfg.pool = PoolMode::Mean;
    cfg.readout = ReadoutMode::PoolThenHead;
  } else {
    cfg.readout = ReadoutMode::HeadThenSum;
  }
  cfg.out_dim = 1;
  cfg.dropout = opts.dropout;
  cfg.pna_delta = computePnaDelta(ptrs(train));

  TrainedModel tm{GnnModel<float>::create(cfg, opts.seed), {}, 0.0, -1};
  std::vector<TensorF> params = tm.model.params();
  AdamState<float> adam;
  adam.lr = static_cast<float>(opts.lr);
  Rng shuffle_rng(opts.seed ^ 0x51e55ULL);
  Rng dropout_rng(opts.seed ^ 0xd0d0ULL);

  std::vector<double> val_true;
  for (const PackedGraph &g : val) val_true.push_back(rawTarget(target, g.labels));
  std::vector<const PackedGraph *> val_ptrs = ptrs(val);

  std::vector<int> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  ParamSnapshot best;

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    // Fisher-Yates with the run-local stream.
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    double loss_sum = 0.0;
    int batches = 0;
    for (size_t at = 0; at < order.size(); at += opts.batch_size) {
      std::vector<const PackedGraph *> chunk;
      for (size_t i = at; i < std::min(order.size(), at + opts.batch_size); ++i)
        chunk.push_back(&train[order[i]]);
      Batch b = makeBatch(chunk);
      Mat<float> t(b.num_graphs, 1), invd(b.num_graphs, 1);
      for (int i = 0; i < b.num_graphs; ++i) {
        double ty = targetTransform(target, b.labels[i]);
        t(i, 0) = static_cast<float>(ty);
        invd(i, 0) = static_cast<float>(1.0 / std::max(std::abs(ty), 1.0));
      }
      TensorF pred = tm.model.forwardGraph(b, &dropout_rng, nullptr);
      TensorF loss =
          mean(mul(abst(sub(pred, TensorF::leaf(t))), TensorF::leaf(invd)));
      backward(loss);
      fillMissingGrads(params);
      adamStep(params, adam);
      loss_sum += loss.value()(0, 0);
      ++batches;
    }
    std::vector<double> preds = predictRaw(tm.model, target, val_ptrs, nullptr);
    double vm = mapeOf(preds, val_true);
    tm.log.push_back({loss_sum / std::max(1, batches), vm});
    if (tm.best_epoch < 0 || vm < tm.best_val_metric) {
      tm.best_val_metric = vm;
      tm.best_epoch = epoch;
      best = snapshot(params);
    }
  }
  restore(params, best);
  return tm;
}

}  // namespace

TrainedModel trainOffTheShelf(const std::vector<PackedGraph> &train,
                              const std::vector<PackedGraph> &val,
                              GnnLayerKind layer, Target target,
                              const TrainOptions &opts) {
  return trainRegressor(train, val, layer, KnowledgeMode::None, target, opts);
}

TrainedModel trainKnowledgeRich(const std::vector<PackedGraph> &train,
                                const std::vector<PackedGraph> &val,
                                GnnLayerKind layer, Target target,
                                const TrainOptions &opts) {
  return trainRegressor(train, val, layer, KnowledgeMode::Counts, target, opts);
}

TrainedModel trainInfusedRegressor(const std::vector<PackedGraph> &train,
                                   const std::vector<PackedGraph> &val,
                                   GnnLayerKind layer, Target target,
                                   const TrainOptions &opts) {
  return trainRegressor(train, val, layer, KnowledgeMode::Flags, target, opts);
}

TrainedModel trainNodeClassifier(const std::vector<PackedGraph> &train,
                                 const std::vector<PackedGraph> &val,
                                 GnnLayerKind layer, const TrainOptions &opts) {
  if (train.empty() || val.empty())
    throw Error("trainNodeClassifier: empty split");
  for (const PackedGraph &g : train)
    if (!g.has_node_labels)
      throw Error("classifier training needs per-node labels (graph " + g.id +
                  ")");

  GnnConfig cfg;
  cfg.layer = layer;
  cfg.knowledge = KnowledgeMode::None;
  cfg.out_dim = 3;
  cfg.dropout = opts.dropout;
  cfg.pna_delta = computePnaDelta(ptrs(train));

  TrainedModel tm{GnnModel<float>::create(cfg, opts.seed), {}, 0.0, -1};
  std::vector<TensorF> params = tm.model.params();
  AdamState<float> adam;
  adam.lr = static_cast<float>(opts.lr);
  Rng shuffle_rng(opts.seed ^ 0x51e55ULL);
  Rng dropout_rng(opts.seed ^ 0xd0d0ULL);

  auto flagTargets = [](const Batch &b) {
    Mat<float> t(b.num_nodes, 3);
    for (int i = 0; i < b.num_nodes; ++i)
      for (int k = 0; k < 3; ++k)
        t(i, k) = b.flags[i][k] == 1 ? 1.0f : 0.0f;
    return t;
  };

  std::vector<const PackedGraph *> val_ptrs = ptrs(val);
  std::vector<int> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  ParamSnapshot best;

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    double loss_sum = 0.0;
    int batches = 0;
    for (size_t at = 0; at < order.size(); at += opts.batch_size) {
      std::vector<const PackedGraph *> chunk;
      for (size_t i = at; i < std::min(order.size(), at + opts.batch_size); ++i)
        chunk.push_back(&train[order[i]]);
      Batch b = makeBatch(chunk);
      TensorF logits = tm.model.forwardNodes(b, &dropout_rng);
      TensorF loss = mean(sigmoidCrossEntropy(logits, flagTargets(b)));
      backward(loss);
      fillMissingGrads(params);
      adamStep(params, adam);
      loss_sum += loss.value()(0, 0);
      ++batches;
    }
    // Validation: mean per-node accuracy over the three resources.
    long correct = 0, total = 0;
    for (size_t at = 0; at < val_ptrs.size(); at += kEvalBatch) {
      std::vector<const PackedGraph *> chunk(
          val_ptrs.begin() + at,
          val_ptrs.begin() + std::min(val_ptrs.size(), at + kEvalBatch));
      Batch b = makeBatch(chunk);
      TensorF logits = tm.model.forwardNodes(b, nullptr);
      for (int i = 0; i < b.num_nodes; ++i)
        for (int k = 0; k < 3; ++k) {
          bool pred = logits.value()(i, k) >= 0.0f;  // sigmoid(x) >= 0.5
          bool truth = b.flags[i][k] == 1;
          correct += pred == truth ? 1 : 0;
          ++total;
        }
    }
    double vm = 1.0 - static_cast<double>(correct) / static_cast<double>(total);
    tm.log.push_back({loss_sum / std::max(1, batches), vm});
    if (tm.best_epoch < 0 || vm < tm.best_val_metric) {
      tm.best_val_metric = vm;
      tm.best_epoch = epoch;
      best = snapshot(params);
    }
  }
  restore(params, best);
  return tm;
}

FlagOverride predictFlags(const GnnModel<float> &classifier, const Batch &b) {
  TensorF logits = classifier.forwardNodes(b, nullptr);
  FlagOverride out(b.num_nodes);
  for (int i = 0; i < b.num_nodes; ++i)
    for (int k = 0; k < 3; ++k)
      out[i][k] = logits.value()(i, k) >= 0.0f ? 1 : 0;  // p >= 0.5
  return out;
}

std::vector<double> predictTarget(const GnnModel<float> &regressor,
                                  Target target,
                                  const std::vector<PackedGraph> &graphs,
                                  const GnnModel<float> *classifier) {
  return predictRaw(regressor, target, ptrs(graphs), classifier);
}

PredictedLabels infer(const StrategyModel &model, const IrGraph &graph) {
  PackedGraph pg = packGraph(graph);
  if (model.kind == StrategyKind::KnowledgeRich && !pg.has_node_labels)
    throw Error(
        "knowledge-rich inference needs per-node resource counts; graph '" +
        graph.id + "' lacks them");
  Batch b = makeBatch({&pg});
  FlagOverride flags;
  const FlagOverride *fp = nullptr;
  if (model.kind == StrategyKind::KnowledgeInfused) {
    if (!model.classifier)
      throw Error("knowledge-infused model lacks its classifier stage");
    flags = predictFlags(*model.classifier, b);
    fp = &flags;
  }
  PredictedLabels out;
  for (int t = 0; t < kNumTargets; ++t) {
    double y = targetUntransform(
        static_cast<Target>(t),
        model.regressors[t].forwardGraph(b, nullptr, fp).value()(0, 0));
    switch (static_cast<Target>(t)) {
      case Target::Dsp:
        out.dsp = static_cast<int>(std::llround(std::max(0.0, y)));
        break;
      case Target::Lut:
        out.lut = static_cast<int>(std::llround(std::max(0.0, y)));
        break;
      case Target::Ff:
        out.ff = static_cast<int>(std::llround(std::max(0.0, y)));
        break;
      case Target::Cp:
        out.cp_ns = y;
        break;
    }
  }
  return out;
}

}  // namespace irperf
