//===- harness.cpp - Experiment orchestration and reporting ---------------===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "irperf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "irperf/rng.hpp"

namespace irperf {

std::array<std::vector<int>, 3> splitIndices(int n, const SplitFractions &f,
                                             uint64_t seed) {
  if (f.train < 0 || f.val < 0 || f.test < 0 ||
      std::abs(f.train + f.val + f.test - 1.0) > 1e-9)
    throw Error("split fractions must be nonnegative and sum to 1");
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.below(i)]);
  int n_train = static_cast<int>(std::llround(n * f.train));
  int n_val = static_cast<int>(std::llround(n * f.val));
  if (n > 0 && (n_train <= 0 || n_val <= 0 || n_train + n_val >= n))
    throw Error("split of " + std::to_string(n) +
                " graphs leaves an empty part");
  std::array<std::vector<int>, 3> out;
  out[0].assign(order.begin(), order.begin() + n_train);
  out[1].assign(order.begin() + n_train, order.begin() + n_train + n_val);
  out[2].assign(order.begin() + n_train + n_val, order.end());
  return out;
}

SplitResult split(const std::vector<PackedGraph> &dataset,
                  const SplitFractions &f, uint64_t seed) {
  auto idx = splitIndices(static_cast<int>(dataset.size()), f, seed);
  SplitResult r;
  for (int i : idx[0]) r.train.push_back(dataset[i]);
  for (int i : idx[1]) r.val.push_back(dataset[i]);
  for (int i : idx[2]) r.test.push_back(dataset[i]);
  return r;
}

double mape(const std::vector<double> &preds,
            const std::vector<double> &trues) {
  if (preds.empty()) throw Error("mape: empty input");
  if (preds.size() != trues.size()) throw Error("mape: length mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < preds.size(); ++i)
    acc += std::abs(preds[i] - trues[i]) / std::max(std::abs(trues[i]), 1.0);
  return acc / static_cast<double>(preds.size());
}

std::array<double, 3> accuracy(const std::vector<std::array<int, 3>> &preds,
                               const std::vector<std::array<int, 3>> &trues) {
  if (preds.empty()) throw Error("accuracy: empty input");
  if (preds.size() != trues.size()) throw Error("accuracy: length mismatch");
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k) {
    long correct = 0;
    for (size_t i = 0; i < preds.size(); ++i)
      correct += preds[i][k] == trues[i][k] ? 1 : 0;
    out[k] = static_cast<double>(correct) / static_cast<double>(preds.size());
  }
  return out;
}

std::array<double, 3> classifierAccuracy(
    const GnnModel<float> &classifier,
    const std::vector<PackedGraph> &graphs) {
  std::vector<std::array<int, 3>> pred, truth;
  constexpr int kChunk = 64;
  for (size_t at = 0; at < graphs.size(); at += kChunk) {
    std::vector<const PackedGraph *> chunk;
    for (size_t i = at; i < std::min(graphs.size(), at + kChunk); ++i)
      chunk.push_back(&graphs[i]);
    Batch b = makeBatch(chunk);
    FlagOverride p = predictFlags(classifier, b);
    for (int i = 0; i < b.num_nodes; ++i) {
      pred.push_back(p[i]);
      std::array<int, 3> t;
      for (int k = 0; k < 3; ++k) t[k] = b.flags[i][k] == 1 ? 1 : 0;
      truth.push_back(t);
    }
  }
  return accuracy(pred, truth);
}

void validateSpec(const ExperimentSpec &spec) {
  if (spec.strategies.empty() || spec.layers.empty() || spec.targets.empty())
    throw Error("experiment spec: strategies, layers and targets must be "
                "nonempty");
  if (spec.seeds.empty()) throw Error("experiment spec: no seeds");
  std::set<uint64_t> uniq(spec.seeds.begin(), spec.seeds.end());
  if (uniq.size() != spec.seeds.size())
    throw Error("experiment spec: seeds must be distinct");
  if (spec.epochs <= 0) throw Error("experiment spec: epochs must be positive");
  if (spec.select_count <= 0)
    throw Error("experiment spec: select_count must be positive");
  if (spec.select_count > static_cast<int>(spec.seeds.size()))
    throw Error("experiment spec: select_count exceeds the number of seeds");
  if (std::abs(spec.fractions.train + spec.fractions.val +
               spec.fractions.test - 1.0) > 1e-9)
    throw Error("experiment spec: fractions must sum to 1");
}

namespace {

std::string cellStem(const std::string &dataset, const std::string &strategy,
                     GnnLayerKind layer, const std::string &target) {
  std::string s = dataset + "_" + strategy + "_" + layerKindName(layer);
  if (!target.empty()) s += "_" + target;
  return s;
}

void writeLog(const std::string &dir, const std::string &stem, uint64_t seed,
              const std::vector<EpochLog> &log, double test_metric) {
  if (dir.empty()) return;
  std::ofstream out(dir + "/" + stem + "_seed" + std::to_string(seed) +
                    ".log");
  out << std::setprecision(9);
  for (size_t e = 0; e < log.size(); ++e)
    out << e << ' ' << log[e].train_loss << ' ' << log[e].val_metric << '\n';
  out << "test " << test_metric << '\n';
}

// Marks the `count` entries with least val_metric (ties: smaller seed wins)
// and returns their positions.
template <typename SeedRow>
std::vector<size_t> selectSeeds(std::vector<SeedRow> &rows, int count) {
  std::vector<size_t> idx(rows.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    if (rows[a].val_metric != rows[b].val_metric)
      return rows[a].val_metric < rows[b].val_metric;
    return rows[a].seed < rows[b].seed;
  });
  idx.resize(std::min<size_t>(idx.size(), count));
  for (size_t i : idx) rows[i].selected = true;
  return idx;
}

}  // namespace

ResultTable runExperiment(const ExperimentSpec &spec,
                          const std::vector<ExperimentDataset> &datasets,
                          const std::string &artifact_dir) {
  validateSpec(spec);
  bool infused = std::count(spec.strategies.begin(), spec.strategies.end(),
                            StrategyKind::KnowledgeInfused) > 0;
  ResultTable table;

  for (const ExperimentDataset &ds : datasets) {
    SplitResult sp = split(ds.graphs, spec.fractions, spec.split_seed);
    for (GnnLayerKind layer : spec.layers) {
      // One classifier per seed; shared by the accuracy table and by every
      // knowledge-infused regression cell of this (dataset, layer).
      std::map<uint64_t, TrainedModel> classifiers;
      ClassificationCell cls;
      cls.dataset = ds.name;
      cls.layer = layer;
      if (spec.classification || infused) {
        try {
          for (uint64_t seed : spec.seeds) {
            TrainOptions opts{seed, spec.epochs, spec.lr, spec.batch_size,
                              spec.dropout};
            TrainedModel tm =
                trainNodeClassifier(sp.train, sp.val, layer, opts);
            ClassificationSeedResult row;
            row.seed = seed;
            row.val_metric = tm.best_val_metric;
            row.best_epoch = tm.best_epoch;
            row.test_acc = classifierAccuracy(tm.model, sp.test);
            cls.seeds.push_back(row);
            writeLog(artifact_dir, cellStem(ds.name, "classifier", layer, ""),
                     seed, tm.log,
                     (row.test_acc[0] + row.test_acc[1] + row.test_acc[2]) / 3);
            classifiers.emplace(seed, std::move(tm));
          }
          std::vector<size_t> sel = selectSeeds(cls.seeds, spec.select_count);
          for (size_t i : sel)
            for (int k = 0; k < 3; ++k)
              cls.aggregate_acc[k] +=
                  cls.seeds[i].test_acc[k] / static_cast<double>(sel.size());
          cls.ok = true;
        } catch (const Error &e) {
          cls.error = e.what();
        }
        if (spec.classification) table.classification.push_back(cls);
      }

      for (StrategyKind strategy : spec.strategies) {
        for (Target target : spec.targets) {
          RegressionCell cell;
          cell.dataset = ds.name;
          cell.strategy = strategy;
          cell.layer = layer;
          cell.target = target;
          try {
            if (strategy == StrategyKind::KnowledgeInfused && !cls.error.empty())
              throw Error("classifier stage failed: " + cls.error);
            std::vector<double> test_true;
            for (const PackedGraph &g : sp.test) {
              GraphLabels l = g.labels;
              test_true.push_back(target == Target::Dsp   ? l.dsp
                                  : target == Target::Lut ? l.lut
                                  : target == Target::Ff  ? l.ff
                                                          : l.cp_ns);
            }
            for (uint64_t seed : spec.seeds) {
              TrainOptions opts{seed, spec.epochs, spec.lr, spec.batch_size,
                                spec.dropout};
              TrainedModel tm =
                  strategy == StrategyKind::OffTheShelf
                      ? trainOffTheShelf(sp.train, sp.val, layer, target, opts)
                  : strategy == StrategyKind::KnowledgeRich
                      ? trainKnowledgeRich(sp.train, sp.val, layer, target,
                                           opts)
                      : trainInfusedRegressor(sp.train, sp.val, layer, target,
                                              opts);
              const GnnModel<float> *cls_model =
                  strategy == StrategyKind::KnowledgeInfused
                      ? &classifiers.at(seed).model
                      : nullptr;
              std::vector<double> preds =
                  predictTarget(tm.model, target, sp.test, cls_model);
              SeedResult row;
              row.seed = seed;
              row.val_metric = tm.best_val_metric;
              row.best_epoch = tm.best_epoch;
              row.test_metric = mape(preds, test_true);
              cell.seeds.push_back(row);
              writeLog(artifact_dir,
                       cellStem(ds.name, strategyKindName(strategy), layer,
                                targetName(target)),
                       seed, tm.log, row.test_metric);
            }
            std::vector<size_t> sel =
                selectSeeds(cell.seeds, spec.select_count);
            for (size_t i : sel)
              cell.aggregate +=
                  cell.seeds[i].test_metric / static_cast<double>(sel.size());
            cell.ok = true;
          } catch (const Error &e) {
            cell.error = e.what();
          }
          table.regression.push_back(cell);
        }
      }
    }
  }
  return table;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

}  // namespace

Report renderReport(const ResultTable &table) {
  std::ostringstream md, csv;
  md << "# irperf experiment report\n";
  csv << "table,dataset,strategy,layer,target,seed,val_metric,test_metric,"
         "best_epoch,selected\n";

  // Regression: one markdown table per dataset, rows strategy x layer,
  // columns targets.
  std::vector<std::string> ds_names;
  for (const RegressionCell &c : table.regression)
    if (std::count(ds_names.begin(), ds_names.end(), c.dataset) == 0)
      ds_names.push_back(c.dataset);
  for (const std::string &ds : ds_names) {
    std::vector<Target> targets;
    std::vector<std::pair<StrategyKind, GnnLayerKind>> rows;
    for (const RegressionCell &c : table.regression) {
      if (c.dataset != ds) continue;
      if (std::count(targets.begin(), targets.end(), c.target) == 0)
        targets.push_back(c.target);
      std::pair<StrategyKind, GnnLayerKind> key{c.strategy, c.layer};
      if (std::count(rows.begin(), rows.end(), key) == 0) rows.push_back(key);
    }
    auto cellOf = [&](StrategyKind s, GnnLayerKind l,
                      Target t) -> const RegressionCell * {
      for (const RegressionCell &c : table.regression)
        if (c.dataset == ds && c.strategy == s && c.layer == l && c.target == t)
          return &c;
      return nullptr;
    };
    md << "\n## Graph-level regression MAPE: " << ds << "\n\n";
    md << "| strategy | layer |";
    for (Target t : targets) md << ' ' << targetName(t) << " |";
    md << "\n|---|---|";
    for (size_t i = 0; i < targets.size(); ++i) md << "---|";
    md << '\n';
    std::map<Target, double> best;
    for (Target t : targets)
      for (auto [s, l] : rows)
        if (const RegressionCell *c = cellOf(s, l, t); c && c->ok)
          if (!best.count(t) || c->aggregate < best[t]) best[t] = c->aggregate;
    for (auto [s, l] : rows) {
      md << "| " << strategyKindName(s) << " | " << layerKindName(l) << " |";
      for (Target t : targets) {
        const RegressionCell *c = cellOf(s, l, t);
        if (!c)
          md << " - |";
        else if (!c->ok)
          md << " failed |";
        else if (best.count(t) && c->aggregate == best[t])
          md << " **" << fmt(c->aggregate) << "** |";
        else
          md << ' ' << fmt(c->aggregate) << " |";
      }
      md << '\n';
    }
  }
  for (const RegressionCell &c : table.regression) {
    std::string prefix = std::string("regression,") + c.dataset + ',' +
                         strategyKindName(c.strategy) + ',' +
                         layerKindName(c.layer) + ',' + targetName(c.target);
    if (!c.ok) {
      csv << prefix << ",,,,,"
          << "failed\n";
      continue;
    }
    for (const SeedResult &r : c.seeds)
      csv << prefix << ',' << r.seed << ',' << fmt(r.val_metric) << ','
          << fmt(r.test_metric) << ',' << r.best_epoch << ','
          << (r.selected ? 1 : 0) << '\n';
    csv << prefix << ",aggregate,," << fmt(c.aggregate) << ",,\n";
  }

  if (!table.classification.empty()) {
    md << "\n## Node-level classification accuracy\n\n"
       << "| dataset | layer | dsp | lut | ff |\n|---|---|---|---|---|\n";
    std::array<double, 3> best{0, 0, 0};
    for (const ClassificationCell &c : table.classification)
      if (c.ok)
        for (int k = 0; k < 3; ++k)
          best[k] = std::max(best[k], c.aggregate_acc[k]);
    for (const ClassificationCell &c : table.classification) {
      md << "| " << c.dataset << " | " << layerKindName(c.layer) << " |";
      if (!c.ok) {
        md << " failed | failed | failed |\n";
        continue;
      }
      for (int k = 0; k < 3; ++k) {
        if (c.aggregate_acc[k] == best[k])
          md << " **" << fmt(c.aggregate_acc[k]) << "** |";
        else
          md << ' ' << fmt(c.aggregate_acc[k]) << " |";
      }
      md << '\n';
    }
    for (const ClassificationCell &c : table.classification) {
      std::string prefix = std::string("classification,") + c.dataset +
                           ",classifier," + layerKindName(c.layer);
      if (!c.ok) {
        csv << prefix << ",,,,,,failed\n";
        continue;
      }
      static const char *res[3] = {"dsp", "lut", "ff"};
      for (const ClassificationSeedResult &r : c.seeds)
        for (int k = 0; k < 3; ++k)
          csv << prefix << ',' << res[k] << ',' << r.seed << ','
              << fmt(r.val_metric) << ',' << fmt(r.test_acc[k]) << ','
              << r.best_epoch << ',' << (r.selected ? 1 : 0) << '\n';
      for (int k = 0; k < 3; ++k)
        csv << prefix << ',' << res[k] << ",aggregate,,"
            << fmt(c.aggregate_acc[k]) << ",,\n";
    }
  }
  return {md.str(), csv.str()};
}

}  // namespace irperf
