//===- io.hpp - JSONL datasets, checkpoints, config files -------*- C++ -*-===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// All serialization: line-delimited JSON graph records, binary model
// checkpoints (exact float32 round-trip), and plain-text key=value
// configuration for generator profiles and experiment specs.
//
//===----------------------------------------------------------------------===//

#ifndef IRPERF_IO_HPP
#define IRPERF_IO_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "irperf/harness.hpp"
#include "irperf/strategies.hpp"
#include "irperf/synthgen.hpp"

namespace irperf {

/// One graph per line; loads back to an IrGraph passing validate and
/// comparing equal to the original.
std::string graphToJsonLine(const IrGraph &g);
IrGraph graphFromJsonLine(const std::string &line);

void writeGraphsJsonl(const std::string &path,
                      const std::vector<IrGraph> &graphs);
std::vector<IrGraph> readGraphsJsonl(const std::string &path);

/// FNV-1a hash of the feature schema (category table sizes, hidden width,
/// layer count). A checkpoint written under a different schema is rejected.
uint64_t featureSchemaHash();

inline constexpr uint32_t kCheckpointVersion = 1;

struct CheckpointInfo {
  StrategyKind strategy = StrategyKind::OffTheShelf;
  GnnLayerKind layer = GnnLayerKind::GCN;
  std::string target = "all";  // "all" or one of dsp/lut/ff/cp
  uint64_t seed = 0;
};

/// A saved model bundle: any subset of the four target regressors plus, for
/// knowledge-infused strategies, the classifier stage.
struct Checkpoint {
  CheckpointInfo info;
  std::array<std::optional<GnnModel<float>>, kNumTargets> regressors;
  std::array<int, kNumTargets> best_epochs{-1, -1, -1, -1};
  std::optional<GnnModel<float>> classifier;
  int classifier_best_epoch = -1;

  /// Throws unless all four regressors (and, for knowledge-infused, the
  /// classifier) are present.
  StrategyModel toStrategyModel() const;
};

/// Binary format: header, then per model a config block and length-prefixed
/// named little-endian float32 arrays. Bitwise round-trip.
void saveCheckpoint(const std::string &path, const Checkpoint &ckpt);
Checkpoint loadCheckpoint(const std::string &path);

/// key=value files; '#' comments. Unknown keys are errors.
GenProfile loadGenProfile(const std::string &path);
ExperimentSpec loadExperimentSpec(const std::string &path);

}  // namespace irperf

#endif  // IRPERF_IO_HPP
