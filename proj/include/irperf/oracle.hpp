//===- oracle.hpp - Surrogate cost model for resources and timing -*- C++ -*-===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Deterministic per-node resource/delay rule book plus graph-level
// aggregation. Stands in for a synthesis flow as the ground-truth labeler;
// the rule table is documented in docs/cost_rules.md and overridable from a
// key-value file for ablations.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "irperf/graph.hpp"

namespace irperf {

struct CostEntry {
  int dsp = 0;
  int lut = 0;
  int ff = 0;
  double delay_ns = 0.0;
};

struct CostRules {
  double alpha_lut = 0.5;  // per-edge LUT sharing overhead
  double beta_ff = 0.25;   // pipeline-register coupling coefficient
  int dsp_bitwidth_threshold = 10;
  std::vector<double> delay_override;  // per-opcode, <0 = use default

  CostRules();

  /// Per-opcode delay in ns (0 for non-operation pseudo opcodes).
  double delay(Opcode op) const;

  /// Full rule evaluation for one (opcode, bitwidth) pair. A misc bitwidth
  /// counts as 0.
  CostEntry eval(Opcode op, int bitwidth) const;
};

CostRules defaultRules();

/// Key-value override file: `alpha_lut`, `beta_ff`, `dsp_bitwidth_threshold`,
/// and `delay.<opcode>` entries. Throws Error on unknown keys.
CostRules loadRules(const std::string &path);

/// Per-node ground truth; flags derive from counts.
NodeResourceLabel labelNode(const NodeFeatures &features,
                            const CostRules &rules);

/// Longest weighted path over non-back edges with per-node delays. Returns
/// (total delay, witness node path); ties prefer the smaller node-id
/// sequence. Throws Error on cycles after back-edge removal.
std::pair<double, std::vector<int>> criticalPath(
    const IrGraph &g, const std::vector<double> &delays);

/// Graph totals: dsp is a plain sum; lut and ff add structural coupling terms
/// (edge count, path depth x widest operation); cp is the critical path.
GraphLabels labelGraph(const IrGraph &g, const CostRules &rules);

/// Copy of `g` with every node labeled and graph labels attached.
IrGraph labelAll(const IrGraph &g, const CostRules &rules);

}  // namespace irperf
