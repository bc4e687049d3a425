//===- oracle.cpp - Surrogate cost model ----------------------------------===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "irperf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace irperf {

namespace {

int ceilDiv(int a, int b) { return (a + b - 1) / b; }

double defaultDelay(Opcode op) {
  switch (op) {
    case Opcode::Mul:
      return 3.2;
    case Opcode::SDiv:
    case Opcode::UDiv:
      return 8.5;
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::GetElementPtr:
      return 1.2;
    case Opcode::And:
    case Opcode::Or:
    case Opcode::Xor:
    case Opcode::Shl:
    case Opcode::LShr:
    case Opcode::PartSelect:
      return 0.6;
    case Opcode::Load:
    case Opcode::Store:
      return 2.0;
    case Opcode::Mux:
    case Opcode::Phi:
    case Opcode::ICmp:
      return 0.9;
    case Opcode::ZExt:
    case Opcode::Trunc:
      return 0.3;
    case Opcode::Br:
    case Opcode::Ret:
      return 0.1;
    case Opcode::Const:
    case Opcode::Param:
    case Opcode::Block:
      return 0.0;
  }
  throw Error("unmapped opcode delay");
}

}  // namespace

CostRules::CostRules() : delay_override(kNumOpcodes, -1.0) {}

double CostRules::delay(Opcode op) const {
  double o = delay_override[static_cast<int>(op)];
  return o >= 0.0 ? o : defaultDelay(op);
}

CostEntry CostRules::eval(Opcode op, int bitwidth) const {
  int bw = bitwidth == kBitwidthMisc ? 0 : bitwidth;
  CostEntry e;
  e.delay_ns = delay(op);
  switch (op) {
    case Opcode::Mul:
      if (bw > dsp_bitwidth_threshold) {
        e.dsp = ceilDiv(bw, 18);
        e.lut = bw;  // wide multiplies still spend glue LUTs
      } else {
        e.lut = 2 * bw;
      }
      break;
    case Opcode::SDiv:
    case Opcode::UDiv:
      e.lut = 8 * bw;
      if (bw >= 32) e.dsp = 1;
      break;
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::ICmp:
    case Opcode::And:
    case Opcode::Or:
    case Opcode::Xor:
    case Opcode::Shl:
    case Opcode::LShr:
    case Opcode::GetElementPtr:
      e.lut = bw;
      break;
    case Opcode::Load:
    case Opcode::Store:
      e.ff = bw;
      e.lut = 4;
      break;
    case Opcode::Mux:
    case Opcode::Phi:
      e.lut = bw;
      e.ff = ceilDiv(bw, 2);
      break;
    case Opcode::PartSelect:
    case Opcode::ZExt:
    case Opcode::Trunc:
      e.ff = ceilDiv(bw, 4);
      break;
    case Opcode::Br:
    case Opcode::Ret:
    case Opcode::Const:
    case Opcode::Param:
    case Opcode::Block:
      break;
  }
  return e;
}

CostRules defaultRules() { return CostRules(); }

CostRules loadRules(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open rules file: " + path);
  CostRules r;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string eq;
    double value;
    if (!(ls >> eq >> value) || eq != "=")
      throw Error(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    if (key == "alpha_lut")
      r.alpha_lut = value;
    else if (key == "beta_ff")
      r.beta_ff = value;
    else if (key == "dsp_bitwidth_threshold")
      r.dsp_bitwidth_threshold = static_cast<int>(value);
    else if (key.rfind("delay.", 0) == 0)
      r.delay_override[static_cast<int>(opcodeFromName(key.substr(6)))] = value;
    else
      throw Error(path + ":" + std::to_string(lineno) + ": unknown key '" +
                  key + "'");
  }
  return r;
}

NodeResourceLabel labelNode(const NodeFeatures &features,
                            const CostRules &rules) {
  CostEntry e = rules.eval(features.opcode, features.bitwidth);
  NodeResourceLabel l;
  l.dsp_count = e.dsp;
  l.lut_count = e.lut;
  l.ff_count = e.ff;
  l.uses_dsp = e.dsp > 0;
  l.uses_lut = e.lut > 0;
  l.uses_ff = e.ff > 0;
  return l;
}

std::pair<double, std::vector<int>> criticalPath(
    const IrGraph &g, const std::vector<double> &delays) {
  if (delays.size() != g.nodes.size())
    throw Error("criticalPath: delay count mismatch");
  std::vector<int> order = topologicalOrder(g);
  const int n = static_cast<int>(g.nodes.size());
  std::vector<std::vector<int>> preds(n);
  for (const IrEdge &e : g.edges)
    if (!e.attr.is_back_edge) preds[e.dst].push_back(e.src);

  std::vector<double> best(n, 0.0);
  std::vector<int> from(n, -1);
  for (int v : order) {
    best[v] = delays[v];
    for (int u : preds[v]) {
      double cand = best[u] + delays[v];
      if (cand > best[v] ||
          (cand == best[v] && from[v] >= 0 && g.nodes[u].id < g.nodes[from[v]].id)) {
        best[v] = cand;
        from[v] = u;
      }
    }
  }
  int sink = -1;
  for (int v = 0; v < n; ++v) {
    if (sink < 0 || best[v] > best[sink] ||
        (best[v] == best[sink] && g.nodes[v].id < g.nodes[sink].id))
      sink = v;
  }
  std::vector<int> path;
  if (sink >= 0)
    for (int v = sink; v >= 0; v = from[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return {sink >= 0 ? best[sink] : 0.0, path};
}

namespace {

// Longest path by node count over non-back edges; monotone under insertions.
int hopDepth(const IrGraph &g) {
  std::vector<int> order = topologicalOrder(g);
  const int n = static_cast<int>(g.nodes.size());
  std::vector<std::vector<int>> preds(n);
  for (const IrEdge &e : g.edges)
    if (!e.attr.is_back_edge) preds[e.dst].push_back(e.src);
  std::vector<int> depth(n, 0);
  int best = 0;
  for (int v : order) {
    depth[v] = 1;
    for (int u : preds[v]) depth[v] = std::max(depth[v], depth[u] + 1);
    best = std::max(best, depth[v]);
  }
  return best;
}

}  // namespace

GraphLabels labelGraph(const IrGraph &g, const CostRules &rules) {
  long dsp = 0, lut = 0, ff = 0;
  int max_op_bw = 0;
  std::vector<double> delays(g.nodes.size(), 0.0);
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const NodeFeatures &f = g.nodes[i].features;
    CostEntry e = rules.eval(f.opcode, f.bitwidth);
    dsp += e.dsp;
    lut += e.lut;
    ff += e.ff;
    if (f.node_type == NodeType::Operation) {
      delays[i] = e.delay_ns;
      if (f.bitwidth != kBitwidthMisc) max_op_bw = std::max(max_op_bw, f.bitwidth);
    }
  }
  auto [cp, path] = criticalPath(g, delays);
  GraphLabels labels;
  labels.dsp = static_cast<int>(dsp);
  labels.lut = static_cast<int>(
      std::llround(static_cast<double>(lut) +
                   rules.alpha_lut * static_cast<double>(g.edges.size())));
  labels.ff = static_cast<int>(std::llround(
      static_cast<double>(ff) +
      rules.beta_ff * static_cast<double>(hopDepth(g)) * max_op_bw));
  labels.cp_ns = cp;
  return labels;
}

IrGraph labelAll(const IrGraph &g, const CostRules &rules) {
  IrGraph out = g;
  for (IrNode &node : out.nodes) node.label = labelNode(node.features, rules);
  out.labels = labelGraph(out, rules);
  return out;
}

}  // namespace irperf
