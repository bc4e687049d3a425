//===- graph.cpp - IR graph validation and topological order --------------===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "irperf/graph.hpp"

#include <algorithm>
#include <queue>
#include <unordered_map>
#include <unordered_set>

namespace irperf {

namespace {

const char *const kOpcodeNames[kNumOpcodes] = {
    "load", "store", "add",  "sub",  "mul",        "sdiv", "udiv", "and",
    "or",   "xor",   "shl",  "lshr", "icmp",       "mux",  "phi",  "br",
    "ret",  "partselect", "zext", "trunc", "getelementptr", "const", "param",
    "block"};

const char *const kOpcodeTypeNames[kNumOpcodeTypes] = {
    "binary_unary", "bitwise", "memory", "control", "cast", "misc"};

const char *const kNodeTypeNames[kNumNodeTypes] = {"operation", "block", "port",
                                                   "misc"};

}  // namespace

const char *opcodeName(Opcode op) { return kOpcodeNames[static_cast<int>(op)]; }
const char *opcodeTypeName(OpcodeType t) {
  return kOpcodeTypeNames[static_cast<int>(t)];
}
const char *nodeTypeName(NodeType t) {
  return kNodeTypeNames[static_cast<int>(t)];
}
const char *graphKindName(GraphKind k) {
  return k == GraphKind::DFG ? "dfg" : "cdfg";
}

Opcode opcodeFromName(const std::string &name) {
  for (int i = 0; i < kNumOpcodes; ++i)
    if (name == kOpcodeNames[i]) return static_cast<Opcode>(i);
  throw Error("unknown opcode: " + name);
}

OpcodeType opcodeTypeFromName(const std::string &name) {
  for (int i = 0; i < kNumOpcodeTypes; ++i)
    if (name == kOpcodeTypeNames[i]) return static_cast<OpcodeType>(i);
  throw Error("unknown opcode type: " + name);
}

NodeType nodeTypeFromName(const std::string &name) {
  for (int i = 0; i < kNumNodeTypes; ++i)
    if (name == kNodeTypeNames[i]) return static_cast<NodeType>(i);
  throw Error("unknown node type: " + name);
}

GraphKind graphKindFromName(const std::string &name) {
  if (name == "dfg" || name == "DFG") return GraphKind::DFG;
  if (name == "cdfg" || name == "CDFG") return GraphKind::CDFG;
  throw Error("unknown graph kind: " + name);
}

OpcodeType opcodeCategory(Opcode op) {
  switch (op) {
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::SDiv:
    case Opcode::UDiv:
    case Opcode::ICmp:
      return OpcodeType::BinaryUnary;
    case Opcode::And:
    case Opcode::Or:
    case Opcode::Xor:
    case Opcode::Shl:
    case Opcode::LShr:
    case Opcode::PartSelect:
      return OpcodeType::Bitwise;
    case Opcode::Load:
    case Opcode::Store:
    case Opcode::GetElementPtr:
      return OpcodeType::Memory;
    case Opcode::Br:
    case Opcode::Ret:
      return OpcodeType::Control;
    case Opcode::ZExt:
    case Opcode::Trunc:
      return OpcodeType::Cast;
    case Opcode::Mux:
    case Opcode::Phi:
    case Opcode::Const:
    case Opcode::Param:
    case Opcode::Block:
      return OpcodeType::Misc;
  }
  throw Error("unmapped opcode");
}

int IrGraph::findNode(const std::string &node_id) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == node_id) return static_cast<int>(i);
  return -1;
}

namespace {

// Kahn's algorithm over non-back edges; -1 in the result signals a cycle.
std::vector<int> kahnOrder(const IrGraph &g, bool &ok) {
  const int n = static_cast<int>(g.nodes.size());
  std::vector<std::vector<int>> succ(n);
  std::vector<int> indeg(n, 0);
  for (const IrEdge &e : g.edges) {
    if (e.attr.is_back_edge) continue;
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) continue;
    succ[e.src].push_back(e.dst);
    ++indeg[e.dst];
  }
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.push(i);
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int s : succ[v])
      if (--indeg[s] == 0) ready.push(s);
  }
  ok = static_cast<int>(order.size()) == n;
  return order;
}

}  // namespace

std::vector<Violation> validate(const IrGraph &g) {
  std::vector<Violation> out;
  const int n = static_cast<int>(g.nodes.size());

  std::unordered_set<std::string> seen;
  for (const IrNode &node : g.nodes) {
    if (!seen.insert(node.id).second)
      out.push_back({"node " + node.id, "duplicate node id"});
    const NodeFeatures &f = node.features;
    if (f.bitwidth != kBitwidthMisc && (f.bitwidth < 0 || f.bitwidth > 256))
      out.push_back({"node " + node.id, "bitwidth out of range"});
    if (f.cluster_group != kClusterMisc &&
        (f.cluster_group < -1 || f.cluster_group > 256))
      out.push_back({"node " + node.id, "cluster_group out of range"});
    if (f.is_start_of_path != 0 && f.is_start_of_path != 1 &&
        f.is_start_of_path != kStartMisc)
      out.push_back({"node " + node.id, "is_start_of_path out of range"});
    if (f.opcode_type == OpcodeType::Control && f.bitwidth != 0)
      out.push_back({"node " + node.id, "control node with nonzero bitwidth"});
    if (opcodeCategory(f.opcode) != f.opcode_type)
      out.push_back({"node " + node.id, "opcode_type inconsistent with opcode"});
    if (node.label) {
      const NodeResourceLabel &l = *node.label;
      if (l.dsp_count < 0 || l.lut_count < 0 || l.ff_count < 0)
        out.push_back({"node " + node.id, "negative resource count"});
      if (l.uses_dsp != (l.dsp_count > 0) || l.uses_lut != (l.lut_count > 0) ||
          l.uses_ff != (l.ff_count > 0))
        out.push_back({"node " + node.id, "uses_X flag inconsistent with count"});
      if (f.opcode_type == OpcodeType::Control &&
          (l.uses_dsp || l.uses_lut || l.uses_ff))
        out.push_back({"node " + node.id, "control node with resources"});
    }
  }

  for (size_t i = 0; i < g.edges.size(); ++i) {
    const IrEdge &e = g.edges[i];
    const std::string locus = "edge " + std::to_string(i);
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      out.push_back({locus, "edge endpoint out of range"});
      continue;
    }
    if (e.src == e.dst) out.push_back({locus, "self-edge"});
    if (e.attr.is_back_edge && g.kind == GraphKind::DFG)
      out.push_back({locus, "back edge in DFG"});
  }

  bool acyclic = false;
  kahnOrder(g, acyclic);
  if (!acyclic) {
    out.push_back({"graph", g.kind == GraphKind::DFG
                                ? "cycle in DFG"
                                : "cycle after back-edge removal"});
  }

  if (g.labels) {
    const GraphLabels &l = *g.labels;
    if (l.dsp < 0 || l.lut < 0 || l.ff < 0)
      out.push_back({"graph", "negative resource total"});
    bool has_op = std::any_of(g.nodes.begin(), g.nodes.end(), [](const IrNode &nd) {
      return nd.features.node_type == NodeType::Operation;
    });
    if (has_op && !(l.cp_ns > 0.0))
      out.push_back({"graph", "cp_ns not positive"});
  }

  return out;
}

std::vector<int> topologicalOrder(const IrGraph &g) {
  for (const IrEdge &e : g.edges) {
    const int n = static_cast<int>(g.nodes.size());
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n)
      throw Error("graph " + g.id + ": dangling edge endpoint");
  }
  bool ok = false;
  std::vector<int> order = kahnOrder(g, ok);
  if (!ok)
    throw Error("graph " + g.id + ": cycle survives back-edge removal");
  return order;
}

}  // namespace irperf
