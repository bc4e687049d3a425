//===- graph.hpp - IR graph data model and structural validation -*- C++ -*-===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Typed attributed DFG/CDFG graphs: node feature schema, per-node resource
// labels, edge attributes, and the invariant checks every downstream module
// relies on.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace irperf {

class Error : public std::runtime_error {
public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

enum class Opcode : int {
  Load = 0,
  Store,
  Add,
  Sub,
  Mul,
  SDiv,
  UDiv,
  And,
  Or,
  Xor,
  Shl,
  LShr,
  ICmp,
  Mux,
  Phi,
  Br,
  Ret,
  PartSelect,
  ZExt,
  Trunc,
  GetElementPtr,
  Const,
  Param,
  Block,  // pseudo-opcode carried by basic-block nodes in CDFGs
};
inline constexpr int kNumOpcodes = 24;

enum class OpcodeType : int {
  BinaryUnary = 0,
  Bitwise,
  Memory,
  Control,
  Cast,
  Misc,
};
inline constexpr int kNumOpcodeTypes = 6;

enum class NodeType : int { Operation = 0, Block, Port, Misc };
inline constexpr int kNumNodeTypes = 4;

enum class GraphKind { DFG, CDFG };

const char *opcodeName(Opcode op);
const char *opcodeTypeName(OpcodeType t);
const char *nodeTypeName(NodeType t);
const char *graphKindName(GraphKind k);

// Parse helpers; throw Error on unknown names.
Opcode opcodeFromName(const std::string &name);
OpcodeType opcodeTypeFromName(const std::string &name);
NodeType nodeTypeFromName(const std::string &name);
GraphKind graphKindFromName(const std::string &name);

/// Fixed opcode -> category mapping.
OpcodeType opcodeCategory(Opcode op);

// Sentinel encodings. Bitwidth and cluster_group are dense categoricals:
// bitwidth indices 0..256 are literal widths, 257 is "misc"; cluster indices
// are cluster_group+1 (so -1 maps to 0), 258 is "misc".
inline constexpr int kBitwidthMisc = 257;
inline constexpr int kClusterMisc = 257;  // stored form; embeds as index 258
inline constexpr int kStartMisc = 2;      // {0, 1, 2=misc}

inline constexpr int kNumBitwidthCats = 258;  // 0..256 + misc
inline constexpr int kNumClusterCats = 259;   // -1..256 + misc
inline constexpr int kNumStartCats = 3;

struct NodeFeatures {
  NodeType node_type = NodeType::Operation;
  int bitwidth = 0;        // 0..256, or kBitwidthMisc
  OpcodeType opcode_type = OpcodeType::Misc;
  Opcode opcode = Opcode::Const;
  int is_start_of_path = 0;  // 0, 1, or kStartMisc
  int cluster_group = 0;     // -1..256, or kClusterMisc

  bool operator==(const NodeFeatures &) const = default;
};

struct NodeResourceLabel {
  bool uses_dsp = false;
  bool uses_lut = false;
  bool uses_ff = false;
  int dsp_count = 0;
  int lut_count = 0;
  int ff_count = 0;

  bool operator==(const NodeResourceLabel &) const = default;
};

enum class EdgeType : int { Data = 0, Control = 1, MemDep = 2 };
inline constexpr int kNumEdgeTypes = 3;

struct EdgeAttr {
  EdgeType edge_type = EdgeType::Data;
  bool is_back_edge = false;

  bool operator==(const EdgeAttr &) const = default;
};

struct GraphLabels {
  int dsp = 0;
  int lut = 0;
  int ff = 0;
  double cp_ns = 0.0;

  bool operator==(const GraphLabels &) const = default;
};

struct IrNode {
  std::string id;
  NodeFeatures features;
  std::optional<NodeResourceLabel> label;

  bool operator==(const IrNode &) const = default;
};

struct IrEdge {
  int src = -1;  // index into IrGraph::nodes
  int dst = -1;
  EdgeAttr attr;

  bool operator==(const IrEdge &) const = default;
};

/// A DFG or CDFG. Immutable by convention once built; every accessor is const
/// and all transforms return new graphs.
struct IrGraph {
  std::string id;
  GraphKind kind = GraphKind::DFG;
  std::vector<IrNode> nodes;
  std::vector<IrEdge> edges;
  std::optional<GraphLabels> labels;

  bool operator==(const IrGraph &) const = default;

  int findNode(const std::string &node_id) const;  // -1 if absent
};

struct Violation {
  std::string locus;    // "node foo", "edge 3", "graph"
  std::string message;
};

/// Checks every IrGraph invariant. Returns one entry per violation; empty
/// means valid. Dangling edge endpoints are reported, not thrown.
std::vector<Violation> validate(const IrGraph &g);

/// Topological order over non-back edges, deterministic (smallest node index
/// first among ready nodes). Throws Error if a cycle survives back-edge
/// removal.
std::vector<int> topologicalOrder(const IrGraph &g);

}  // namespace irperf
