//===- gnn.cpp - Graph packing and batching -------------------------------===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "irperf/gnn.hpp"

#include <set>

namespace irperf {

const char *layerKindName(GnnLayerKind k) {
  switch (k) {
    case GnnLayerKind::GCN:
      return "gcn";
    case GnnLayerKind::SAGE:
      return "sage";
    case GnnLayerKind::GIN:
      return "gin";
    case GnnLayerKind::RGCN:
      return "rgcn";
    case GnnLayerKind::PNA:
      return "pna";
  }
  throw Error("bad layer kind");
}

GnnLayerKind layerKindFromName(const std::string &name) {
  for (GnnLayerKind k : {GnnLayerKind::GCN, GnnLayerKind::SAGE,
                         GnnLayerKind::GIN, GnnLayerKind::RGCN,
                         GnnLayerKind::PNA})
    if (name == layerKindName(k)) return k;
  throw Error("unknown layer kind: " + name);
}

PackedGraph packGraph(const IrGraph &g) {
  PackedGraph p;
  p.id = g.id;
  p.kind = g.kind;
  p.num_nodes = static_cast<int>(g.nodes.size());
  p.has_node_labels = !g.nodes.empty();
  for (const IrNode &n : g.nodes) {
    const NodeFeatures &f = n.features;
    p.node_type.push_back(static_cast<int>(f.node_type));
    p.bitwidth.push_back(f.bitwidth == kBitwidthMisc ? 257 : f.bitwidth);
    p.opcode_type.push_back(static_cast<int>(f.opcode_type));
    p.opcode.push_back(static_cast<int>(f.opcode));
    p.start.push_back(f.is_start_of_path);
    p.cluster.push_back(f.cluster_group == kClusterMisc ? 258
                                                        : f.cluster_group + 1);
    if (n.label && f.node_type == NodeType::Operation) {
      p.k_dsp.push_back(countBucket(n.label->dsp_count));
      p.k_lut.push_back(countBucket(n.label->lut_count));
      p.k_ff.push_back(countBucket(n.label->ff_count));
      p.flags.push_back({n.label->uses_dsp ? 1 : 0, n.label->uses_lut ? 1 : 0,
                         n.label->uses_ff ? 1 : 0});
    } else {
      p.k_dsp.push_back(kCountMisc);
      p.k_lut.push_back(kCountMisc);
      p.k_ff.push_back(kCountMisc);
      p.flags.push_back({kFlagMisc, kFlagMisc, kFlagMisc});
      if (f.node_type == NodeType::Operation) p.has_node_labels = false;
    }
  }
  for (const IrEdge &e : g.edges) {
    p.edge_src.push_back(e.src);
    p.edge_dst.push_back(e.dst);
    p.edge_rel.push_back(static_cast<int>(e.attr.edge_type) * 2 +
                         (e.attr.is_back_edge ? 1 : 0));
  }
  if (g.labels) {
    p.has_graph_labels = true;
    p.labels = *g.labels;
  }
  return p;
}

Batch makeBatch(const std::vector<const PackedGraph *> &graphs) {
  if (graphs.empty()) throw Error("makeBatch: no graphs");
  Batch b;
  for (const PackedGraph *g : graphs) {
    int off = b.num_nodes;
    int gi = b.num_graphs;
    b.node_type.insert(b.node_type.end(), g->node_type.begin(), g->node_type.end());
    b.bitwidth.insert(b.bitwidth.end(), g->bitwidth.begin(), g->bitwidth.end());
    b.opcode_type.insert(b.opcode_type.end(), g->opcode_type.begin(),
                         g->opcode_type.end());
    b.opcode.insert(b.opcode.end(), g->opcode.begin(), g->opcode.end());
    b.start.insert(b.start.end(), g->start.begin(), g->start.end());
    b.cluster.insert(b.cluster.end(), g->cluster.begin(), g->cluster.end());
    b.k_dsp.insert(b.k_dsp.end(), g->k_dsp.begin(), g->k_dsp.end());
    b.k_lut.insert(b.k_lut.end(), g->k_lut.begin(), g->k_lut.end());
    b.k_ff.insert(b.k_ff.end(), g->k_ff.begin(), g->k_ff.end());
    b.flags.insert(b.flags.end(), g->flags.begin(), g->flags.end());
    for (size_t e = 0; e < g->edge_src.size(); ++e) {
      b.edge_src.push_back(g->edge_src[e] + off);
      b.edge_dst.push_back(g->edge_dst[e] + off);
      b.edge_rel.push_back(g->edge_rel[e]);
    }
    for (int i = 0; i < g->num_nodes; ++i) b.graph_of_node.push_back(gi);
    b.labels.push_back(g->labels);
    b.num_nodes += g->num_nodes;
    b.num_graphs += 1;
  }
  b.in_degree.assign(b.num_nodes, 0);
  b.sym_degree.assign(b.num_nodes, 0);
  b.rel_in_degree.assign(b.num_nodes, {});
  for (size_t e = 0; e < b.edge_src.size(); ++e) {
    ++b.in_degree[b.edge_dst[e]];
    ++b.rel_in_degree[b.edge_dst[e]][b.edge_rel[e]];
  }
  // Undirected support for GCN normalization: a u->v / v->u pair (or any
  // parallel edges) counts as one incident edge on each endpoint.
  std::set<std::pair<int, int>> undirected;
  for (size_t e = 0; e < b.edge_src.size(); ++e)
    undirected.insert({std::min(b.edge_src[e], b.edge_dst[e]),
                       std::max(b.edge_src[e], b.edge_dst[e])});
  for (const auto &[u, v] : undirected) {
    ++b.sym_degree[u];
    ++b.sym_degree[v];
  }
  return b;
}

double computePnaDelta(const std::vector<const PackedGraph *> &graphs) {
  double total = 0.0;
  long nodes = 0;
  for (const PackedGraph *g : graphs) {
    std::vector<int> indeg(g->num_nodes, 0);
    for (int d : g->edge_dst) ++indeg[d];
    for (int d : indeg) total += std::log(static_cast<double>(d) + 1.0);
    nodes += g->num_nodes;
  }
  if (nodes == 0) throw Error("computePnaDelta: empty corpus");
  double delta = total / static_cast<double>(nodes);
  return delta > 0.0 ? delta : 1.0;
}

}  // namespace irperf
