//===- gnn.hpp - Message-passing layers, pooling, prediction heads -*- C++ -*-===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Network structure: per-field categorical embeddings summed to a 300-dim
// node state, five stacked message-passing layers (GCN / GraphSAGE / GIN /
// RGCN / PNA, interchangeable), sum or mean pooling, and a 300-600-300-out
// feed-forward head. Messages flow along edge direction; graphs are packed
// into disjoint-union batches with a per-node segment index.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <array>
#include <cmath>
#include <variant>
#include <vector>

#include "irperf/graph.hpp"
#include "irperf/tensor.hpp"

namespace irperf {

inline constexpr int kHiddenDim = 300;
inline constexpr int kNumLayers = 5;
inline constexpr int kNumRelations = kNumEdgeTypes * 2;  // edge_type x back bit

enum class GnnLayerKind : int { GCN = 0, SAGE, GIN, RGCN, PNA };
enum class KnowledgeMode : int { None = 0, Counts, Flags };
enum class PoolMode : int { Sum = 0, Mean };

/// How a graph-level output is read out of the node states. PoolThenHead
/// pools first and runs the head on one vector per graph. HeadThenSum runs
/// the head on every node and sums the per-node outputs, which keeps the
/// readout equivariant in graph size — the right inductive bias for targets
/// that accumulate over nodes (resource counts).
enum class ReadoutMode : int { PoolThenHead = 0, HeadThenSum };

const char *layerKindName(GnnLayerKind k);
GnnLayerKind layerKindFromName(const std::string &name);

// Knowledge-count buckets: 0 for zero, then log2-spaced, last index = misc
// (non-operation node or count feature absent).
inline constexpr int kNumCountBuckets = 17;
inline constexpr int kCountMisc = 16;
inline constexpr int kNumFlagCats = 3;  // {0, 1, misc}
inline constexpr int kFlagMisc = 2;

inline int countBucket(int count) {
  if (count <= 0) return 0;
  int b = 1 + static_cast<int>(std::floor(std::log2(static_cast<double>(count))));
  return std::min(b, kNumCountBuckets - 2);
}

//===----------------------------------------------------------------------===//
// Packed graphs and batches (scalar-independent)
//===----------------------------------------------------------------------===//

struct PackedGraph {
  std::string id;
  GraphKind kind = GraphKind::DFG;
  int num_nodes = 0;
  // Per-node categorical indices, ready for embedding lookup.
  std::vector<int> node_type, bitwidth, opcode_type, opcode, start, cluster;
  std::vector<int> k_dsp, k_lut, k_ff;             // count buckets
  std::vector<std::array<int, 3>> flags;           // {0,1,kFlagMisc} per resource
  std::vector<int> edge_src, edge_dst, edge_rel;   // rel = edge_type*2 + back
  bool has_node_labels = false;
  bool has_graph_labels = false;
  GraphLabels labels;
};

PackedGraph packGraph(const IrGraph &g);

struct Batch {
  int num_nodes = 0;
  int num_graphs = 0;
  std::vector<int> node_type, bitwidth, opcode_type, opcode, start, cluster;
  std::vector<int> k_dsp, k_lut, k_ff;
  std::vector<std::array<int, 3>> flags;
  std::vector<int> edge_src, edge_dst, edge_rel;
  std::vector<int> graph_of_node;
  std::vector<GraphLabels> labels;     // valid when graphs were labeled
  std::vector<int> in_degree;          // parallel edges count
  std::vector<int> sym_degree;         // undirected incident-edge count
  std::vector<std::array<int, kNumRelations>> rel_in_degree;
};

Batch makeBatch(const std::vector<const PackedGraph *> &graphs);

/// Mean of log(in_degree + 1) over all nodes of a corpus; the PNA degree
/// statistic, frozen at training time.
double computePnaDelta(const std::vector<const PackedGraph *> &graphs);

/// Optional per-node resource-type bits fed to knowledge-infused regressors
/// instead of the packed ground truth.
using FlagOverride = std::vector<std::array<int, 3>>;

//===----------------------------------------------------------------------===//
// Embedder
//===----------------------------------------------------------------------===//

template <typename S>
struct Embedder {
  KnowledgeMode mode = KnowledgeMode::None;
  Tensor<S> t_node_type, t_bitwidth, t_opcode_type, t_opcode, t_start,
      t_cluster;
  Tensor<S> t_k_dsp, t_k_lut, t_k_ff;  // counts or flags tables per mode

  static Embedder create(KnowledgeMode mode, Rng &rng) {
    Embedder e;
    e.mode = mode;
    e.t_node_type = glorotParam<S>(kNumNodeTypes, kHiddenDim, rng, "emb.node_type");
    e.t_bitwidth = glorotParam<S>(kNumBitwidthCats, kHiddenDim, rng, "emb.bitwidth");
    e.t_opcode_type =
        glorotParam<S>(kNumOpcodeTypes, kHiddenDim, rng, "emb.opcode_type");
    e.t_opcode = glorotParam<S>(kNumOpcodes, kHiddenDim, rng, "emb.opcode");
    e.t_start = glorotParam<S>(kNumStartCats, kHiddenDim, rng, "emb.start");
    e.t_cluster = glorotParam<S>(kNumClusterCats, kHiddenDim, rng, "emb.cluster");
    if (mode != KnowledgeMode::None) {
      int cats = mode == KnowledgeMode::Counts ? kNumCountBuckets : kNumFlagCats;
      // Zero-initialized: knowledge features enter as a residual correction,
      // so a knowledge-aware model starts from exactly the representation a
      // plain model has and the extra pathway can only be pulled in where the
      // counts/flags help. Rows still differentiate (each category receives
      // its own gradients), so zero init loses nothing here.
      e.t_k_dsp = zeroParam<S>(cats, kHiddenDim, "emb.k_dsp");
      e.t_k_lut = zeroParam<S>(cats, kHiddenDim, "emb.k_lut");
      e.t_k_ff = zeroParam<S>(cats, kHiddenDim, "emb.k_ff");
    }
    return e;
  }

  Tensor<S> forward(const Batch &b, const FlagOverride *override_flags) const {
    Tensor<S> h = indexSelect(t_node_type, b.node_type);
    h = add(h, indexSelect(t_bitwidth, b.bitwidth));
    h = add(h, indexSelect(t_opcode_type, b.opcode_type));
    h = add(h, indexSelect(t_opcode, b.opcode));
    h = add(h, indexSelect(t_start, b.start));
    h = add(h, indexSelect(t_cluster, b.cluster));
    if (mode == KnowledgeMode::Counts) {
      h = add(h, indexSelect(t_k_dsp, b.k_dsp));
      h = add(h, indexSelect(t_k_lut, b.k_lut));
      h = add(h, indexSelect(t_k_ff, b.k_ff));
    } else if (mode == KnowledgeMode::Flags) {
      const auto &flags = override_flags ? *override_flags : b.flags;
      if (static_cast<int>(flags.size()) != b.num_nodes)
        throw Error("embedder: flag override size mismatch");
      std::vector<int> fd(b.num_nodes), fl(b.num_nodes), ff(b.num_nodes);
      for (int i = 0; i < b.num_nodes; ++i) {
        fd[i] = flags[i][0];
        fl[i] = flags[i][1];
        ff[i] = flags[i][2];
      }
      h = add(h, indexSelect(t_k_dsp, fd));
      h = add(h, indexSelect(t_k_lut, fl));
      h = add(h, indexSelect(t_k_ff, ff));
    }
    return h;
  }

  void collectParams(std::vector<Tensor<S>> &out) const {
    out.push_back(t_node_type);
    out.push_back(t_bitwidth);
    out.push_back(t_opcode_type);
    out.push_back(t_opcode);
    out.push_back(t_start);
    out.push_back(t_cluster);
    if (mode != KnowledgeMode::None) {
      out.push_back(t_k_dsp);
      out.push_back(t_k_lut);
      out.push_back(t_k_ff);
    }
  }
};

//===----------------------------------------------------------------------===//
// Layers
//===----------------------------------------------------------------------===//

template <typename S>
struct GcnLayer {
  Tensor<S> W, b;

  static GcnLayer create(Rng &rng, const std::string &prefix) {
    GcnLayer l;
    l.W = glorotParam<S>(kHiddenDim, kHiddenDim, rng, prefix + ".W");
    l.b = zeroParam<S>(1, kHiddenDim, prefix + ".b");
    return l;
  }

  // h'_v = ReLU(W * sum_{u in N(v) + {v}} h_u / sqrt(dhat_u dhat_v) + b);
  // dhat = undirected degree + 1.
  Tensor<S> forward(const Tensor<S> &h, const Batch &bt) const {
    std::vector<S> dhat(bt.num_nodes);
    for (int i = 0; i < bt.num_nodes; ++i)
      dhat[i] = static_cast<S>(bt.sym_degree[i] + 1);
    std::vector<S> edge_w(bt.edge_src.size());
    for (size_t e = 0; e < bt.edge_src.size(); ++e)
      edge_w[e] = S(1) / std::sqrt(dhat[bt.edge_src[e]] * dhat[bt.edge_dst[e]]);
    std::vector<S> self_w(bt.num_nodes);
    for (int i = 0; i < bt.num_nodes; ++i) self_w[i] = S(1) / dhat[i];

    Tensor<S> agg = rowScale(h, self_w);
    if (!bt.edge_src.empty()) {
      Tensor<S> msg = rowScale(indexSelect(h, bt.edge_src), edge_w);
      agg = add(agg, scatterAdd(msg, bt.edge_dst, bt.num_nodes));
    }
    return relu(add(matmul(agg, W), b));
  }

  void collectParams(std::vector<Tensor<S>> &out) const {
    out.push_back(W);
    out.push_back(b);
  }
};

template <typename S>
struct SageLayer {
  Tensor<S> W_self, W_nbr, b;

  static SageLayer create(Rng &rng, const std::string &prefix) {
    SageLayer l;
    l.W_self = glorotParam<S>(kHiddenDim, kHiddenDim, rng, prefix + ".W_self");
    l.W_nbr = glorotParam<S>(kHiddenDim, kHiddenDim, rng, prefix + ".W_nbr");
    l.b = zeroParam<S>(1, kHiddenDim, prefix + ".b");
    return l;
  }

  // h'_v = ReLU(W_self h_v + W_nbr mean_{u in N(v)} h_u + b); full
  // neighborhoods (the sampling knob stays off at this scale).
  Tensor<S> forward(const Tensor<S> &h, const Batch &bt) const {
    Tensor<S> out = add(matmul(h, W_self), b);
    if (!bt.edge_src.empty()) {
      std::vector<S> inv(bt.num_nodes);
      for (int i = 0; i < bt.num_nodes; ++i)
        inv[i] = bt.in_degree[i] > 0 ? S(1) / S(bt.in_degree[i]) : S(0);
      Tensor<S> meanN = rowScale(
          scatterAdd(indexSelect(h, bt.edge_src), bt.edge_dst, bt.num_nodes),
          inv);
      out = add(out, matmul(meanN, W_nbr));
    }
    return relu(out);
  }

  void collectParams(std::vector<Tensor<S>> &out) const {
    out.push_back(W_self);
    out.push_back(W_nbr);
    out.push_back(b);
  }
};

template <typename S>
struct GinLayer {
  Tensor<S> eps;  // learnable, init 0
  Tensor<S> W1, b1, W2, b2;

  static GinLayer create(Rng &rng, const std::string &prefix) {
    GinLayer l;
    l.eps = zeroParam<S>(1, 1, prefix + ".eps");
    l.W1 = glorotParam<S>(kHiddenDim, kHiddenDim, rng, prefix + ".W1");
    l.b1 = zeroParam<S>(1, kHiddenDim, prefix + ".b1");
    l.W2 = glorotParam<S>(kHiddenDim, kHiddenDim, rng, prefix + ".W2");
    l.b2 = zeroParam<S>(1, kHiddenDim, prefix + ".b2");
    return l;
  }

  // h'_v = MLP((1+eps) h_v + sum_{u in N(v)} h_u); MLP ends linear, the
  // model-level inter-layer ReLU supplies the nonlinearity between layers.
  Tensor<S> forward(const Tensor<S> &h, const Batch &bt) const {
    Tensor<S> pre = mul(h, add(eps, Tensor<S>::scalar(S(1))));
    if (!bt.edge_src.empty())
      pre = add(pre,
                scatterAdd(indexSelect(h, bt.edge_src), bt.edge_dst, bt.num_nodes));
    Tensor<S> mid = relu(add(matmul(pre, W1), b1));
    return add(matmul(mid, W2), b2);
  }

  void collectParams(std::vector<Tensor<S>> &out) const {
    out.push_back(eps);
    out.push_back(W1);
    out.push_back(b1);
    out.push_back(W2);
    out.push_back(b2);
  }
};

template <typename S>
struct RgcnLayer {
  Tensor<S> W0, b;
  std::array<Tensor<S>, kNumRelations> Wr;

  static RgcnLayer create(Rng &rng, const std::string &prefix) {
    RgcnLayer l;
    l.W0 = glorotParam<S>(kHiddenDim, kHiddenDim, rng, prefix + ".W0");
    l.b = zeroParam<S>(1, kHiddenDim, prefix + ".b");
    for (int r = 0; r < kNumRelations; ++r)
      l.Wr[r] = glorotParam<S>(kHiddenDim, kHiddenDim, rng,
                               prefix + ".W" + std::to_string(r + 1));
    return l;
  }

  // h'_v = ReLU(W0 h_v + sum_r sum_{u in N_r(v)} W_r h_u / |N_r(v)| + b).
  Tensor<S> forward(const Tensor<S> &h, const Batch &bt) const {
    Tensor<S> out = add(matmul(h, W0), b);
    for (int r = 0; r < kNumRelations; ++r) {
      std::vector<int> src, dst;
      for (size_t e = 0; e < bt.edge_rel.size(); ++e)
        if (bt.edge_rel[e] == r) {
          src.push_back(bt.edge_src[e]);
          dst.push_back(bt.edge_dst[e]);
        }
      if (src.empty()) continue;
      std::vector<S> w(src.size());
      for (size_t e = 0; e < dst.size(); ++e)
        w[e] = S(1) / S(bt.rel_in_degree[dst[e]][r]);
      Tensor<S> msg = rowScale(matmul(indexSelect(h, src), Wr[r]), w);
      out = add(out, scatterAdd(msg, dst, bt.num_nodes));
    }
    return relu(out);
  }

  void collectParams(std::vector<Tensor<S>> &out) const {
    out.push_back(W0);
    out.push_back(b);
    for (const Tensor<S> &w : Wr) out.push_back(w);
  }
};

template <typename S>
struct PnaLayer {
  Tensor<S> P, b;       // projection (1 + 12) x hidden -> hidden
  double delta = 1.0;   // mean log(d+1) over the training corpus

  static PnaLayer create(Rng &rng, const std::string &prefix, double delta) {
    PnaLayer l;
    l.P = glorotParam<S>(13 * kHiddenDim, kHiddenDim, rng, prefix + ".P");
    l.b = zeroParam<S>(1, kHiddenDim, prefix + ".b");
    l.delta = delta;
    return l;
  }

  // Aggregators {mean, max, min, std} over in-neighbors, each under scalers
  // {identity, log(d+1)/delta, delta/log(d+1)}; concat with the self state
  // and project. Degree-0 nodes keep a zero neighbor summary.
  Tensor<S> forward(const Tensor<S> &h, const Batch &bt) const {
    const int n = bt.num_nodes;
    Tensor<S> gathered, s1, s2, mn, mx, mnm;
    std::vector<S> inv(n), amp(n), att(n);
    for (int i = 0; i < n; ++i) {
      int d = bt.in_degree[i];
      inv[i] = d > 0 ? S(1) / S(d) : S(0);
      double ld = std::log(static_cast<double>(d) + 1.0);
      amp[i] = d > 0 ? static_cast<S>(ld / delta) : S(0);
      att[i] = d > 0 && ld > 0.0 ? static_cast<S>(delta / ld) : S(0);
    }
    Tensor<S> meanA, maxA, minA, stdA;
    if (!bt.edge_src.empty()) {
      gathered = indexSelect(h, bt.edge_src);
      Tensor<S> sums = scatterAdd(gathered, bt.edge_dst, n);
      meanA = rowScale(sums, inv);
      Tensor<S> sumsq = scatterAdd(mul(gathered, gathered), bt.edge_dst, n);
      Tensor<S> var = relu(sub(rowScale(sumsq, inv), mul(meanA, meanA)));
      stdA = sqrtt(add(var, Tensor<S>::scalar(S(1e-8))));
      // remove the sqrt(1e-8) floor leak on degree-0 rows
      std::vector<S> has(n);
      for (int i = 0; i < n; ++i) has[i] = bt.in_degree[i] > 0 ? S(1) : S(0);
      stdA = rowScale(stdA, has);
      maxA = segmentMax(gathered, bt.edge_dst, n);
      minA = segmentMin(gathered, bt.edge_dst, n);
    } else {
      Tensor<S> z = Tensor<S>::leaf(Mat<S>::Zero(n, kHiddenDim));
      meanA = maxA = minA = stdA = z;
    }
    std::vector<Tensor<S>> parts;
    parts.push_back(h);
    for (const Tensor<S> &a : {meanA, maxA, minA, stdA}) {
      parts.push_back(a);
      parts.push_back(rowScale(a, amp));
      parts.push_back(rowScale(a, att));
    }
    return relu(add(matmul(concatCols(parts), P), b));
  }

  void collectParams(std::vector<Tensor<S>> &out) const {
    out.push_back(P);
    out.push_back(b);
  }
};

//===----------------------------------------------------------------------===//
// Pooling, head, full model
//===----------------------------------------------------------------------===//

template <typename S>
Tensor<S> pool(const Tensor<S> &node_states, const Batch &bt, PoolMode mode) {
  if (bt.num_graphs <= 0) throw Error("pool: empty batch");
  std::vector<int> count(bt.num_graphs, 0);
  for (int g : bt.graph_of_node) ++count[g];
  for (int c : count)
    if (c == 0) throw Error("pool: empty graph segment");
  Tensor<S> s = scatterAdd(node_states, bt.graph_of_node, bt.num_graphs);
  if (mode == PoolMode::Sum) return s;
  std::vector<S> inv(bt.num_graphs);
  for (int g = 0; g < bt.num_graphs; ++g) inv[g] = S(1) / S(count[g]);
  return rowScale(s, inv);
}

template <typename S>
struct HeadMlp {
  Tensor<S> W1, b1, W2, b2, W3, b3;

  static HeadMlp create(int out_dim, Rng &rng) {
    HeadMlp m;
    m.W1 = glorotParam<S>(kHiddenDim, 600, rng, "head.W1");
    m.b1 = zeroParam<S>(1, 600, "head.b1");
    m.W2 = glorotParam<S>(600, 300, rng, "head.W2");
    m.b2 = zeroParam<S>(1, 300, "head.b2");
    m.W3 = glorotParam<S>(300, out_dim, rng, "head.W3");
    m.b3 = zeroParam<S>(1, out_dim, "head.b3");
    return m;
  }

  Tensor<S> forward(const Tensor<S> &x) const {
    Tensor<S> a = relu(add(matmul(x, W1), b1));
    Tensor<S> c = relu(add(matmul(a, W2), b2));
    return add(matmul(c, W3), b3);
  }

  void collectParams(std::vector<Tensor<S>> &out) const {
    out.push_back(W1);
    out.push_back(b1);
    out.push_back(W2);
    out.push_back(b2);
    out.push_back(W3);
    out.push_back(b3);
  }
};

struct GnnConfig {
  GnnLayerKind layer = GnnLayerKind::GCN;
  KnowledgeMode knowledge = KnowledgeMode::None;
  PoolMode pool = PoolMode::Sum;
  ReadoutMode readout = ReadoutMode::PoolThenHead;
  int out_dim = 1;
  double dropout = 0.1;
  double pna_delta = 1.0;
};

template <typename S>
struct GnnModel {
  using AnyLayer = std::variant<GcnLayer<S>, SageLayer<S>, GinLayer<S>,
                                RgcnLayer<S>, PnaLayer<S>>;

  GnnConfig cfg;
  Embedder<S> embedder;
  std::vector<AnyLayer> layers;
  HeadMlp<S> head;

  static GnnModel create(const GnnConfig &cfg, uint64_t seed) {
    Rng rng(seed);
    GnnModel m;
    m.cfg = cfg;
    m.embedder = Embedder<S>::create(cfg.knowledge, rng);
    for (int i = 0; i < kNumLayers; ++i) {
      std::string prefix = "layer" + std::to_string(i);
      switch (cfg.layer) {
        case GnnLayerKind::GCN:
          m.layers.push_back(GcnLayer<S>::create(rng, prefix));
          break;
        case GnnLayerKind::SAGE:
          m.layers.push_back(SageLayer<S>::create(rng, prefix));
          break;
        case GnnLayerKind::GIN:
          m.layers.push_back(GinLayer<S>::create(rng, prefix));
          break;
        case GnnLayerKind::RGCN:
          m.layers.push_back(RgcnLayer<S>::create(rng, prefix));
          break;
        case GnnLayerKind::PNA:
          m.layers.push_back(PnaLayer<S>::create(rng, prefix, cfg.pna_delta));
          break;
      }
    }
    m.head = HeadMlp<S>::create(cfg.out_dim, rng);
    return m;
  }

  /// Node states after all message-passing layers. `rng` enables dropout
  /// (training mode); pass nullptr at inference.
  Tensor<S> nodeStates(const Batch &bt, Rng *rng,
                       const FlagOverride *flags = nullptr) const {
    Tensor<S> h = embedder.forward(bt, flags);
    for (size_t i = 0; i < layers.size(); ++i) {
      h = std::visit([&](const auto &l) { return l.forward(h, bt); },
                     layers[i]);
      if (i + 1 < layers.size()) h = relu(h);
      if (rng && cfg.dropout > 0.0) h = dropout(h, cfg.dropout, *rng);
    }
    return h;
  }

  /// Graph-level output, num_graphs x out_dim. PoolThenHead pools the node
  /// states and runs the head once per graph; HeadThenSum runs the head per
  /// node and sums the outputs within each graph.
  Tensor<S> forwardGraph(const Batch &bt, Rng *rng = nullptr,
                         const FlagOverride *flags = nullptr) const {
    Tensor<S> h = nodeStates(bt, rng, flags);
    if (cfg.readout == ReadoutMode::HeadThenSum)
      return scatterAdd(head.forward(h), bt.graph_of_node, bt.num_graphs);
    return head.forward(pool(h, bt, cfg.pool));
  }

  /// Node-level output: head applied per node, num_nodes x out_dim.
  Tensor<S> forwardNodes(const Batch &bt, Rng *rng = nullptr) const {
    return head.forward(nodeStates(bt, rng, nullptr));
  }

  std::vector<Tensor<S>> params() const {
    std::vector<Tensor<S>> out;
    embedder.collectParams(out);
    for (const AnyLayer &l : layers)
      std::visit([&](const auto &x) { x.collectParams(out); }, l);
    head.collectParams(out);
    return out;
  }
};

}  // namespace irperf
