//===- gnn_test.cpp - Embedding, layers, pooling, head tests --------------===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Layer semantics are pinned with hand-set weights (identity/zero matrices)
// on constant-row states, so the expected values are one-line arithmetic.
//
//===----------------------------------------------------------------------===//

#include <cmath>

#include "doctest.h"
#include "irperf/frontend.hpp"
#include "irperf/gnn.hpp"
#include "irperf/oracle.hpp"
#include "test_util.hpp"

using namespace irperf;
using namespace irperf::testutil;

namespace {

using MatD = Mat<double>;

// One-graph batch over n nodes with the given directed edges (relation 0
// unless given).
Batch miniBatch(int n, const std::vector<std::pair<int, int>> &edges,
                const std::vector<int> &rel = {}) {
  PackedGraph g;
  g.id = "mini";
  g.num_nodes = n;
  g.node_type.assign(n, 0);
  g.bitwidth.assign(n, 32);
  g.opcode_type.assign(n, 0);
  g.opcode.assign(n, 0);
  g.start.assign(n, 0);
  g.cluster.assign(n, 1);
  g.k_dsp.assign(n, 0);
  g.k_lut.assign(n, 0);
  g.k_ff.assign(n, 0);
  g.flags.assign(n, {0, 0, 0});
  for (size_t e = 0; e < edges.size(); ++e) {
    g.edge_src.push_back(edges[e].first);
    g.edge_dst.push_back(edges[e].second);
    g.edge_rel.push_back(rel.empty() ? 0 : rel[e]);
  }
  return makeBatch({&g});
}

// Node states where every row is a constant vector.
TensorD rows(const std::vector<double> &values) {
  MatD m(static_cast<int>(values.size()), kHiddenDim);
  for (size_t i = 0; i < values.size(); ++i)
    m.row(static_cast<int>(i)).setConstant(values[i]);
  return TensorD::leaf(m);
}

void setIdentity(TensorD &t, double s = 1.0) {
  t.value().setZero();
  t.value().diagonal().setConstant(s);
}

double at(const TensorD &t, int row) { return t.value()(row, 0); }

Rng &testRng() {
  static Rng rng(0x6e6e);
  return rng;
}

}  // namespace

TEST_CASE("GCN: isolated node with W=I is ReLU(h)") {
  GcnLayer<double> l = GcnLayer<double>::create(testRng(), "t");
  setIdentity(l.W);
  Batch b = miniBatch(2, {});
  TensorD out = l.forward(rows({1.5, -2.0}), b);
  CHECK(at(out, 0) == doctest::Approx(1.5));
  CHECK(at(out, 1) == doctest::Approx(0.0));
}

TEST_CASE("GCN: mutual pair with states 1 and 3 both aggregate to 2") {
  GcnLayer<double> l = GcnLayer<double>::create(testRng(), "t");
  setIdentity(l.W);
  Batch b = miniBatch(2, {{0, 1}, {1, 0}});
  TensorD out = l.forward(rows({1.0, 3.0}), b);
  CHECK(at(out, 0) == doctest::Approx(2.0));
  CHECK(at(out, 1) == doctest::Approx(2.0));
}

TEST_CASE("GCN: permutation equivariance") {
  GcnLayer<double> l = GcnLayer<double>::create(testRng(), "t");
  Batch b = miniBatch(3, {{0, 1}, {1, 2}});
  Batch pb = miniBatch(3, {{2, 0}, {0, 1}});  // relabeled 0->2,1->0,2->1
  TensorD h = rows({1.0, -2.0, 0.5});
  TensorD ph = rows({-2.0, 0.5, 1.0});
  TensorD out = l.forward(h, b);
  TensorD pout = l.forward(ph, pb);
  CHECK(out.value().row(0).isApprox(pout.value().row(2), 1e-12));
  CHECK(out.value().row(1).isApprox(pout.value().row(0), 1e-12));
  CHECK(out.value().row(2).isApprox(pout.value().row(1), 1e-12));
}

TEST_CASE("SAGE: no neighbors, equal neighbor, and mean checks") {
  SageLayer<double> l = SageLayer<double>::create(testRng(), "t");
  setIdentity(l.W_self);
  l.W_nbr.value().setZero();
  Batch lone = miniBatch(1, {});
  CHECK(at(l.forward(rows({2.5}), lone), 0) == doctest::Approx(2.5));

  setIdentity(l.W_self, 0.5);
  setIdentity(l.W_nbr, 0.5);
  Batch pair = miniBatch(2, {{0, 1}});
  TensorD out = l.forward(rows({4.0, 4.0}), pair);
  CHECK(at(out, 1) == doctest::Approx(4.0));  // ReLU(h/2 + h/2)

  setIdentity(l.W_nbr, 1.0);
  l.W_self.value().setZero();
  Batch fan = miniBatch(4, {{0, 3}, {1, 3}, {2, 3}});
  CHECK(at(l.forward(rows({1.0, 2.0, 3.0, 9.0}), fan), 3) ==
        doctest::Approx(2.0));
}

TEST_CASE("GIN: identity MLP with eps 0 and no neighbors is identity") {
  GinLayer<double> l = GinLayer<double>::create(testRng(), "t");
  setIdentity(l.W1);
  setIdentity(l.W2);
  Batch b = miniBatch(2, {});
  TensorD out = l.forward(rows({0.7, 1.4}), b);
  CHECK(at(out, 0) == doctest::Approx(0.7));
  CHECK(at(out, 1) == doctest::Approx(1.4));
}

TEST_CASE("GIN: sum aggregation collides {1,3} with {2,2} on scalar states") {
  GinLayer<double> l = GinLayer<double>::create(testRng(), "t");
  Batch fan = miniBatch(3, {{0, 2}, {1, 2}});
  TensorD a = l.forward(rows({1.0, 3.0, 0.0}), fan);
  TensorD b = l.forward(rows({2.0, 2.0, 0.0}), fan);
  CHECK(a.value().row(2).isApprox(b.value().row(2), 1e-12));
}

TEST_CASE("RGCN: relation means and per-relation weights") {
  RgcnLayer<double> l = RgcnLayer<double>::create(testRng(), "t");
  l.W0.value().setZero();
  for (auto &w : l.Wr) w.value().setZero();
  setIdentity(l.Wr[0]);
  Batch fan = miniBatch(3, {{0, 2}, {1, 2}}, {0, 0});
  CHECK(at(l.forward(rows({1.0, 3.0, 9.0}), fan), 2) == doctest::Approx(2.0));

  // Same neighbors, one moved to relation 1 carrying weight 2I:
  // W_1*3/1 + W_0*1/1 pre-ReLU = 6 + 1.
  setIdentity(l.Wr[1], 2.0);
  Batch mixed = miniBatch(3, {{0, 2}, {1, 2}}, {0, 1});
  CHECK(at(l.forward(rows({1.0, 3.0, 9.0}), mixed), 2) == doctest::Approx(7.0));

  setIdentity(l.W0);
  Batch lone = miniBatch(1, {});
  CHECK(at(l.forward(rows({5.0}), lone), 0) == doctest::Approx(5.0));
}

TEST_CASE("PNA: aggregators over neighbors {1,3} with unit scalers") {
  // delta = log(2+1) makes amplification and attenuation 1 at degree 2.
  PnaLayer<double> l =
      PnaLayer<double>::create(testRng(), "t", std::log(3.0));
  l.P.value().setZero();
  Batch fan = miniBatch(3, {{0, 2}, {1, 2}});
  TensorD h = rows({1.0, 3.0, 0.0});
  // parts order: self, then per aggregator {mean,max,min,std} the scalers
  // {identity, amplification, attenuation}; both scalers are 1 at d = 2.
  struct Pick { int part; double expect; };
  for (Pick p : {Pick{1, 2.0}, Pick{2, 2.0}, Pick{3, 2.0},  // mean x scalers
                 Pick{4, 3.0},                              // max
                 Pick{7, 1.0},                              // min
                 Pick{10, 1.0}}) {                          // std of {1,3}
    l.P.value().setZero();
    l.P.value()
        .block(p.part * kHiddenDim, 0, kHiddenDim, kHiddenDim)
        .diagonal()
        .setOnes();
    double got = at(l.forward(h, fan), 2);
    CHECK_MESSAGE(got == doctest::Approx(p.expect).epsilon(1e-4), "part ",
                  p.part);
  }
}

TEST_CASE("PNA: degree-0 node has a zero neighbor summary") {
  PnaLayer<double> l = PnaLayer<double>::create(testRng(), "t", 1.0);
  l.P.value().setZero();
  l.P.value().block(kHiddenDim, 0, kHiddenDim, kHiddenDim).diagonal().setOnes();
  Batch b = miniBatch(2, {{0, 1}});
  TensorD out = l.forward(rows({5.0, 5.0}), b);
  CHECK(at(out, 0) == doctest::Approx(0.0));  // no in-neighbors
  CHECK(at(out, 1) == doctest::Approx(5.0));  // mean of {5}
}

TEST_CASE("pool: sum, mean, single node, empty segment") {
  Batch one = miniBatch(1, {});
  TensorD h1 = rows({3.25});
  CHECK(pool(h1, one, PoolMode::Sum).value()(0, 0) == doctest::Approx(3.25));
  CHECK(pool(h1, one, PoolMode::Mean).value()(0, 0) == doctest::Approx(3.25));

  Batch two = miniBatch(2, {});
  TensorD h2 = rows({1.0, 3.0});
  CHECK(pool(h2, two, PoolMode::Sum).value()(0, 0) == doctest::Approx(4.0));
  CHECK(pool(h2, two, PoolMode::Mean).value()(0, 0) == doctest::Approx(2.0));

  Batch broken = miniBatch(2, {});
  broken.num_graphs = 2;  // second segment has no nodes
  CHECK_THROWS_AS(pool(h2, broken, PoolMode::Sum), Error);
}

TEST_CASE("head: zero input with zero biases gives zero output") {
  HeadMlp<double> head = HeadMlp<double>::create(1, testRng());
  TensorD out = head.forward(TensorD::leaf(MatD::Zero(2, kHiddenDim)));
  CHECK(out.value()(0, 0) == 0.0);
  CHECK(out.value()(1, 0) == 0.0);
}

TEST_CASE("only RGCN reacts to flipping an edge's back flag") {
  MiniProgram p = parse(
      "func f(n) {"
      "  header: c = icmp n 0; br c body exit"
      "  body:   t = add n 1; br header"
      "  exit:   ret n"
      "}");
  // Clear every back bit on the packed form: topology is untouched, only
  // the relation index changes, so any output difference is flag-driven.
  PackedGraph pg = packGraph(extractCdfg(p));
  PackedGraph pf = pg;
  for (int &r : pf.edge_rel)
    if (r % 2 == 1) r -= 1;  // clear the back bit
  Batch b0 = makeBatch({&pg});
  Batch b1 = makeBatch({&pf});
  TensorD h = rows(std::vector<double>(pg.num_nodes, 1.0));

  GcnLayer<double> gcn = GcnLayer<double>::create(testRng(), "t");
  CHECK(gcn.forward(h, b0).value().isApprox(gcn.forward(h, b1).value(), 1e-12));
  SageLayer<double> sage = SageLayer<double>::create(testRng(), "t");
  CHECK(sage.forward(h, b0).value().isApprox(sage.forward(h, b1).value(), 1e-12));
  GinLayer<double> gin = GinLayer<double>::create(testRng(), "t");
  CHECK(gin.forward(h, b0).value().isApprox(gin.forward(h, b1).value(), 1e-12));
  PnaLayer<double> pna = PnaLayer<double>::create(testRng(), "t", 1.0);
  CHECK(pna.forward(h, b0).value().isApprox(pna.forward(h, b1).value(), 1e-12));
  RgcnLayer<double> rgcn = RgcnLayer<double>::create(testRng(), "t");
  CHECK(!rgcn.forward(h, b0).value().isApprox(rgcn.forward(h, b1).value(), 1e-12));
}

TEST_CASE("packGraph: sentinel encodings and knowledge buckets") {
  IrGraph g;
  g.id = "s";
  g.kind = GraphKind::CDFG;
  g.nodes.push_back(opNode("a", Opcode::Mul, 32));
  g.nodes.back().features.is_start_of_path = 1;
  IrNode blk;
  blk.id = "blk";
  blk.features.node_type = NodeType::Block;
  blk.features.opcode = Opcode::Block;
  blk.features.opcode_type = OpcodeType::Misc;
  blk.features.bitwidth = kBitwidthMisc;
  blk.features.is_start_of_path = kStartMisc;
  blk.features.cluster_group = -1;
  g.nodes.push_back(blk);
  PackedGraph pg = packGraph(g);
  CHECK(pg.bitwidth[1] == 257);       // misc
  CHECK(pg.cluster[1] == 0);          // -1 maps to index 0
  CHECK(pg.start[1] == kStartMisc);
  CHECK(!pg.has_node_labels);
  // Labeled node: bucket is 1 + floor(log2(count)).
  CHECK(countBucket(0) == 0);
  CHECK(countBucket(1) == 1);
  CHECK(countBucket(2) == 2);
  CHECK(countBucket(3) == 2);
  CHECK(countBucket(1 << 14) == 15);
  CHECK(countBucket(1 << 20) == 15);
}

TEST_CASE("model: all five kinds emit 300-dim states and match node/graph") {
  Rng rng(0x51);
  IrGraph g = labelAll(randomDag(rng, 8), defaultRules());
  PackedGraph pg = packGraph(g);
  Batch b = makeBatch({&pg});
  for (GnnLayerKind k : {GnnLayerKind::GCN, GnnLayerKind::SAGE,
                         GnnLayerKind::GIN, GnnLayerKind::RGCN,
                         GnnLayerKind::PNA}) {
    GnnConfig cfg;
    cfg.layer = k;
    cfg.out_dim = 1;
    GnnModel<double> m = GnnModel<double>::create(cfg, 7);
    TensorD states = m.nodeStates(b, nullptr);
    CHECK(states.value().rows() == pg.num_nodes);
    CHECK(states.value().cols() == kHiddenDim);
    CHECK(m.forwardGraph(b).value().rows() == 1);
    CHECK(m.forwardNodes(b).value().rows() == pg.num_nodes);
  }
}
