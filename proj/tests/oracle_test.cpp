//===- oracle_test.cpp - Surrogate cost model tests -----------------------===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include <cmath>
#include <fstream>

#include "doctest.h"
#include "irperf/oracle.hpp"
#include "test_util.hpp"

using namespace irperf;
using namespace irperf::testutil;

namespace {

NodeFeatures feat(Opcode op, int bw) {
  NodeFeatures f;
  f.node_type = NodeType::Operation;
  f.opcode = op;
  f.opcode_type = opcodeCategory(op);
  f.bitwidth = f.opcode_type == OpcodeType::Control ? 0 : bw;
  f.is_start_of_path = 1;
  return f;
}

}  // namespace

TEST_CASE("label_node: wide mul uses DSP and LUT") {
  NodeResourceLabel l = labelNode(feat(Opcode::Mul, 32), defaultRules());
  CHECK(l.uses_dsp);
  CHECK(l.uses_lut);
  CHECK(l.dsp_count == 2);  // ceil(32/18)
  CHECK(!l.uses_ff);
}

TEST_CASE("label_node: narrow mul is LUT-only") {
  NodeResourceLabel l = labelNode(feat(Opcode::Mul, 8), defaultRules());
  CHECK(!l.uses_dsp);
  CHECK(l.uses_lut);
  CHECK(l.lut_count == 16);  // 2 * bitwidth at or below the DSP threshold
}

TEST_CASE("label_node: partselect uses FF only") {
  NodeResourceLabel l = labelNode(feat(Opcode::PartSelect, 32), defaultRules());
  CHECK(!l.uses_dsp);
  CHECK(!l.uses_lut);
  CHECK(l.uses_ff);
  CHECK(l.ff_count == 8);  // ceil(32/4)
}

TEST_CASE("label_node: control nodes use nothing") {
  for (Opcode op : {Opcode::Br, Opcode::Ret}) {
    NodeResourceLabel l = labelNode(feat(op, 0), defaultRules());
    CHECK(!l.uses_dsp);
    CHECK(!l.uses_lut);
    CHECK(!l.uses_ff);
    CHECK(l.dsp_count + l.lut_count + l.ff_count == 0);
  }
}

TEST_CASE("label_node: add 16 is lut=16 only; sdiv 32 uses DSP too") {
  NodeResourceLabel add = labelNode(feat(Opcode::Add, 16), defaultRules());
  CHECK(add.lut_count == 16);
  CHECK(add.dsp_count == 0);
  CHECK(add.ff_count == 0);

  NodeResourceLabel div = labelNode(feat(Opcode::SDiv, 32), defaultRules());
  CHECK(div.uses_dsp);
  CHECK(div.lut_count == 256);  // 8 * bitwidth
}

TEST_CASE("label_node flags are exactly count > 0 across the vocabulary") {
  CostRules rules = defaultRules();
  for (int op = 0; op < kNumOpcodes; ++op)
    for (int bw : {1, 8, 16, 32, 64, 256}) {
      NodeResourceLabel l =
          labelNode(feat(static_cast<Opcode>(op), bw), rules);
      CHECK(l.uses_dsp == (l.dsp_count > 0));
      CHECK(l.uses_lut == (l.lut_count > 0));
      CHECK(l.uses_ff == (l.ff_count > 0));
    }
}

TEST_CASE("critical_path: single node, diamond, back-edge exclusion") {
  IrGraph one;
  one.id = "one";
  one.nodes.push_back(opNode("a", Opcode::Add, 32));
  fixStarts(one);
  auto [len1, path1] = criticalPath(one, {2.5});
  CHECK(len1 == doctest::Approx(2.5));
  CHECK(path1 == std::vector<int>{0});

  // Source -> two arms (5 vs 2) -> sink, all with source delay 1, sink 1.
  IrGraph di;
  di.id = "d";
  di.nodes = {opNode("s", Opcode::Add, 32), opNode("l", Opcode::Add, 32),
              opNode("r", Opcode::Add, 32), opNode("t", Opcode::Add, 32)};
  di.edges = {dataEdge(0, 1), dataEdge(0, 2), dataEdge(1, 3), dataEdge(2, 3)};
  fixStarts(di);
  auto [len2, path2] = criticalPath(di, {1.0, 5.0, 2.0, 1.0});
  CHECK(len2 == doctest::Approx(7.0));
  CHECK(path2 == std::vector<int>{0, 1, 3});

  IrGraph loop;
  loop.id = "l";
  loop.kind = GraphKind::CDFG;
  loop.nodes = {opNode("a", Opcode::Add, 32), opNode("b", Opcode::Add, 32)};
  loop.edges = {dataEdge(0, 1), dataEdge(1, 0, /*back=*/true)};
  fixStarts(loop);
  auto [len3, path3] = criticalPath(loop, {1.0, 10.0});
  CHECK(len3 == doctest::Approx(11.0));
  CHECK(path3 == std::vector<int>{0, 1});  // back edge never extends a path
}

TEST_CASE("label_graph: 3-op chain with alpha=beta=0 sums delays") {
  CostRules rules = defaultRules();
  rules.alpha_lut = 0.0;
  rules.beta_ff = 0.0;
  rules.delay_override.assign(kNumOpcodes, -1.0);
  rules.delay_override[static_cast<int>(Opcode::Add)] = 1.0;
  rules.delay_override[static_cast<int>(Opcode::Sub)] = 2.0;
  rules.delay_override[static_cast<int>(Opcode::Xor)] = 3.0;
  IrGraph g;
  g.id = "chain";
  g.nodes = {opNode("a", Opcode::Add, 8), opNode("b", Opcode::Sub, 8),
             opNode("c", Opcode::Xor, 8)};
  g.edges = {dataEdge(0, 1), dataEdge(1, 2)};
  fixStarts(g);
  CHECK(labelGraph(g, rules).cp_ns == doctest::Approx(6.0));
}

TEST_CASE("label_graph: no mul/div means dsp = 0") {
  IrGraph g;
  g.id = "g";
  g.nodes = {opNode("a", Opcode::Add, 32), opNode("b", Opcode::Xor, 16)};
  g.edges = {dataEdge(0, 1)};
  fixStarts(g);
  CHECK(labelGraph(g, defaultRules()).dsp == 0);
}

TEST_CASE("critical_path matches brute-force enumeration (500 random DAGs)") {
  Rng rng(0xcafe);
  CostRules rules = defaultRules();
  for (int trial = 0; trial < 500; ++trial) {
    IrGraph g = randomDag(rng, 12);
    std::vector<double> delays;
    for (const IrNode &n : g.nodes) delays.push_back(rules.delay(n.features.opcode));
    auto [len, path] = criticalPath(g, delays);
    CHECK(len == doctest::Approx(bruteForceCriticalPath(g, delays)).epsilon(1e-12));
    // Witness path is a real path with the claimed length.
    double sum = 0.0;
    for (int v : path) sum += delays[v];
    CHECK(sum == doctest::Approx(len).epsilon(1e-12));
  }
}

TEST_CASE("determinism: labeling twice is bit-identical") {
  Rng rng(0xbeef);
  IrGraph g = randomDag(rng, 12);
  IrGraph a = labelAll(g, defaultRules());
  IrGraph b = labelAll(g, defaultRules());
  CHECK(a == b);
}

TEST_CASE("monotonicity: adding an op node never decreases totals") {
  Rng rng(0x77);
  CostRules rules = defaultRules();
  for (int trial = 0; trial < 100; ++trial) {
    IrGraph g = randomDag(rng, 10);
    GraphLabels before = labelGraph(g, rules);
    IrGraph h = g;
    h.nodes.push_back(opNode("extra", Opcode::Mul, 64));
    if (!h.nodes.empty() && rng.chance(0.7) && h.nodes.size() >= 2)
      h.edges.push_back(
          dataEdge(static_cast<int>(rng.below(h.nodes.size() - 1)),
                   static_cast<int>(h.nodes.size() - 1)));
    fixStarts(h);
    GraphLabels after = labelGraph(h, rules);
    CHECK(after.dsp >= before.dsp);
    CHECK(after.lut >= before.lut);
    CHECK(after.ff >= before.ff);
    CHECK(after.cp_ns >= before.cp_ns);
  }
}

TEST_CASE("rules file: overrides apply, unknown keys rejected") {
  {
    std::ofstream out("/tmp/irperf_rules_test.cfg");
    out << "# test overrides\nalpha_lut = 0\nbeta_ff = 0\ndelay.add = 9.5\n";
  }
  CostRules r = loadRules("/tmp/irperf_rules_test.cfg");
  CHECK(r.alpha_lut == 0.0);
  CHECK(r.delay(Opcode::Add) == doctest::Approx(9.5));
  CHECK(r.delay(Opcode::Sub) == doctest::Approx(defaultRules().delay(Opcode::Sub)));
  {
    std::ofstream out("/tmp/irperf_rules_bad.cfg");
    out << "wombat = 3\n";
  }
  CHECK_THROWS_AS(loadRules("/tmp/irperf_rules_bad.cfg"), Error);
  CHECK_THROWS_AS(loadRules("/tmp/no_such_rules_file.cfg"), Error);
}
