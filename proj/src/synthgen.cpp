//===- synthgen.cpp - Random MiniC program generator ----------------------===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "irperf/synthgen.hpp"

#include <algorithm>

namespace irperf {

namespace {

// Opcodes the generator may emit as block-body instructions.
const Opcode kBodyOps[] = {
    Opcode::Add,  Opcode::Sub,  Opcode::Mul,  Opcode::SDiv, Opcode::UDiv,
    Opcode::And,  Opcode::Or,   Opcode::Xor,  Opcode::Shl,  Opcode::LShr,
    Opcode::ICmp, Opcode::Mux,  Opcode::Load, Opcode::Store,
    Opcode::ZExt, Opcode::Trunc, Opcode::PartSelect, Opcode::GetElementPtr};

uint64_t subSeed(uint64_t seed, uint64_t index) {
  // One SplitMix64 mixing round over (seed, index).
  uint64_t z = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct WeightTable {
  std::vector<Opcode> ops;
  std::vector<double> weights;
};

WeightTable bodyWeights(const GenProfile &p) {
  WeightTable t;
  for (Opcode op : kBodyOps) {
    auto it = p.op_weights.find(op);
    double w = it == p.op_weights.end() ? 0.0 : it->second;
    if (w > 0.0) {
      t.ops.push_back(op);
      t.weights.push_back(w);
    }
  }
  return t;
}

int drawBitwidth(const GenProfile &p, Rng &rng) {
  std::vector<double> w;
  for (auto &[bw, weight] : p.bitwidth_choices) w.push_back(weight);
  return p.bitwidth_choices[rng.weighted(w)].first;
}

int opArity(Opcode op) {
  switch (op) {
    case Opcode::Load:
    case Opcode::PartSelect:
    case Opcode::ZExt:
    case Opcode::Trunc:
      return 1;
    case Opcode::Mux:
      return 3;
    default:
      return 2;
  }
}

class ProgramBuilder {
public:
  ProgramBuilder(const GenProfile &profile, Rng rng)
      : profile_(profile), rng_(rng), table_(bodyWeights(profile)) {}

  void makeParams(MiniProgram &p) {
    int count = static_cast<int>(rng_.range(2, 5));
    for (int i = 0; i < count; ++i) {
      std::string name = "a" + std::to_string(i);
      p.params.emplace_back(name, drawBitwidth(profile_, rng_));
      param_pool_.push_back(name);
    }
  }

  Operand pickOperand(const std::vector<std::string> &pool, bool allow_literal) {
    Operand o;
    if (allow_literal && (pool.empty() || rng_.chance(0.15))) {
      o.is_literal = true;
      o.value = rng_.range(0, 255);
      return o;
    }
    o.var = pool[rng_.below(pool.size())];
    return o;
  }

  /// Appends `count` body instructions to `bb`, reading from `pool` (params
  /// plus dominating definitions) and extending it with new definitions.
  void emitBody(BasicBlock &bb, std::vector<std::string> &pool, int count) {
    for (int i = 0; i < count; ++i) {
      Opcode op = table_.ops[rng_.weighted(table_.weights)];
      Instruction in;
      in.op = op;
      in.bitwidth = op == Opcode::ICmp ? 1 : drawBitwidth(profile_, rng_);
      int arity = opArity(op);
      if (op == Opcode::Store) {
        in.operands.push_back(pickOperand(pool, true));
        in.operands.push_back(pickOperand(pool, false));  // address
      } else if (op == Opcode::Load) {
        in.operands.push_back(pickOperand(pool, false));  // address
      } else {
        for (int k = 0; k < arity; ++k)
          in.operands.push_back(pickOperand(pool, true));
      }
      if (op != Opcode::Store) {
        in.dest = "t" + std::to_string(next_temp_++);
        pool.push_back(in.dest);
      }
      bb.instructions.push_back(std::move(in));
    }
  }

  std::string freshTemp() { return "t" + std::to_string(next_temp_++); }

  const GenProfile &profile_;
  Rng rng_;
  WeightTable table_;
  std::vector<std::string> param_pool_;
  int next_temp_ = 0;
};

}  // namespace

GenProfile defaultProfile() {
  GenProfile p;
  p.op_weights = {{Opcode::Add, 4},  {Opcode::Sub, 4},  {Opcode::Mul, 3},
                  {Opcode::SDiv, 1}, {Opcode::And, 2},  {Opcode::Or, 2},
                  {Opcode::Xor, 2},  {Opcode::Shl, 1},  {Opcode::LShr, 1},
                  {Opcode::Load, 2}, {Opcode::Store, 1}, {Opcode::ICmp, 1},
                  {Opcode::Mux, 1},  {Opcode::ZExt, 1}, {Opcode::Trunc, 1}};
  p.bitwidth_choices = {{8, 1}, {16, 2}, {32, 4}, {64, 1}};
  p.min_instructions = 5;
  p.max_instructions = 60;
  p.min_loops = 1;
  p.max_loops = 3;
  p.branch_probability = 0.3;
  return p;
}

GenProfile generalizationProfile() {
  GenProfile p = defaultProfile();
  p.op_weights[Opcode::SDiv] = 3;
  p.op_weights[Opcode::Mul] = 1;
  p.min_instructions = 40;
  p.max_instructions = 120;
  return p;
}

void validateProfile(const GenProfile &p) {
  auto arithWeight = [&](Opcode op) {
    auto it = p.op_weights.find(op);
    return it == p.op_weights.end() ? 0.0 : it->second;
  };
  double arith = arithWeight(Opcode::Add) + arithWeight(Opcode::Sub) +
                 arithWeight(Opcode::Mul) + arithWeight(Opcode::SDiv) +
                 arithWeight(Opcode::UDiv);
  if (arith <= 0.0)
    throw Error("profile: no arithmetic opcode has positive weight");
  for (auto &[op, w] : p.op_weights)
    if (w < 0.0) throw Error("profile: negative weight");
  if (p.bitwidth_choices.empty()) throw Error("profile: no bitwidth choices");
  if (p.min_instructions > p.max_instructions || p.min_instructions < 1)
    throw Error("profile: bad instruction bounds");
  if (p.min_loops > p.max_loops || p.min_loops < 1)
    throw Error("profile: bad loop bounds");
  if (p.branch_probability < 0.0 || p.branch_probability > 1.0)
    throw Error("profile: branch probability out of [0,1]");
}

std::vector<MiniProgram> genStraightline(const GenProfile &profile, int n) {
  validateProfile(profile);
  std::vector<MiniProgram> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    ProgramBuilder b(profile, Rng(subSeed(profile.seed, i)));
    MiniProgram p;
    p.name = "dfg_" + std::to_string(profile.seed) + "_" + std::to_string(i);
    b.makeParams(p);
    BasicBlock bb;
    bb.id = "entry";
    std::vector<std::string> pool = b.param_pool_;
    int count = static_cast<int>(
        b.rng_.range(profile.min_instructions, profile.max_instructions));
    b.emitBody(bb, pool, count);
    Instruction ret;
    ret.op = Opcode::Ret;
    ret.bitwidth = 0;
    Operand rv;
    rv.var = pool.back();
    ret.operands.push_back(rv);
    bb.instructions.push_back(ret);
    p.blocks.push_back(std::move(bb));
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<MiniProgram> genLooping(const GenProfile &profile, int n) {
  validateProfile(profile);
  std::vector<MiniProgram> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    ProgramBuilder b(profile, Rng(subSeed(profile.seed, i)));
    MiniProgram p;
    p.name = "cdfg_" + std::to_string(profile.seed) + "_" + std::to_string(i);
    b.makeParams(p);

    const int loops =
        static_cast<int>(b.rng_.range(profile.min_loops, profile.max_loops));
    // Pool of definitions visible at each header (headers dominate everything
    // that follows them; body definitions do not escape their loop).
    std::vector<std::string> header_pool = b.param_pool_;
    struct PendingEdge {
      std::string from, to;
      BranchKind kind;
    };
    std::vector<PendingEdge> edges;
    auto blockIndex = [&p](const std::string &id) {
      for (size_t k = 0; k < p.blocks.size(); ++k)
        if (p.blocks[k].id == id) return static_cast<int>(k);
      throw Error("internal: unknown block " + id);
    };

    for (int l = 0; l < loops; ++l) {
      std::string hdr = "h" + std::to_string(l);
      std::string body = "b" + std::to_string(l);
      std::string next = l + 1 < loops ? "h" + std::to_string(l + 1) : "exit";
      // Header: loop condition only.
      BasicBlock hb;
      hb.id = hdr;
      Instruction cmp;
      cmp.op = Opcode::ICmp;
      cmp.bitwidth = 1;
      cmp.dest = b.freshTemp();
      cmp.operands.push_back(b.pickOperand(header_pool, false));
      cmp.operands.push_back(b.pickOperand(header_pool, true));
      hb.instructions.push_back(cmp);
      Instruction term;
      term.op = Opcode::Br;
      term.bitwidth = 0;
      Operand cond;
      cond.var = cmp.dest;
      term.operands.push_back(cond);
      hb.instructions.push_back(term);
      edges.push_back({hdr, body, BranchKind::IfTrue});
      edges.push_back({hdr, next, BranchKind::IfFalse});
      header_pool.push_back(cmp.dest);
      p.blocks.push_back(std::move(hb));

      const bool diamond = b.rng_.chance(profile.branch_probability);
      std::vector<std::string> body_pool = header_pool;
      int count = static_cast<int>(
          b.rng_.range(profile.min_instructions, profile.max_instructions));
      BasicBlock bb;
      bb.id = body;
      if (!diamond) {
        b.emitBody(bb, body_pool, count);
        Instruction back;
        back.op = Opcode::Br;
        back.bitwidth = 0;
        bb.instructions.push_back(back);
        edges.push_back({body, hdr, BranchKind::Uncond});
        p.blocks.push_back(std::move(bb));
      } else {
        // body -> (then | else) -> join -> header
        std::string thn = "t" + body, els = "e" + body, join = "j" + body;
        b.emitBody(bb, body_pool, std::max(1, count / 2));
        Instruction c2;
        c2.op = Opcode::ICmp;
        c2.bitwidth = 1;
        c2.dest = b.freshTemp();
        c2.operands.push_back(b.pickOperand(body_pool, false));
        c2.operands.push_back(b.pickOperand(body_pool, true));
        bb.instructions.push_back(c2);
        body_pool.push_back(c2.dest);
        Instruction bterm;
        bterm.op = Opcode::Br;
        bterm.bitwidth = 0;
        Operand c2o;
        c2o.var = c2.dest;
        bterm.operands.push_back(c2o);
        bb.instructions.push_back(bterm);
        edges.push_back({body, thn, BranchKind::IfTrue});
        edges.push_back({body, els, BranchKind::IfFalse});
        p.blocks.push_back(std::move(bb));

        for (const std::string &arm : {thn, els}) {
          BasicBlock ab;
          ab.id = arm;
          std::vector<std::string> arm_pool = body_pool;
          b.emitBody(ab, arm_pool, std::max(1, count / 4));
          Instruction aterm;
          aterm.op = Opcode::Br;
          aterm.bitwidth = 0;
          ab.instructions.push_back(aterm);
          edges.push_back({arm, join, BranchKind::Uncond});
          p.blocks.push_back(std::move(ab));
        }

        BasicBlock jb;
        jb.id = join;
        std::vector<std::string> join_pool = body_pool;  // arms do not escape
        b.emitBody(jb, join_pool, std::max(1, count / 4));
        Instruction jterm;
        jterm.op = Opcode::Br;
        jterm.bitwidth = 0;
        jb.instructions.push_back(jterm);
        edges.push_back({join, hdr, BranchKind::Uncond});
        p.blocks.push_back(std::move(jb));
      }
    }

    BasicBlock ex;
    ex.id = "exit";
    Instruction ret;
    ret.op = Opcode::Ret;
    ret.bitwidth = 0;
    Operand rv;
    rv.var = header_pool.back();
    ret.operands.push_back(rv);
    ex.instructions.push_back(ret);
    p.blocks.push_back(std::move(ex));

    for (const PendingEdge &e : edges)
      p.block_successors.push_back(
          {blockIndex(e.from), blockIndex(e.to), e.kind});
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace irperf
