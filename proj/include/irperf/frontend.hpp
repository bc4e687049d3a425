//===- frontend.hpp - MiniC parsing and graph extraction --------*- C++ -*-===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// A small SSA language of basic blocks ("MiniC", grammar in docs/minic.ebnf),
// parsed into MiniProgram and lowered to DFGs (single block) or CDFGs
// (multi-block with loops/branches).
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irperf/graph.hpp"

namespace irperf {

struct Operand {
  bool is_literal = false;
  std::string var;        // when !is_literal
  int64_t value = 0;      // when is_literal

  bool operator==(const Operand &) const = default;
};

struct Instruction {
  std::string dest;  // empty for store/br/ret
  Opcode op = Opcode::Add;
  std::vector<Operand> operands;
  int bitwidth = 32;  // 0 for br/ret

  bool operator==(const Instruction &) const = default;
};

struct BasicBlock {
  std::string id;
  std::vector<Instruction> instructions;  // terminator last

  bool operator==(const BasicBlock &) const = default;
};

enum class BranchKind { Uncond, IfTrue, IfFalse };

struct BlockSuccessor {
  int from = -1;  // block indices
  int to = -1;
  BranchKind kind = BranchKind::Uncond;

  bool operator==(const BlockSuccessor &) const = default;
};

struct MiniProgram {
  std::string name;
  std::vector<std::pair<std::string, int>> params;  // (name, bitwidth)
  std::vector<BasicBlock> blocks;                   // blocks[0] is the entry
  std::vector<BlockSuccessor> block_successors;

  bool operator==(const MiniProgram &) const = default;
};

/// Parses MiniC source. Throws Error with line:column on syntax errors,
/// use-before-def, duplicate definitions, or unreachable blocks.
MiniProgram parse(const std::string &source_text);

/// Renders a MiniProgram back to MiniC text (parse round-trips it).
std::string render(const MiniProgram &program);

/// Lowers a single-block, ret-terminated program to a DFG. One node per
/// instruction, param, and distinct literal; data edges from definitions to
/// uses; memory-dependence edges chain stores with later memory ops.
IrGraph extractDfg(const MiniProgram &program);

/// Lowers any valid program to a CDFG: per-block DFGs, one block node per
/// basic block, control edges (block->block and block->member instruction),
/// and cross-block data edges. Control edges closing a cycle in the DFS over
/// block successors are flagged as back edges.
IrGraph extractCdfg(const MiniProgram &program);

}  // namespace irperf
