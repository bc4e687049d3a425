//===- frontend.cpp - MiniC parser and DFG/CDFG extraction ----------------===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "irperf/frontend.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace irperf {

namespace {

struct Token {
  enum Kind { Ident, Number, Punct, End } kind = End;
  std::string text;
  int64_t value = 0;
  int line = 0, col = 0;
};

class Lexer {
public:
  explicit Lexer(const std::string &src) : src_(src) {}

  Token next() {
    skipWs();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= src_.size()) {
      t.kind = Token::End;
      return t;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_'))
        advance();
      t.kind = Token::Ident;
      t.text = src_.substr(start, pos_ - start);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        advance();
      t.kind = Token::Number;
      t.text = src_.substr(start, pos_ - start);
      t.value = std::stoll(t.text);
      return t;
    }
    if (std::string("(){},:=;").find(c) != std::string::npos) {
      t.kind = Token::Punct;
      t.text = std::string(1, c);
      advance();
      return t;
    }
    throw Error(loc() + ": unexpected character '" + std::string(1, c) + "'");
  }

  std::string loc() const {
    return std::to_string(line_) + ":" + std::to_string(col_);
  }

private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skipWs() {
    for (;;) {
      while (pos_ < src_.size() &&
             std::isspace(static_cast<unsigned char>(src_[pos_])))
        advance();
      // '#' comments run to end of line
      if (pos_ < src_.size() && src_[pos_] == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      break;
    }
  }

  const std::string &src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

std::string tokLoc(const Token &t) {
  return std::to_string(t.line) + ":" + std::to_string(t.col);
}

// Opcodes that may appear on the right-hand side of an assignment.
bool isComputeOpcode(Opcode op) {
  switch (op) {
    case Opcode::Store:
    case Opcode::Br:
    case Opcode::Ret:
    case Opcode::Const:
    case Opcode::Param:
    case Opcode::Block:
      return false;
    default:
      return true;
  }
}

int opcodeArity(Opcode op) {
  switch (op) {
    case Opcode::Load:
    case Opcode::PartSelect:
    case Opcode::ZExt:
    case Opcode::Trunc:
      return 1;
    case Opcode::Mux:
      return 3;
    case Opcode::Store:
      return 2;
    default:
      return 2;  // binary arithmetic/bitwise/icmp/getelementptr/phi
  }
}

class Parser {
public:
  explicit Parser(const std::string &src) : lex_(src) {
    cur_ = lex_.next();
    peek_ = lex_.next();
  }

  MiniProgram run() {
    expectIdent("func");
    MiniProgram p;
    p.name = expectAnyIdent("function name");
    expectPunct("(");
    if (!isPunct(")")) {
      for (;;) {
        std::string pname = expectAnyIdent("parameter name");
        int bw = 32;
        if (isPunct(":")) {
          bump();
          bw = expectBitwidth();
        }
        if (!defined_.insert(pname).second)
          throw Error(tokLoc(cur_) + ": duplicate definition of '" + pname + "'");
        p.params.emplace_back(pname, bw);
        if (isPunct(",")) {
          bump();
          continue;
        }
        break;
      }
    }
    expectPunct(")");
    expectPunct("{");
    while (!isPunct("}")) parseBlock(p);
    expectPunct("}");
    if (cur_.kind != Token::End)
      throw Error(tokLoc(cur_) + ": trailing input after function body");
    finish(p);
    return p;
  }

private:
  void bump() {
    cur_ = peek_;
    peek_ = lex_.next();
  }

  bool isPunct(const std::string &s) const {
    return cur_.kind == Token::Punct && cur_.text == s;
  }

  void expectPunct(const std::string &s) {
    if (!isPunct(s))
      throw Error(tokLoc(cur_) + ": expected '" + s + "', got '" + cur_.text +
                  "'");
    bump();
  }

  void expectIdent(const std::string &s) {
    if (cur_.kind != Token::Ident || cur_.text != s)
      throw Error(tokLoc(cur_) + ": expected '" + s + "'");
    bump();
  }

  std::string expectAnyIdent(const std::string &what) {
    if (cur_.kind != Token::Ident)
      throw Error(tokLoc(cur_) + ": expected " + what);
    std::string s = cur_.text;
    bump();
    return s;
  }

  int expectBitwidth() {
    if (cur_.kind != Token::Number)
      throw Error(tokLoc(cur_) + ": expected bitwidth");
    int64_t v = cur_.value;
    if (v < 1 || v > 256)
      throw Error(tokLoc(cur_) + ": bitwidth out of range [1,256]");
    bump();
    return static_cast<int>(v);
  }

  Operand parseOperand() {
    Operand o;
    if (cur_.kind == Token::Number) {
      o.is_literal = true;
      o.value = cur_.value;
      bump();
      return o;
    }
    if (cur_.kind == Token::Ident) {
      o.var = cur_.text;
      uses_.emplace_back(o.var, tokLoc(cur_));
      bump();
      return o;
    }
    throw Error(tokLoc(cur_) + ": expected operand");
  }

  void parseBlock(MiniProgram &p) {
    std::string label = expectAnyIdent("block label");
    expectPunct(":");
    if (labels_.count(label))
      throw Error(tokLoc(cur_) + ": duplicate block label '" + label + "'");
    labels_[label] = static_cast<int>(p.blocks.size());
    BasicBlock bb;
    bb.id = label;
    bool terminated = false;
    while (!terminated) {
      if (cur_.kind != Token::Ident)
        throw Error(tokLoc(cur_) + ": expected statement");
      if (cur_.text == "br") {
        Token at = cur_;
        bump();
        Instruction in;
        in.op = Opcode::Br;
        in.bitwidth = 0;
        // Forms: "br cond l1 l2" | "br l". After "br l" the next token is
        // either '}' or a label definition "ident ':'", so a following bare
        // identifier means the conditional form.
        Token first = cur_;
        if (first.kind != Token::Ident)
          throw Error(tokLoc(first) + ": expected branch operand or label");
        std::string a = expectAnyIdent("branch target");
        bool conditional = cur_.kind == Token::Ident &&
                           !(peek_.kind == Token::Punct && peek_.text == ":");
        if (conditional) {
          Operand cond;
          cond.var = a;
          uses_.emplace_back(a, tokLoc(first));
          in.operands.push_back(cond);
          std::string l1 = expectAnyIdent("branch target");
          std::string l2 = expectAnyIdent("branch target");
          pending_succ_.push_back({bb.id, l1, BranchKind::IfTrue, tokLoc(at)});
          pending_succ_.push_back({bb.id, l2, BranchKind::IfFalse, tokLoc(at)});
        } else {
          pending_succ_.push_back({bb.id, a, BranchKind::Uncond, tokLoc(at)});
        }
        bb.instructions.push_back(in);
        terminated = true;
      } else if (cur_.text == "ret") {
        bump();
        Instruction in;
        in.op = Opcode::Ret;
        in.bitwidth = 0;
        in.operands.push_back(parseOperand());
        bb.instructions.push_back(in);
        terminated = true;
      } else if (cur_.text == "store") {
        bump();
        Instruction in;
        in.op = Opcode::Store;
        in.operands.push_back(parseOperand());
        in.operands.push_back(parseOperand());
        if (isPunct(":")) {
          bump();
          in.bitwidth = expectBitwidth();
        }
        bb.instructions.push_back(in);
      } else {
        Token dt = cur_;
        std::string dest = expectAnyIdent("destination");
        expectPunct("=");
        std::string opname = expectAnyIdent("opcode");
        Opcode op = opcodeFromName(opname);
        if (!isComputeOpcode(op))
          throw Error(tokLoc(dt) + ": opcode '" + opname +
                      "' cannot be assigned");
        Instruction in;
        in.dest = dest;
        in.op = op;
        int arity = opcodeArity(op);
        for (int i = 0; i < arity; ++i) in.operands.push_back(parseOperand());
        if (isPunct(":")) {
          bump();
          in.bitwidth = expectBitwidth();
        } else {
          in.bitwidth = op == Opcode::ICmp ? 1 : 32;
        }
        if (!defined_.insert(dest).second)
          throw Error(tokLoc(dt) + ": duplicate definition of '" + dest + "'");
        def_order_.push_back(dest);
        bb.instructions.push_back(in);
      }
      if (cur_.kind == Token::Punct && cur_.text == ";") bump();
    }
    p.blocks.push_back(std::move(bb));
  }

  void finish(MiniProgram &p) {
    if (p.blocks.empty()) throw Error("program has no blocks");
    // Per-statement SSA ordering inside a block and global definedness.
    std::unordered_set<std::string> param_names;
    for (auto &[n, bw] : p.params) param_names.insert(n);
    for (auto &[var, loc] : uses_) {
      if (!param_names.count(var) && !defined_.count(var))
        throw Error(loc + ": use of undefined variable '" + var + "'");
    }
    // Same-block use-before-def.
    std::unordered_map<std::string, std::pair<int, int>> def_site;  // blk, idx
    for (size_t b = 0; b < p.blocks.size(); ++b)
      for (size_t i = 0; i < p.blocks[b].instructions.size(); ++i)
        if (!p.blocks[b].instructions[i].dest.empty())
          def_site[p.blocks[b].instructions[i].dest] = {static_cast<int>(b),
                                                        static_cast<int>(i)};
    for (size_t b = 0; b < p.blocks.size(); ++b)
      for (size_t i = 0; i < p.blocks[b].instructions.size(); ++i)
        for (const Operand &o : p.blocks[b].instructions[i].operands)
          if (!o.is_literal && !param_names.count(o.var)) {
            auto it = def_site.find(o.var);
            if (it != def_site.end() && it->second.first == static_cast<int>(b) &&
                it->second.second >= static_cast<int>(i))
              throw Error("use of '" + o.var + "' before its definition in block " +
                          p.blocks[b].id);
          }
    // Resolve branch targets.
    for (auto &[from, to, kind, loc] : pending_succ_) {
      auto fit = labels_.find(from);
      auto tit = labels_.find(to);
      if (tit == labels_.end())
        throw Error(loc + ": branch to unknown label '" + to + "'");
      p.block_successors.push_back({fit->second, tit->second, kind});
    }
    // Reachability from the entry block.
    std::vector<char> reach(p.blocks.size(), 0);
    std::vector<int> stack{0};
    reach[0] = 1;
    while (!stack.empty()) {
      int b = stack.back();
      stack.pop_back();
      for (const BlockSuccessor &s : p.block_successors)
        if (s.from == b && !reach[s.to]) {
          reach[s.to] = 1;
          stack.push_back(s.to);
        }
    }
    for (size_t b = 0; b < p.blocks.size(); ++b)
      if (!reach[b])
        throw Error("block '" + p.blocks[b].id + "' unreachable from entry");
  }

  struct PendingSucc {
    std::string from, to;
    BranchKind kind;
    std::string loc;
  };

  Lexer lex_;
  Token cur_, peek_;
  std::unordered_set<std::string> defined_;
  std::vector<std::string> def_order_;
  std::unordered_map<std::string, int> labels_;
  std::vector<std::pair<std::string, std::string>> uses_;  // (var, loc)
  std::vector<PendingSucc> pending_succ_;
};

}  // namespace

MiniProgram parse(const std::string &source_text) {
  return Parser(source_text).run();
}

std::string render(const MiniProgram &p) {
  std::ostringstream os;
  os << "func " << p.name << "(";
  for (size_t i = 0; i < p.params.size(); ++i) {
    if (i) os << ", ";
    os << p.params[i].first << ": " << p.params[i].second;
  }
  os << ") {\n";
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    const BasicBlock &bb = p.blocks[b];
    os << bb.id << ":\n";
    for (const Instruction &in : bb.instructions) {
      os << "  ";
      if (in.op == Opcode::Br) {
        os << "br";
        for (const Operand &o : in.operands) os << " " << o.var;
        for (const BlockSuccessor &s : p.block_successors)
          if (s.from == static_cast<int>(b)) os << " " << p.blocks[s.to].id;
        os << "\n";
        continue;
      }
      if (in.op == Opcode::Ret) {
        const Operand &o = in.operands[0];
        os << "ret ";
        if (o.is_literal)
          os << o.value;
        else
          os << o.var;
        os << "\n";
        continue;
      }
      if (!in.dest.empty()) os << in.dest << " = ";
      os << opcodeName(in.op);
      for (const Operand &o : in.operands) {
        os << " ";
        if (o.is_literal)
          os << o.value;
        else
          os << o.var;
      }
      os << " : " << in.bitwidth << "\n";
    }
  }
  os << "}\n";
  return os.str();
}

namespace {

struct Builder {
  IrGraph g;
  std::unordered_map<std::string, int> def_node;  // var -> node index

  int addNode(const std::string &id, NodeType nt, Opcode op, int bitwidth,
              int cluster) {
    NodeFeatures f;
    f.node_type = nt;
    f.opcode = op;
    f.opcode_type = opcodeCategory(op);
    f.bitwidth = bitwidth;
    f.cluster_group = cluster;
    f.is_start_of_path = 0;  // fixed up once edges exist
    g.nodes.push_back({id, f, std::nullopt});
    return static_cast<int>(g.nodes.size()) - 1;
  }

  void addEdge(int src, int dst, EdgeType et, bool back = false) {
    g.edges.push_back({src, dst, {et, back}});
  }

  // is_start_of_path = no incoming data edge; block nodes get misc.
  void finalizeStartOfPath() {
    std::vector<char> has_in(g.nodes.size(), 0);
    for (const IrEdge &e : g.edges)
      if (e.attr.edge_type == EdgeType::Data) has_in[e.dst] = 1;
    for (size_t i = 0; i < g.nodes.size(); ++i) {
      if (g.nodes[i].features.node_type == NodeType::Block)
        g.nodes[i].features.is_start_of_path = kStartMisc;
      else
        g.nodes[i].features.is_start_of_path = has_in[i] ? 0 : 1;
    }
  }
};

// Emits instruction nodes of one block, plus const nodes for its literal
// operands, data edges from in-scope definitions, and memory-dependence
// chain edges. Returns indices of the instruction nodes in order.
std::vector<int> emitBlock(Builder &b, const BasicBlock &bb, int block_idx,
                           int cluster, const std::string &const_suffix) {
  std::vector<int> instr_nodes;
  std::map<std::pair<int64_t, int>, int> const_nodes;  // (value,bw) -> node
  int last_mem = -1;
  bool last_mem_is_store = false;
  for (size_t i = 0; i < bb.instructions.size(); ++i) {
    const Instruction &in = bb.instructions[i];
    std::string nid = !in.dest.empty()
                          ? in.dest
                          : bb.id + "_i" + std::to_string(i);
    int idx = b.addNode(nid, NodeType::Operation, in.op, in.bitwidth, cluster);
    instr_nodes.push_back(idx);
    for (const Operand &o : in.operands) {
      int src;
      if (o.is_literal) {
        auto key = std::make_pair(o.value, in.bitwidth);
        auto it = const_nodes.find(key);
        if (it == const_nodes.end()) {
          std::string cid = "c" + std::to_string(o.value) + "_" +
                            std::to_string(in.bitwidth) + const_suffix;
          src = b.addNode(cid, NodeType::Misc, Opcode::Const, in.bitwidth,
                          cluster);
          const_nodes.emplace(key, src);
        } else {
          src = it->second;
        }
      } else {
        auto it = b.def_node.find(o.var);
        if (it == b.def_node.end())
          throw Error("operand '" + o.var + "' has no defining node");
        src = it->second;
      }
      b.addEdge(src, idx, EdgeType::Data);
    }
    if (!in.dest.empty()) b.def_node[in.dest] = idx;
    if (in.op == Opcode::Load || in.op == Opcode::Store) {
      bool is_store = in.op == Opcode::Store;
      if (last_mem >= 0 && (last_mem_is_store || is_store))
        b.addEdge(last_mem, idx, EdgeType::MemDep);
      last_mem = idx;
      last_mem_is_store = is_store;
    }
  }
  (void)block_idx;
  return instr_nodes;
}

}  // namespace

IrGraph extractDfg(const MiniProgram &program) {
  if (program.blocks.size() != 1)
    throw Error("extractDfg: program has " +
                std::to_string(program.blocks.size()) +
                " blocks; DFG extraction needs exactly one");
  const BasicBlock &bb = program.blocks[0];
  if (bb.instructions.empty() || bb.instructions.back().op != Opcode::Ret)
    throw Error("extractDfg: block must terminate with ret");

  Builder b;
  b.g.id = program.name;
  b.g.kind = GraphKind::DFG;
  for (const auto &[name, bw] : program.params)
    b.def_node[name] = b.addNode(name, NodeType::Port, Opcode::Param, bw, 0);
  emitBlock(b, bb, 0, /*cluster=*/0, "");
  b.finalizeStartOfPath();
  return b.g;
}

IrGraph extractCdfg(const MiniProgram &program) {
  if (program.blocks.empty()) throw Error("extractCdfg: no blocks");

  Builder b;
  b.g.id = program.name;
  b.g.kind = GraphKind::CDFG;
  for (const auto &[name, bw] : program.params)
    b.def_node[name] = b.addNode(name, NodeType::Port, Opcode::Param, bw, -1);

  // Block nodes first so control topology is explicit, then block bodies.
  std::vector<int> block_nodes;
  for (size_t bi = 0; bi < program.blocks.size(); ++bi)
    block_nodes.push_back(b.addNode("blk_" + program.blocks[bi].id,
                                    NodeType::Block, Opcode::Block,
                                    kBitwidthMisc, static_cast<int>(bi)));
  for (size_t bi = 0; bi < program.blocks.size(); ++bi) {
    std::vector<int> instrs =
        emitBlock(b, program.blocks[bi], static_cast<int>(bi),
                  static_cast<int>(bi), "_" + std::to_string(bi));
    for (int idx : instrs)
      b.addEdge(block_nodes[bi], idx, EdgeType::Control);
  }

  // Back edges: DFS over block successors from the entry; an edge to an
  // on-stack block closes a loop.
  const size_t nb = program.blocks.size();
  std::vector<std::vector<size_t>> succ_edges(nb);  // indices into successors
  for (size_t si = 0; si < program.block_successors.size(); ++si)
    succ_edges[program.block_successors[si].from].push_back(si);
  std::vector<char> on_stack(nb, 0), visited(nb, 0), is_back(
      program.block_successors.size(), 0);
  // Iterative DFS with explicit edge cursors.
  std::vector<std::pair<int, size_t>> stack;
  stack.emplace_back(0, 0);
  visited[0] = on_stack[0] = 1;
  while (!stack.empty()) {
    auto &[blk, cursor] = stack.back();
    if (cursor < succ_edges[blk].size()) {
      size_t si = succ_edges[blk][cursor++];
      int to = program.block_successors[si].to;
      if (on_stack[to]) {
        is_back[si] = 1;
      } else if (!visited[to]) {
        visited[to] = on_stack[to] = 1;
        stack.emplace_back(to, 0);
      }
    } else {
      on_stack[blk] = 0;
      stack.pop_back();
    }
  }
  for (size_t si = 0; si < program.block_successors.size(); ++si) {
    const BlockSuccessor &s = program.block_successors[si];
    b.addEdge(block_nodes[s.from], block_nodes[s.to], EdgeType::Control,
              is_back[si] != 0);
  }

  b.finalizeStartOfPath();
  return b.g;
}

}  // namespace irperf
