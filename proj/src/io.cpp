//===- io.cpp - JSONL datasets, checkpoints, config files -----------------===//
//
// Part of the irperf project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "irperf/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace irperf {

using json = nlohmann::json;

//===----------------------------------------------------------------------===//
// JSONL graph records
//===----------------------------------------------------------------------===//

std::string graphToJsonLine(const IrGraph &g) {
  json nodes = json::array();
  for (const IrNode &n : g.nodes) {
    json jn{{"id", n.id},
            {"node_type", nodeTypeName(n.features.node_type)},
            {"bitwidth", n.features.bitwidth},
            {"opcode_type", opcodeTypeName(n.features.opcode_type)},
            {"opcode", opcodeName(n.features.opcode)},
            {"is_start_of_path", n.features.is_start_of_path},
            {"cluster_group", n.features.cluster_group}};
    if (n.label) {
      jn["dsp"] = n.label->dsp_count;
      jn["lut"] = n.label->lut_count;
      jn["ff"] = n.label->ff_count;
      jn["uses_dsp"] = n.label->uses_dsp;
      jn["uses_lut"] = n.label->uses_lut;
      jn["uses_ff"] = n.label->uses_ff;
    }
    nodes.push_back(std::move(jn));
  }
  json edges = json::array();
  for (const IrEdge &e : g.edges)
    edges.push_back({{"src", e.src},
                     {"dst", e.dst},
                     {"edge_type", static_cast<int>(e.attr.edge_type)},
                     {"is_back_edge", e.attr.is_back_edge}});
  json j{{"id", g.id},
         {"kind", graphKindName(g.kind)},
         {"nodes", std::move(nodes)},
         {"edges", std::move(edges)}};
  if (g.labels)
    j["labels"] = {{"dsp", g.labels->dsp},
                   {"lut", g.labels->lut},
                   {"ff", g.labels->ff},
                   {"cp_ns", g.labels->cp_ns}};
  return j.dump();
}

IrGraph graphFromJsonLine(const std::string &line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception &e) {
    throw Error(std::string("bad graph record: ") + e.what());
  }
  try {
    IrGraph g;
    g.id = j.at("id").get<std::string>();
    g.kind = graphKindFromName(j.at("kind").get<std::string>());
    for (const json &jn : j.at("nodes")) {
      IrNode n;
      n.id = jn.at("id").get<std::string>();
      n.features.node_type =
          nodeTypeFromName(jn.at("node_type").get<std::string>());
      n.features.bitwidth = jn.at("bitwidth").get<int>();
      n.features.opcode_type =
          opcodeTypeFromName(jn.at("opcode_type").get<std::string>());
      n.features.opcode = opcodeFromName(jn.at("opcode").get<std::string>());
      n.features.is_start_of_path = jn.at("is_start_of_path").get<int>();
      n.features.cluster_group = jn.at("cluster_group").get<int>();
      if (jn.contains("dsp") || jn.contains("uses_dsp")) {
        NodeResourceLabel l;
        l.dsp_count = jn.at("dsp").get<int>();
        l.lut_count = jn.at("lut").get<int>();
        l.ff_count = jn.at("ff").get<int>();
        l.uses_dsp = jn.at("uses_dsp").get<bool>();
        l.uses_lut = jn.at("uses_lut").get<bool>();
        l.uses_ff = jn.at("uses_ff").get<bool>();
        n.label = l;
      }
      g.nodes.push_back(std::move(n));
    }
    for (const json &je : j.at("edges")) {
      IrEdge e;
      e.src = je.at("src").get<int>();
      e.dst = je.at("dst").get<int>();
      int et = je.at("edge_type").get<int>();
      if (et < 0 || et >= kNumEdgeTypes)
        throw Error("edge_type out of range: " + std::to_string(et));
      e.attr.edge_type = static_cast<EdgeType>(et);
      e.attr.is_back_edge = je.at("is_back_edge").get<bool>();
      g.edges.push_back(e);
    }
    if (j.contains("labels")) {
      GraphLabels l;
      l.dsp = j["labels"].at("dsp").get<int>();
      l.lut = j["labels"].at("lut").get<int>();
      l.ff = j["labels"].at("ff").get<int>();
      l.cp_ns = j["labels"].at("cp_ns").get<double>();
      g.labels = l;
    }
    return g;
  } catch (const json::exception &e) {
    throw Error(std::string("bad graph record: ") + e.what());
  }
}

void writeGraphsJsonl(const std::string &path,
                      const std::vector<IrGraph> &graphs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  for (const IrGraph &g : graphs) out << graphToJsonLine(g) << '\n';
  if (!out) throw Error("write failed: " + path);
}

std::vector<IrGraph> readGraphsJsonl(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path);
  std::vector<IrGraph> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(graphFromJsonLine(line));
    } catch (const Error &e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

//===----------------------------------------------------------------------===//
// Checkpoints
//===----------------------------------------------------------------------===//

uint64_t featureSchemaHash() {
  std::ostringstream os;
  os << "nt=" << kNumNodeTypes << ";bw=" << kNumBitwidthCats
     << ";ot=" << kNumOpcodeTypes << ";op=" << kNumOpcodes
     << ";st=" << kNumStartCats << ";cl=" << kNumClusterCats
     << ";cnt=" << kNumCountBuckets << ";flag=" << kNumFlagCats
     << ";h=" << kHiddenDim << ";L=" << kNumLayers << ";R=" << kNumRelations;
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : os.str()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

constexpr char kMagic[4] = {'I', 'R', 'P', 'F'};

template <typename T>
void writePod(std::ostream &out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char *>(&v), sizeof v);
}

template <typename T>
T readPod(std::istream &in) {
  T v{};
  in.read(reinterpret_cast<char *>(&v), sizeof v);
  if (!in) throw Error("checkpoint truncated");
  return v;
}

void writeStr(std::ostream &out, const std::string &s) {
  writePod<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string readStr(std::istream &in) {
  uint32_t n = readPod<uint32_t>(in);
  if (n > (1u << 20)) throw Error("checkpoint: absurd string length");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw Error("checkpoint truncated");
  return s;
}

void writeModel(std::ostream &out, const std::string &name,
                const GnnModel<float> &m, int best_epoch) {
  writeStr(out, name);
  writePod<uint32_t>(out, static_cast<uint32_t>(m.cfg.layer));
  writePod<uint32_t>(out, static_cast<uint32_t>(m.cfg.knowledge));
  writePod<uint32_t>(out, static_cast<uint32_t>(m.cfg.pool));
  writePod<uint32_t>(out, static_cast<uint32_t>(m.cfg.readout));
  writePod<int32_t>(out, m.cfg.out_dim);
  writePod<double>(out, m.cfg.dropout);
  writePod<double>(out, m.cfg.pna_delta);
  writePod<int32_t>(out, best_epoch);
  std::vector<TensorF> params = m.params();
  writePod<uint32_t>(out, static_cast<uint32_t>(params.size()));
  for (const TensorF &p : params) {
    writeStr(out, p.name());
    writePod<uint32_t>(out, static_cast<uint32_t>(p.value().rows()));
    writePod<uint32_t>(out, static_cast<uint32_t>(p.value().cols()));
    out.write(reinterpret_cast<const char *>(p.value().data()),
              static_cast<std::streamsize>(sizeof(float) * p.value().size()));
  }
}

GnnModel<float> readModel(std::istream &in, std::string &name,
                          int &best_epoch) {
  name = readStr(in);
  GnnConfig cfg;
  cfg.layer = static_cast<GnnLayerKind>(readPod<uint32_t>(in));
  cfg.knowledge = static_cast<KnowledgeMode>(readPod<uint32_t>(in));
  cfg.pool = static_cast<PoolMode>(readPod<uint32_t>(in));
  cfg.readout = static_cast<ReadoutMode>(readPod<uint32_t>(in));
  cfg.out_dim = readPod<int32_t>(in);
  cfg.dropout = readPod<double>(in);
  cfg.pna_delta = readPod<double>(in);
  best_epoch = readPod<int32_t>(in);
  GnnModel<float> m = GnnModel<float>::create(cfg, 0);
  std::vector<TensorF> params = m.params();
  uint32_t count = readPod<uint32_t>(in);
  if (count != params.size())
    throw Error("checkpoint: model '" + name + "' has " +
                std::to_string(count) + " arrays, expected " +
                std::to_string(params.size()));
  for (TensorF &p : params) {
    std::string aname = readStr(in);
    if (aname != p.name())
      throw Error("checkpoint: array '" + aname + "' where '" + p.name() +
                  "' expected");
    auto rows = readPod<uint32_t>(in), cols = readPod<uint32_t>(in);
    if (rows != static_cast<uint32_t>(p.value().rows()) ||
        cols != static_cast<uint32_t>(p.value().cols()))
      throw Error("checkpoint: array '" + aname + "' shape mismatch");
    in.read(reinterpret_cast<char *>(p.value().data()),
            static_cast<std::streamsize>(sizeof(float) * p.value().size()));
    if (!in) throw Error("checkpoint truncated");
  }
  return m;
}

}  // namespace

StrategyModel Checkpoint::toStrategyModel() const {
  StrategyModel m;
  m.kind = info.strategy;
  m.layer = info.layer;
  for (int t = 0; t < kNumTargets; ++t) {
    if (!regressors[t])
      throw Error(std::string("checkpoint lacks the ") +
                  targetName(static_cast<Target>(t)) + " regressor");
    m.regressors[t] = *regressors[t];
  }
  if (info.strategy == StrategyKind::KnowledgeInfused) {
    if (!classifier)
      throw Error("knowledge-infused checkpoint lacks its classifier stage");
    m.classifier = *classifier;
  }
  return m;
}

void saveCheckpoint(const std::string &path, const Checkpoint &ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out.write(kMagic, 4);
  writePod<uint32_t>(out, kCheckpointVersion);
  writeStr(out, strategyKindName(ckpt.info.strategy));
  writeStr(out, layerKindName(ckpt.info.layer));
  writeStr(out, ckpt.info.target);
  writePod<uint64_t>(out, featureSchemaHash());
  writePod<uint64_t>(out, ckpt.info.seed);
  uint32_t n_models = 0;
  for (int t = 0; t < kNumTargets; ++t)
    if (ckpt.regressors[t]) ++n_models;
  if (ckpt.classifier) ++n_models;
  writePod<uint32_t>(out, n_models);
  for (int t = 0; t < kNumTargets; ++t)
    if (ckpt.regressors[t])
      writeModel(out, targetName(static_cast<Target>(t)), *ckpt.regressors[t],
                 ckpt.best_epochs[t]);
  if (ckpt.classifier)
    writeModel(out, "classifier", *ckpt.classifier,
               ckpt.classifier_best_epoch);
  if (!out) throw Error("write failed: " + path);
}

Checkpoint loadCheckpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw Error("not a checkpoint file: " + path);
  uint32_t version = readPod<uint32_t>(in);
  if (version != kCheckpointVersion)
    throw Error("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.info.strategy = strategyKindFromName(readStr(in));
  ckpt.info.layer = layerKindFromName(readStr(in));
  ckpt.info.target = readStr(in);
  uint64_t hash = readPod<uint64_t>(in);
  if (hash != featureSchemaHash())
    throw Error("checkpoint feature schema mismatch (file " + path + ")");
  ckpt.info.seed = readPod<uint64_t>(in);
  uint32_t n_models = readPod<uint32_t>(in);
  for (uint32_t i = 0; i < n_models; ++i) {
    std::string name;
    int epoch = -1;
    GnnModel<float> m = readModel(in, name, epoch);
    if (name == "classifier") {
      ckpt.classifier = std::move(m);
      ckpt.classifier_best_epoch = epoch;
    } else {
      int t = static_cast<int>(targetFromName(name));
      ckpt.regressors[t] = std::move(m);
      ckpt.best_epochs[t] = epoch;
    }
  }
  return ckpt;
}

//===----------------------------------------------------------------------===//
// key=value configuration
//===----------------------------------------------------------------------===//

namespace {

std::string trim(const std::string &s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::pair<std::string, std::string>> readKeyValues(
    const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open: " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (size_t hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw Error(path + ":" + std::to_string(lineno) + ": empty key or value");
    out.emplace_back(key, value);
  }
  return out;
}

std::vector<std::string> splitList(const std::string &s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double parseNum(const std::string &key, const std::string &v) {
  try {
    size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw Error("");
    return d;
  } catch (...) {
    throw Error("bad numeric value for " + key + ": " + v);
  }
}

int parseInt(const std::string &key, const std::string &v) {
  double d = parseNum(key, v);
  if (d != static_cast<long long>(d))
    throw Error("expected integer for " + key + ": " + v);
  return static_cast<int>(d);
}

}  // namespace

GenProfile loadGenProfile(const std::string &path) {
  GenProfile p = defaultProfile();
  bool ops_cleared = false, widths_cleared = false;
  for (const auto &[key, value] : readKeyValues(path)) {
    if (key.rfind("op.", 0) == 0) {
      if (!ops_cleared) p.op_weights.clear(), ops_cleared = true;
      p.op_weights[opcodeFromName(key.substr(3))] = parseNum(key, value);
    } else if (key.rfind("bitwidth.", 0) == 0) {
      if (!widths_cleared) p.bitwidth_choices.clear(), widths_cleared = true;
      p.bitwidth_choices.emplace_back(parseInt(key, key.substr(9)),
                                      parseNum(key, value));
    } else if (key == "min_instructions") {
      p.min_instructions = parseInt(key, value);
    } else if (key == "max_instructions") {
      p.max_instructions = parseInt(key, value);
    } else if (key == "min_loops") {
      p.min_loops = parseInt(key, value);
    } else if (key == "max_loops") {
      p.max_loops = parseInt(key, value);
    } else if (key == "branch_probability") {
      p.branch_probability = parseNum(key, value);
    } else if (key == "seed") {
      p.seed = static_cast<uint64_t>(parseNum(key, value));
    } else {
      throw Error(path + ": unknown profile key: " + key);
    }
  }
  validateProfile(p);
  return p;
}

ExperimentSpec loadExperimentSpec(const std::string &path) {
  ExperimentSpec spec;
  bool seeds_set = false;
  for (const auto &[key, value] : readKeyValues(path)) {
    if (key.rfind("dataset.", 0) == 0) {
      spec.datasets.emplace_back(key.substr(8), value);
    } else if (key == "strategies") {
      spec.strategies.clear();
      for (const std::string &s : splitList(value))
        spec.strategies.push_back(strategyKindFromName(s));
    } else if (key == "layers") {
      spec.layers.clear();
      for (const std::string &s : splitList(value))
        spec.layers.push_back(layerKindFromName(s));
    } else if (key == "targets") {
      spec.targets.clear();
      for (const std::string &s : splitList(value))
        spec.targets.push_back(targetFromName(s));
    } else if (key == "seeds") {
      spec.seeds.clear();
      for (const std::string &s : splitList(value))
        spec.seeds.push_back(static_cast<uint64_t>(parseNum(key, s)));
      seeds_set = true;
    } else if (key == "epochs") {
      spec.epochs = parseInt(key, value);
    } else if (key == "fractions") {
      std::vector<std::string> f = splitList(value);
      if (f.size() != 3) throw Error("fractions needs 3 comma-separated values");
      spec.fractions = {parseNum(key, f[0]), parseNum(key, f[1]),
                        parseNum(key, f[2])};
    } else if (key == "split_seed") {
      spec.split_seed = static_cast<uint64_t>(parseNum(key, value));
    } else if (key == "select_count") {
      spec.select_count = parseInt(key, value);
    } else if (key == "batch_size") {
      spec.batch_size = parseInt(key, value);
    } else if (key == "lr") {
      spec.lr = parseNum(key, value);
    } else if (key == "dropout") {
      spec.dropout = parseNum(key, value);
    } else if (key == "classification") {
      if (value == "true")
        spec.classification = true;
      else if (value == "false")
        spec.classification = false;
      else
        throw Error("classification must be true or false");
    } else {
      throw Error(path + ": unknown spec key: " + key);
    }
  }
  if (spec.datasets.empty()) throw Error(path + ": no dataset.* entries");
  (void)seeds_set;
  validateSpec(spec);
  return spec;
}

}  // namespace irperf
