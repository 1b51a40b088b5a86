#include "kpo/pipeline.hpp"

#include <chrono>
#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include "kpo/embed.hpp"
#include "kpo/ingest.hpp"
#include "kpo/io.hpp"
#include "kpo/pair.hpp"
#include "kpo/preference.hpp"
#include "kpo/prune.hpp"
#include "kpo/safety_eval.hpp"
#include "kpo/sequence_model.hpp"

namespace kpo {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::Ingest: return "ingest";
    case Stage::Split: return "split";
    case Stage::Prune: return "prune";
    case Stage::Embed: return "embed";
    case Stage::Pair: return "pair";
    case Stage::Pretrain: return "pretrain";
    case Stage::Finetune: return "finetune";
    case Stage::Sample: return "sample";
    case Stage::Eval: return "eval";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view s) noexcept {
  for (Stage st : kAllStages) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

StageError::StageError(Stage stage, ErrorCode code, const std::string& what)
    : std::runtime_error("[" + std::string(to_string(stage)) + "] " + what), stage_(stage), code_(code) {}

ordered_json RunManifest::to_json() const {
  ordered_json j;
  j["tool_version"] = tool_version;
  j["config_hash"] = config_hash;
  ordered_json stages_j = ordered_json::array();
  for (const auto& [stage, rec] : stages) {
    ordered_json s;
    s["stage"] = std::string(to_string(stage));
    s["inputs"] = rec.inputs;
    s["outputs"] = rec.outputs;
    stages_j.push_back(std::move(s));
  }
  j["stages"] = std::move(stages_j);
  return j;
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  try {
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& s : j.at("stages")) {
      auto stage = parse_stage(s.at("stage").get<std::string>());
      if (!stage) throw Error(ErrorCode::ParseError, "manifest: unknown stage");
      m.stages[*stage] = {*stage, s.at("inputs").get<FileHashes>(), s.at("outputs").get<FileHashes>()};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }
  return m;
}

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kTimings = "timings.json";

// Tracks what a stage reads and writes, relative to the workdir.
class StageFiles {
 public:
  explicit StageFiles(fs::path workdir) : wd_(std::move(workdir)) {}

  fs::path input(const std::string& rel) {
    const fs::path p = wd_ / rel;
    if (!fs::is_regular_file(p)) {
      throw Error(ErrorCode::MissingArtifact, "'" + rel + "' not found in workdir; run the stage that produces it first");
    }
    record_.inputs[rel] = io::sha256_file(p);
    return p;
  }

  fs::path raw(const std::string& name, const fs::path& p) {
    if (!fs::is_regular_file(p)) {
      throw Error(ErrorCode::MissingArtifact, "raw input '" + p.string() + "' not found");
    }
    record_.inputs["raw:" + name] = io::sha256_file(p);
    return p;
  }

  Graph graph(const std::string& dir) {
    for (const char* f : {"nodes.tsv", "annotations.tsv", "go_relations.tsv"}) input(dir + "/" + f);
    return read_graph(wd_ / dir);
  }

  void write(const std::string& rel, const std::string& contents) {
    io::write_atomic(wd_ / rel, contents);
    record_.outputs[rel] = io::sha256_hex(contents);
  }

  void write_json(const std::string& rel, const ordered_json& j) { write(rel, j.dump(2) + "\n"); }

  void write_graph(const std::string& dir, const Graph& g) {
    write(dir + "/nodes.tsv", serialize_nodes(g));
    write(dir + "/annotations.tsv", serialize_annotations(g));
    write(dir + "/go_relations.tsv", serialize_go_relations(g));
  }

  StageRecord take(Stage s) {
    record_.stage = s;
    return std::move(record_);
  }

 private:
  fs::path wd_;
  StageRecord record_{};
};

std::string serialize_trace(const std::vector<double>& trace) {
  std::string out = "#epoch\tloss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += std::to_string(i) + '\t' + io::format_double(trace[i]) + '\n';
  }
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string sample_corpus(const BigramModel& model, const SampleConfig& cfg) {
  const int width = static_cast<int>(std::to_string(cfg.count).size());
  std::string out;
  for (int i = 0; i < cfg.count; ++i) {
    std::string id = std::to_string(i + 1);
    id = "S" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(id.size()))), '0') + id;
    const std::uint64_t seed = splitmix64(cfg.seed + static_cast<std::uint64_t>(i));
    out += id + '\t' + sample(model, cfg.max_len, cfg.temperature, seed) + '\n';
  }
  return out;
}

std::vector<NamedSequence> read_samples(const fs::path& path) {
  auto in = io::open_input(path);
  std::vector<NamedSequence> out;
  io::for_each_record(in, [&](std::string_view line, std::size_t n) {
    auto f = io::split_tabs(line);
    if (f.size() != 2) throw Error(ErrorCode::ParseError, "expected id<TAB>sequence", n);
    out.push_back({std::string(f[0]), std::string(f[1])});
  });
  return out;
}

std::vector<std::string> harmful_sequences(const fs::path& path) {
  std::vector<std::string> out;
  for (const auto& p : parse_nodes(path).proteins) out.push_back(p.sequence);
  return out;
}

}  // namespace

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)), workdir_(cfg_.paths.workdir) {
  cfg_.validate();
  std::error_code ec;
  fs::create_directories(workdir_, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create workdir '" + workdir_.string() + "'");
  const fs::path lock = workdir_ / ".kpo.lock";
  lock_fd_ = ::open(lock.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (lock_fd_ < 0) throw Error(ErrorCode::IoError, "cannot open '" + lock.string() + "'");
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    throw Error(ErrorCode::IoError, "workdir '" + workdir_.string() + "' is in use by another pipeline");
  }

  manifest_.tool_version = KPO_VERSION;
  manifest_.config_hash = config_hash(cfg_);
  if (fs::exists(workdir_ / kManifest)) {
    RunManifest old = RunManifest::from_json(json::parse(io::read_file(workdir_ / kManifest)));
    if (old.config_hash == manifest_.config_hash && old.tool_version == manifest_.tool_version) {
      manifest_.stages = std::move(old.stages);
      if (fs::exists(workdir_ / kTimings)) {
        timings_ = json::parse(io::read_file(workdir_ / kTimings)).get<std::map<std::string, double>>();
      }
    } else {
      spdlog::info("config changed since the last run; starting a fresh manifest");
    }
  }
}

Pipeline::~Pipeline() {
  if (lock_fd_ >= 0) ::close(lock_fd_);
}

const StageRecord& Pipeline::run(Stage stage) {
  const auto start = std::chrono::steady_clock::now();
  StageRecord record;
  try {
    spdlog::info("[{}] running", to_string(stage));
    record = execute(stage);
  } catch (const Error& e) {
    throw StageError(stage, e.code(), e.what());
  } catch (const json::exception& e) {
    throw StageError(stage, ErrorCode::ParseError, e.what());
  } catch (const fs::filesystem_error& e) {
    throw StageError(stage, ErrorCode::IoError, e.what());
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  persist(record, seconds);
  spdlog::info("[{}] done in {:.3f}s", to_string(stage), seconds);
  return manifest_.stages.at(stage);
}

const RunManifest& Pipeline::run_all() {
  for (Stage s : kAllStages) run(s);
  return manifest_;
}

void Pipeline::persist(const StageRecord& record, double seconds) {
  manifest_.stages[record.stage] = record;
  timings_[std::string(to_string(record.stage))] = seconds;
  io::write_atomic(workdir_ / kManifest, manifest_.to_json().dump(2) + "\n");
  io::write_atomic(workdir_ / kTimings, ordered_json(timings_).dump(2) + "\n");
}

StageRecord Pipeline::execute(Stage stage) {
  StageFiles files(workdir_);
  switch (stage) {
    case Stage::Ingest: {
      auto nodes = parse_nodes(files.raw("nodes", cfg_.paths.nodes));
      auto ann = parse_annotations(files.raw("annotations", cfg_.paths.annotations));
      auto rel = parse_go_relations(files.raw("go_relations", cfg_.paths.go_relations));
      auto result = build_graph(nodes, ann, rel);
      files.write_graph("graph", result.graph);
      files.write_json("ingest_report.json", result.report.to_json());
      break;
    }
    case Stage::Split: {
      const Graph g = files.graph("graph");
      std::vector<ProteinRecord> harmful;
      for (auto& p : records_from_graph(g).proteins) {
        if (p.label == NodeKind::HarmfulProtein) harmful.push_back(std::move(p));
      }
      auto split = split_harmful(std::move(harmful), cfg_.split.ratio, cfg_.split.seed);
      std::set<NodeId> keep;
      for (const Node& n : g.nodes()) keep.insert(n.id);
      for (const auto& p : split.test) keep.erase(p.id);
      files.write("split/train_harmful.tsv", serialize_proteins(split.train));
      files.write("split/test_harmful.tsv", serialize_proteins(split.test));
      files.write_graph("train_graph", g.induced_subgraph(keep));
      break;
    }
    case Stage::Prune: {
      const Graph g = files.graph("train_graph");
      auto result = prune(g, cfg_.prune);
      files.write_graph("pruned", result.graph);
      files.write("scores_go.tsv", serialize_go_scores(result.go_scores));
      files.write("scores_benign.tsv", serialize_benign_scores(result.protein_scores));
      break;
    }
    case Stage::Embed: {
      const Graph g = files.graph("pruned");
      auto result = train_embeddings(g, cfg_.embed);
      files.write("embeddings.tsv", serialize_embeddings(result.table));
      files.write("embed_loss.tsv", serialize_trace(result.loss_trace));
      break;
    }
    case Stage::Pair: {
      const Graph g = files.graph("pruned");
      const EmbeddingTable table = read_embeddings(files.input("embeddings.tsv"));
      auto selection = select_pairs(g, table, cfg_.pair);
      std::string jsonl;
      for (const auto& p : selection.pairs) jsonl += pair_to_json(p).dump() + "\n";
      files.write("pairs.jsonl", jsonl);
      files.write_json("pair_report.json", selection.report.to_json());
      break;
    }
    case Stage::Pretrain: {
      const Graph g = files.graph("train_graph");
      std::vector<std::string> corpus;
      for (const Node& n : g.nodes()) {
        if (is_protein(n.kind)) corpus.push_back(n.payload);
      }
      BigramModel init;
      init.seed = cfg_.pretrain.seed;
      auto result = kpo::pretrain(init, corpus, cfg_.pretrain);
      files.write("pretrained.tsv", serialize_model(result.model));
      files.write("pretrain_loss.tsv", serialize_trace(result.loss_trace));
      break;
    }
    case Stage::Finetune: {
      const BigramModel base = read_model(files.input("pretrained.tsv"));
      const auto pairs = read_pairs(files.input("pairs.jsonl"));
      auto result = kpo::finetune(base, pairs, cfg_.finetune);
      result.model.seed = cfg_.finetune.seed;
      files.write("model.tsv", serialize_model(result.model));
      files.write("finetune_loss.tsv", serialize_trace(result.loss_trace));
      break;
    }
    case Stage::Sample: {
      const BigramModel tuned = read_model(files.input("model.tsv"));
      const BigramModel base = read_model(files.input("pretrained.tsv"));
      // Same seeds for both, so the two corpora differ only through the model.
      files.write("samples.tsv", sample_corpus(tuned, cfg_.sample));
      files.write("baseline_samples.tsv", sample_corpus(base, cfg_.sample));
      break;
    }
    case Stage::Eval: {
      const auto harmful = harmful_sequences(files.input("split/test_harmful.tsv"));
      const auto tuned = read_samples(files.input("samples.tsv"));
      const auto base = read_samples(files.input("baseline_samples.tsv"));
      const EvalReport after = normalized_similarity(tuned, harmful, cfg_.eval.align, cfg_.eval.length_norm);
      const EvalReport before = normalized_similarity(base, harmful, cfg_.eval.align, cfg_.eval.length_norm);
      files.write_json("eval_report.json", after.to_json());
      files.write("eval_scores.tsv", serialize_eval_scores(after));
      files.write_json("baseline_report.json", before.to_json());
      files.write("baseline_scores.tsv", serialize_eval_scores(before));
      ordered_json cmp;
      cmp["baseline"] = "baseline_report.json";
      cmp["finetuned"] = "eval_report.json";
      cmp["corpus_mean"] = compare_reports(before, after).to_json();
      files.write_json("comparison.json", cmp);
      break;
    }
  }
  return files.take(stage);
}

}  // namespace kpo
