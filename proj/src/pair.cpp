#include "kpo/pair.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "kpo/error.hpp"
#include "kpo/io.hpp"

namespace kpo {

using Index = Graph::Index;

void PairConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, "pair: " + m); };
  if (tau < 1) fail("tau must be a positive integer");
  if (!(mu >= 0 && mu <= 1)) fail("mu must lie in [0, 1]");
  if (top_m < 1) fail("top_m must be a positive integer");
  if (threads < 1) fail("threads must be >= 1");
}

std::map<NodeId, int> candidate_benign(const Graph& graph, std::string_view h, int tau) {
  const Index src = graph.index_of(h);
  if (graph.kind(src) != NodeKind::HarmfulProtein) {
    throw Error(ErrorCode::KindError, "node '" + std::string(h) + "' is not a harmful protein");
  }
  if (tau < 0) throw Error(ErrorCode::DomainError, "tau must be >= 0");
  HopSearch search(graph);
  std::map<NodeId, int> out;
  for (auto [i, hops] : search.run(src, tau)) {
    if (graph.kind(i) == NodeKind::BenignProtein) out.emplace(graph.node(i).id, hops);
  }
  return out;
}

double combined_score(int hop, double cos, double mu) {
  if (hop < 1) {
    throw Error(ErrorCode::DomainError, "hop distance must be >= 1 (a protein cannot pair with itself)");
  }
  return mu * (1.0 / static_cast<double>(hop)) + (1.0 - mu) * cos;
}

nlohmann::ordered_json PairReport::to_json() const {
  nlohmann::ordered_json j;
  j["harmful_total"] = harmful_total;
  j["harmful_without_candidates"] = harmful_without_candidates;
  j["pair_count"] = pair_count;
  j["distinct_benign"] = distinct_benign;
  j["benign_reuse"] = benign_reuse;
  return j;
}

namespace {

struct Candidate {
  Index benign;
  int hop;
  double cosine;
  double score;
};

class CandidateRanker {
 public:
  CandidateRanker(const Graph& graph, const EmbeddingTable& table, const PairConfig& cfg,
                  const std::vector<std::size_t>& rows, const std::vector<double>& norms)
      : graph_(graph), table_(table), cfg_(cfg), rows_(rows), norms_(norms), search_(graph) {}

  // Ranked top-M candidates for harmful node h.
  void rank(Index h, std::vector<Candidate>& out) {
    out.clear();
    const auto eh = table_.entity(rows_[h]);
    for (auto [v, hops] : search_.run(h, cfg_.tau)) {
      if (graph_.kind(v) != NodeKind::BenignProtein) continue;
      const auto eb = table_.entity(rows_[v]);
      double dot = 0;
      for (std::size_t k = 0; k < eh.size(); ++k) dot += eh[k] * eb[k];
      const double cos = std::clamp(dot / (norms_[h] * norms_[v]), -1.0, 1.0);
      out.push_back({v, hops, cos, combined_score(hops, cos, cfg_.mu)});
    }
    const auto m = std::min(out.size(), static_cast<std::size_t>(cfg_.top_m));
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(m), out.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.score != b.score) return a.score > b.score;
                        return a.benign < b.benign;
                      });
    out.resize(m);
  }

 private:
  const Graph& graph_;
  const EmbeddingTable& table_;
  const PairConfig& cfg_;
  const std::vector<std::size_t>& rows_;
  const std::vector<double>& norms_;
  HopSearch search_;
};

}  // namespace

PairSelection select_pairs(const Graph& graph, const EmbeddingTable& table, const PairConfig& cfg) {
  cfg.validate();
  // Embedding row and norm for every protein node.
  std::vector<std::size_t> rows(graph.size(), 0);
  std::vector<double> norms(graph.size(), 0.0);
  for (Index i = 0; i < graph.size(); ++i) {
    if (!is_protein(graph.kind(i))) continue;
    rows[i] = table.entity_index(graph.node(i).id);
    double sq = 0;
    for (double x : table.entity(rows[i])) sq += x * x;
    if (sq == 0) {
      throw Error(ErrorCode::DegenerateVector, "zero embedding for '" + graph.node(i).id + "'");
    }
    norms[i] = std::sqrt(sq);
  }

  const auto harmful = graph.indices_of(NodeKind::HarmfulProtein);
  std::vector<std::vector<Candidate>> ranked(harmful.size());
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads),
                                             std::max<std::size_t>(harmful.size(), 1));
  auto run_range = [&](std::size_t begin, std::size_t end) {
    CandidateRanker ranker(graph, table, cfg, rows, norms);
    for (std::size_t k = begin; k < end; ++k) ranker.rank(harmful[k], ranked[k]);
  };
  if (workers <= 1) {
    run_range(0, harmful.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (harmful.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(harmful.size(), w * chunk);
      const std::size_t end = std::min(harmful.size(), begin + chunk);
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  PairSelection sel;
  sel.report.harmful_total = harmful.size();
  std::set<Index> benign_seen;
  for (std::size_t k = 0; k < harmful.size(); ++k) {
    const Node& h = graph.node(harmful[k]);
    if (ranked[k].empty()) sel.report.harmful_without_candidates.push_back(h.id);
    for (const Candidate& c : ranked[k]) {
      const Node& b = graph.node(c.benign);
      sel.pairs.push_back({h.id, b.id, h.payload, b.payload, c.hop, c.cosine, c.score, ""});
      if (!benign_seen.insert(c.benign).second) ++sel.report.benign_reuse;
    }
  }
  sel.report.pair_count = sel.pairs.size();
  sel.report.distinct_benign = benign_seen.size();
  return sel;
}

nlohmann::ordered_json pair_to_json(const PreferencePair& p) {
  nlohmann::ordered_json j;
  j["harmful_id"] = p.harmful_id;
  j["benign_id"] = p.benign_id;
  j["harmful_seq"] = p.harmful_seq;
  j["benign_seq"] = p.benign_seq;
  j["hop"] = p.hop;
  j["cosine"] = p.cosine;
  j["score"] = p.score;
  j["context"] = p.context;
  return j;
}

PreferencePair pair_from_json(const nlohmann::json& j) {
  PreferencePair p;
  try {
    p.harmful_id = j.at("harmful_id").get<std::string>();
    p.benign_id = j.at("benign_id").get<std::string>();
    p.harmful_seq = j.at("harmful_seq").get<std::string>();
    p.benign_seq = j.at("benign_seq").get<std::string>();
    p.hop = j.at("hop").get<int>();
    p.cosine = j.at("cosine").get<double>();
    p.score = j.at("score").get<double>();
    p.context = j.value("context", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("preference pair: ") + e.what());
  }
  return p;
}

std::size_t export_pairs(std::span<const PreferencePair> pairs, const std::filesystem::path& path) {
  std::string out;
  for (const auto& p : pairs) {
    out += pair_to_json(p).dump();
    out += '\n';
  }
  io::write_atomic(path, out);
  return pairs.size();
}

std::vector<PreferencePair> read_pairs(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  std::vector<PreferencePair> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::ParseError, "invalid JSON", number);
    out.push_back(pair_from_json(j));
  }
  return out;
}

}  // namespace kpo
