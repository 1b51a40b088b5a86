#include "kpo/prune.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "kpo/error.hpp"
#include "kpo/io.hpp"

namespace kpo {

using Index = Graph::Index;

std::string_view to_string(PruneStrategy s) noexcept {
  switch (s) {
    case PruneStrategy::Weighted: return "weighted";
    case PruneStrategy::Random: return "random";
    case PruneStrategy::Community: return "community";
  }
  return "?";
}

std::optional<PruneStrategy> parse_prune_strategy(std::string_view s) noexcept {
  if (s == "weighted") return PruneStrategy::Weighted;
  if (s == "random") return PruneStrategy::Random;
  if (s == "community") return PruneStrategy::Community;
  return std::nullopt;
}

std::string_view to_string(RetainMode m) noexcept {
  return m == RetainMode::AlgorithmOutput ? "algorithm" : "benign_only";
}

std::optional<RetainMode> parse_retain_mode(std::string_view s) noexcept {
  if (s == "algorithm") return RetainMode::AlgorithmOutput;
  if (s == "benign_only") return RetainMode::BenignOnly;
  return std::nullopt;
}

void PruneConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, "prune: " + m); };
  for (double w : {alpha, beta, gamma, delta}) {
    if (!std::isfinite(w) || w < 0) fail("weights must be finite and >= 0");
  }
  if (!(alpha + beta > 0)) fail("alpha + beta must be > 0");
  if (!(gamma + delta > 0)) fail("gamma + delta must be > 0");
  if (!(q_fraction > 0 && q_fraction <= 1)) fail("q_fraction must lie in (0, 1]");
  if (!(k_fraction > 0 && k_fraction <= 1)) fail("k_fraction must lie in (0, 1]");
}

std::size_t top_count(double fraction, std::size_t n) {
  const double raw = fraction * static_cast<double>(n);
  auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::min(k, n);
}

namespace {

struct Neighbourhood {
  std::int64_t harmful = 0;
  std::int64_t benign = 0;
};

Neighbourhood protein_neighbours(const Graph& g, Index i) {
  Neighbourhood n;
  for (Index j : g.adjacent(i)) {
    if (g.kind(j) == NodeKind::HarmfulProtein) ++n.harmful;
    if (g.kind(j) == NodeKind::BenignProtein) ++n.benign;
  }
  return n;
}

Index require_kind(const Graph& g, std::string_view id, NodeKind kind) {
  const Index i = g.index_of(id);
  if (g.kind(i) != kind) {
    throw Error(ErrorCode::KindError, "node '" + std::string(id) + "' is " +
                                          std::string(kind_name(g.kind(i))) + ", expected " +
                                          std::string(kind_name(kind)));
  }
  return i;
}

GoScore score_go(const Graph& g, Index i, const PruneConfig& cfg) {
  const auto n = protein_neighbours(g, i);
  GoScore s;
  s.node = g.node(i).id;
  s.bridging = n.harmful * n.benign;
  s.breadth = n.benign;
  s.significance = cfg.gamma * static_cast<double>(s.bridging) +
                   cfg.delta * static_cast<double>(s.breadth);
  return s;
}

std::int64_t association(const Graph& g, Index b, const std::vector<char>& in_top) {
  std::int64_t n = 0;
  for (Index j : g.adjacent(b)) n += in_top[j] ? 1 : 0;
  return n;
}

ProteinScore score_protein(const Graph& g, Index b, const std::vector<char>& in_top,
                           const PruneConfig& cfg) {
  ProteinScore s;
  s.node = g.node(b).id;
  s.go_assoc = association(g, b, in_top);
  s.degree = static_cast<std::int64_t>(g.adjacent(b).size());
  s.importance = cfg.alpha * static_cast<double>(s.go_assoc) +
                 cfg.beta * static_cast<double>(s.degree);
  return s;
}

// Indices of the k highest scores; equal scores go to the smaller index,
// which is the smaller NodeId. Result sorted ascending.
std::vector<Index> top_k(const std::vector<Index>& ids, const std::vector<double>& scores,
                         std::size_t k) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  };
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    better);
  std::vector<Index> out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r) out.push_back(ids[order[r]]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<char> membership(const Graph& g, const std::set<NodeId>& ids) {
  std::vector<char> in(g.size(), 0);
  for (const NodeId& id : ids) {
    if (auto i = g.find(id)) in[*i] = 1;
  }
  return in;
}

std::vector<Index> top_go_indices(const Graph& g, const std::vector<GoScore>& scores,
                                  const PruneConfig& cfg) {
  const auto go = g.indices_of(NodeKind::GoTerm);
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& s : scores) values.push_back(s.significance);
  return top_k(go, values, top_count(cfg.q_fraction, go.size()));
}

std::vector<Index> sample_uniform(std::vector<Index> pool, std::size_t k, std::mt19937_64& rng) {
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min(k, pool.size()));
  std::sort(pool.begin(), pool.end());
  return pool;
}

// Label propagation in ascending index order; ties go to the smallest label.
std::vector<Index> label_propagation(const Graph& g) {
  std::vector<Index> label(g.size());
  std::iota(label.begin(), label.end(), Index{0});
  std::map<Index, std::size_t> tally;
  for (int sweep = 0; sweep < 32; ++sweep) {
    bool changed = false;
    for (Index u = 0; u < g.size(); ++u) {
      const auto adj = g.adjacent(u);
      if (adj.empty()) continue;
      tally.clear();
      for (Index v : adj) ++tally[label[v]];
      Index best = label[u];
      std::size_t best_count = 0;
      for (auto [l, c] : tally) {
        if (c > best_count) {
          best = l;
          best_count = c;
        }
      }
      if (best != label[u]) {
        label[u] = best;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return label;
}

std::vector<Index> connected_components(const Graph& g) {
  std::vector<Index> comp(g.size(), static_cast<Index>(-1));
  std::vector<Index> stack;
  for (Index s = 0; s < g.size(); ++s) {
    if (comp[s] != static_cast<Index>(-1)) continue;
    comp[s] = s;
    stack.assign(1, s);
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      for (Index v : g.adjacent(u)) {
        if (comp[v] == static_cast<Index>(-1)) {
          comp[v] = s;
          stack.push_back(v);
        }
      }
    }
  }
  return comp;
}

// Community ablation: communities from label propagation are ranked by total
// degree inside each connected component, then taken round-robin (one per
// component per round) until the benign and GO quotas are filled. Within the
// community that crosses a quota, higher-degree members go first.
std::pair<std::vector<Index>, std::vector<Index>> community_selection(const Graph& g,
                                                                      std::size_t k_benign,
                                                                      std::size_t q_go) {
  const auto label = label_propagation(g);
  const auto comp = connected_components(g);

  std::map<Index, std::vector<Index>> members;
  for (Index u = 0; u < g.size(); ++u) members[label[u]].push_back(u);

  struct Community {
    Index label;
    std::size_t total_degree;
    std::vector<Index> nodes;
  };
  std::map<Index, std::vector<Community>> by_component;
  for (auto& [l, nodes] : members) {
    // Group each label by connected component.
    std::map<Index, std::vector<Index>> split;
    for (Index u : nodes) split[comp[u]].push_back(u);
    for (auto& [c, part] : split) {
      std::size_t degree = 0;
      for (Index u : part) degree += g.adjacent(u).size();
      by_component[c].push_back({l, degree, std::move(part)});
    }
  }
  std::size_t rounds = 0;
  for (auto& [c, list] : by_component) {
    std::sort(list.begin(), list.end(), [](const Community& a, const Community& b) {
      if (a.total_degree != b.total_degree) return a.total_degree > b.total_degree;
      return a.nodes.front() < b.nodes.front();
    });
    rounds = std::max(rounds, list.size());
  }

  std::vector<Index> benign, go;
  for (std::size_t r = 0; r < rounds; ++r) {
    if (benign.size() >= k_benign && go.size() >= q_go) break;
    for (auto& [c, list] : by_component) {
      if (r >= list.size()) continue;
      std::vector<Index> nodes = list[r].nodes;
      std::stable_sort(nodes.begin(), nodes.end(), [&](Index a, Index b) {
        return g.adjacent(a).size() > g.adjacent(b).size();
      });
      for (Index u : nodes) {
        if (g.kind(u) == NodeKind::BenignProtein && benign.size() < k_benign) benign.push_back(u);
        if (g.kind(u) == NodeKind::GoTerm && go.size() < q_go) go.push_back(u);
      }
    }
  }
  std::sort(benign.begin(), benign.end());
  std::sort(go.begin(), go.end());
  return {std::move(benign), std::move(go)};
}

}  // namespace

std::int64_t bridging_degree(const Graph& graph, std::string_view g) {
  const auto n = protein_neighbours(graph, require_kind(graph, g, NodeKind::GoTerm));
  return n.harmful * n.benign;
}

std::int64_t neighbor_breadth(const Graph& graph, std::string_view g) {
  return protein_neighbours(graph, require_kind(graph, g, NodeKind::GoTerm)).benign;
}

double go_significance(const Graph& graph, std::string_view g, const PruneConfig& cfg) {
  return score_go(graph, require_kind(graph, g, NodeKind::GoTerm), cfg).significance;
}

std::vector<GoScore> score_go_terms(const Graph& graph, const PruneConfig& cfg) {
  std::vector<GoScore> out;
  for (Index i : graph.indices_of(NodeKind::GoTerm)) out.push_back(score_go(graph, i, cfg));
  return out;
}

std::set<NodeId> select_top_go(const Graph& graph, const PruneConfig& cfg) {
  if (graph.count(NodeKind::GoTerm) == 0) {
    throw Error(ErrorCode::EmptyCategory, "graph has no GO terms");
  }
  std::set<NodeId> out;
  for (Index i : top_go_indices(graph, score_go_terms(graph, cfg), cfg)) {
    out.insert(graph.node(i).id);
  }
  return out;
}

std::int64_t go_association(const Graph& graph, std::string_view b, const std::set<NodeId>& top_go) {
  const Index i = require_kind(graph, b, NodeKind::BenignProtein);
  return association(graph, i, membership(graph, top_go));
}

double protein_importance(const Graph& graph, std::string_view b, const std::set<NodeId>& top_go,
                          const PruneConfig& cfg) {
  const Index i = require_kind(graph, b, NodeKind::BenignProtein);
  return score_protein(graph, i, membership(graph, top_go), cfg).importance;
}

std::vector<ProteinScore> score_benign(const Graph& graph, const std::set<NodeId>& top_go,
                                       const PruneConfig& cfg) {
  const auto in_top = membership(graph, top_go);
  std::vector<ProteinScore> out;
  for (Index b : graph.indices_of(NodeKind::BenignProtein)) {
    out.push_back(score_protein(graph, b, in_top, cfg));
  }
  return out;
}

PruneResult prune(const Graph& graph, const PruneConfig& cfg) {
  cfg.validate();
  for (NodeKind kind : {NodeKind::HarmfulProtein, NodeKind::BenignProtein, NodeKind::GoTerm}) {
    if (graph.count(kind) == 0) {
      throw Error(ErrorCode::EmptyCategory,
                  "graph has no " + std::string(kind_name(kind)) + " nodes");
    }
  }

  PruneResult result;
  result.go_scores = score_go_terms(graph, cfg);
  const auto top_go = top_go_indices(graph, result.go_scores, cfg);
  std::vector<char> in_top(graph.size(), 0);
  for (Index i : top_go) in_top[i] = 1;

  const auto benign_ids = graph.indices_of(NodeKind::BenignProtein);
  std::vector<double> importance;
  importance.reserve(benign_ids.size());
  for (Index b : benign_ids) {
    result.protein_scores.push_back(score_protein(graph, b, in_top, cfg));
    importance.push_back(result.protein_scores.back().importance);
  }

  const std::size_t k = top_count(cfg.k_fraction, benign_ids.size());
  const std::size_t q = top_go.size();
  std::vector<Index> kept_benign, kept_go;
  switch (cfg.strategy) {
    case PruneStrategy::Weighted:
      kept_benign = top_k(benign_ids, importance, k);
      kept_go = top_go;
      break;
    case PruneStrategy::Random: {
      std::mt19937_64 rng(cfg.seed);
      kept_benign = sample_uniform(benign_ids, k, rng);
      kept_go = sample_uniform(graph.indices_of(NodeKind::GoTerm), q, rng);
      break;
    }
    case PruneStrategy::Community:
      std::tie(kept_benign, kept_go) = community_selection(graph, k, q);
      break;
  }

  std::set<NodeId> keep;
  for (Index b : kept_benign) keep.insert(graph.node(b).id);
  if (cfg.retain == RetainMode::AlgorithmOutput) {
    for (Index h : graph.indices_of(NodeKind::HarmfulProtein)) keep.insert(graph.node(h).id);
    for (Index g : kept_go) keep.insert(graph.node(g).id);
  }
  result.graph = graph.induced_subgraph(keep);
  return result;
}

std::string serialize_go_scores(const std::vector<GoScore>& scores) {
  std::string out;
  for (const auto& s : scores) {
    out += s.node + '\t' + std::to_string(s.bridging) + '\t' + std::to_string(s.breadth) + '\t' +
           io::format_double(s.significance) + '\n';
  }
  return out;
}

std::string serialize_benign_scores(const std::vector<ProteinScore>& scores) {
  std::string out;
  for (const auto& s : scores) {
    out += s.node + '\t' + std::to_string(s.go_assoc) + '\t' + std::to_string(s.degree) + '\t' +
           io::format_double(s.importance) + '\n';
  }
  return out;
}

}  // namespace kpo
