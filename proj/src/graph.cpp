#include "kpo/graph.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "kpo/alphabet.hpp"
#include "kpo/error.hpp"

namespace kpo {

char kind_code(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::HarmfulProtein: return 'H';
    case NodeKind::BenignProtein: return 'B';
    case NodeKind::GoTerm: return 'G';
  }
  return '?';
}

std::optional<NodeKind> kind_from_code(std::string_view code) noexcept {
  if (code == "H") return NodeKind::HarmfulProtein;
  if (code == "B") return NodeKind::BenignProtein;
  if (code == "G") return NodeKind::GoTerm;
  return std::nullopt;
}

std::string_view kind_name(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::HarmfulProtein: return "HarmfulProtein";
    case NodeKind::BenignProtein: return "BenignProtein";
    case NodeKind::GoTerm: return "GoTerm";
  }
  return "?";
}

namespace {

bool shape_allowed(NodeKind src, std::string_view relation, NodeKind dst) {
  if (relation == kAnnotatedWith) return is_protein(src) && dst == NodeKind::GoTerm;
  if (relation == kIsA || relation == kPartOf) {
    return src == NodeKind::GoTerm && dst == NodeKind::GoTerm;
  }
  return false;
}

}  // namespace

std::size_t Graph::TripleHash::operator()(const IndexedTriple& t) const noexcept {
  std::uint64_t h = t.src;
  h = h * 0x9E3779B97F4A7C15ULL ^ t.relation;
  h = h * 0x9E3779B97F4A7C15ULL ^ t.dst;
  return static_cast<std::size_t>(h ^ (h >> 29));
}

Graph Graph::from_parts(std::vector<Node> nodes, std::vector<Triple> triples,
                        std::size_t* duplicates_dropped) {
  Graph g;
  std::sort(nodes.begin(), nodes.end(),
            [](const Node& a, const Node& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    if (n.id.empty()) throw Error(ErrorCode::ShapeError, "empty node id");
    if (i > 0 && nodes[i - 1].id == n.id) {
      throw Error(ErrorCode::ShapeError, "duplicate node id '" + n.id + "'");
    }
    if (is_protein(n.kind) && !is_protein_sequence(n.payload)) {
      throw Error(ErrorCode::AlphabetError,
                  "protein '" + n.id + "' has an empty or non-canonical sequence");
    }
  }
  g.nodes_ = std::move(nodes);
  g.rebuild_index();

  for (const Triple& t : triples) {
    auto s = g.find(t.src);
    auto d = g.find(t.dst);
    if (!s || !d) {
      throw Error(ErrorCode::DanglingEdge,
                  "edge " + t.src + " " + t.relation + " " + t.dst + " references unknown node '" +
                      (!s ? t.src : t.dst) + "'");
    }
    if (*s == *d) throw Error(ErrorCode::ShapeError, "self-loop on '" + t.src + "'");
    if (!shape_allowed(g.kind(*s), t.relation, g.kind(*d))) {
      throw Error(ErrorCode::ShapeError,
                  "edge " + t.src + " " + t.relation + " " + t.dst + " has a disallowed shape (" +
                      std::string(kind_name(g.kind(*s))) + " -> " +
                      std::string(kind_name(g.kind(*d))) + ")");
    }
  }

  std::sort(triples.begin(), triples.end());
  auto last = std::unique(triples.begin(), triples.end());
  const auto dups = static_cast<std::size_t>(triples.end() - last);
  triples.erase(last, triples.end());
  if (dups > 0) spdlog::warn("collapsed {} duplicate triple(s)", dups);
  if (duplicates_dropped) *duplicates_dropped = dups;
  g.triples_ = std::move(triples);

  for (const Triple& t : g.triples_) g.relations_.push_back(t.relation);
  std::sort(g.relations_.begin(), g.relations_.end());
  g.relations_.erase(std::unique(g.relations_.begin(), g.relations_.end()), g.relations_.end());

  std::vector<std::vector<Index>> adj(g.nodes_.size());
  g.indexed_.reserve(g.triples_.size());
  for (const Triple& t : g.triples_) {
    const Index s = g.index_of(t.src);
    const Index d = g.index_of(t.dst);
    const auto r = static_cast<Index>(
        std::lower_bound(g.relations_.begin(), g.relations_.end(), t.relation) -
        g.relations_.begin());
    g.indexed_.push_back({s, r, d});
    g.triple_set_.insert({s, r, d});
    adj[s].push_back(d);
    adj[d].push_back(s);
  }
  g.offsets_.assign(1, 0);
  g.offsets_.reserve(g.nodes_.size() + 1);
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    g.adjacency_.insert(g.adjacency_.end(), list.begin(), list.end());
    g.offsets_.push_back(g.adjacency_.size());
  }
  return g;
}

void Graph::rebuild_index() {
  index_.clear();
  kind_counts_ = {};
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    index_.emplace(nodes_[i].id, static_cast<Index>(i));
    ++kind_counts_[static_cast<std::size_t>(nodes_[i].kind)];
  }
}

bool Graph::contains(std::string_view id) const { return index_.find(id) != index_.end(); }

std::optional<Graph::Index> Graph::find(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Graph::Index Graph::index_of(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw Error(ErrorCode::NotFound, "unknown node '" + std::string(id) + "'");
  }
  return it->second;
}

bool Graph::has_triple(Index src, Index relation, Index dst) const {
  return triple_set_.contains({src, relation, dst});
}

std::size_t Graph::count(NodeKind kind) const {
  return kind_counts_[static_cast<std::size_t>(kind)];
}

std::vector<Graph::Index> Graph::indices_of(NodeKind kind) const {
  std::vector<Index> out;
  out.reserve(count(kind));
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == kind) out.push_back(static_cast<Index>(i));
  }
  return out;
}

std::vector<NodeId> Graph::neighbors(std::string_view id) const {
  std::vector<NodeId> out;
  for (Index j : adjacent(index_of(id))) out.push_back(nodes_[j].id);
  return out;
}

std::size_t Graph::degree(std::string_view id) const { return adjacent(index_of(id)).size(); }

std::map<NodeId, int> Graph::bfs_hops(std::string_view src, int max_hops) const {
  const Index s = index_of(src);
  if (max_hops < 0) throw Error(ErrorCode::DomainError, "max_hops must be >= 0");
  HopSearch search(*this);
  std::map<NodeId, int> out;
  for (auto [i, h] : search.run(s, max_hops)) out.emplace(nodes_[i].id, h);
  return out;
}

Graph Graph::induced_subgraph(const std::set<NodeId>& keep) const {
  std::vector<char> kept(nodes_.size(), 0);
  std::vector<Node> nodes;
  nodes.reserve(keep.size());
  for (const NodeId& id : keep) {
    const Index i = index_of(id);
    kept[i] = 1;
    nodes.push_back(nodes_[i]);
  }
  std::vector<Triple> triples;
  for (std::size_t k = 0; k < triples_.size(); ++k) {
    if (kept[indexed_[k].src] && kept[indexed_[k].dst]) triples.push_back(triples_[k]);
  }
  return from_parts(std::move(nodes), std::move(triples));
}

HopSearch::HopSearch(const Graph& graph) : graph_(&graph), hops_(graph.size(), -1) {}

const std::vector<std::pair<Graph::Index, int>>& HopSearch::run(Graph::Index src, int max_hops) {
  for (auto [i, h] : visited_) hops_[i] = -1;
  visited_.clear();
  hops_[src] = 0;
  visited_.emplace_back(src, 0);
  // visited_ doubles as the FIFO queue.
  for (std::size_t head = 0; head < visited_.size(); ++head) {
    const auto [u, h] = visited_[head];
    if (h == max_hops) continue;
    for (Graph::Index v : graph_->adjacent(u)) {
      if (hops_[v] >= 0) continue;
      hops_[v] = h + 1;
      visited_.emplace_back(v, h + 1);
    }
  }
  return visited_;
}

}  // namespace kpo
