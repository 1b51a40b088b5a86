#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace kpo {

using NodeId = std::string;

enum class NodeKind : std::uint8_t { HarmfulProtein, BenignProtein, GoTerm };

inline bool is_protein(NodeKind kind) noexcept { return kind != NodeKind::GoTerm; }

// Single-letter kind codes used by the node file: H, B, G.
char kind_code(NodeKind kind) noexcept;
std::optional<NodeKind> kind_from_code(std::string_view code) noexcept;
std::string_view kind_name(NodeKind kind) noexcept;

inline constexpr std::string_view kAnnotatedWith = "annotated_with";
inline constexpr std::string_view kIsA = "is_a";
inline constexpr std::string_view kPartOf = "part_of";

// Protein nodes carry a sequence payload, GO nodes a label payload.
struct Node {
  NodeId id;
  NodeKind kind = NodeKind::GoTerm;
  std::string payload;

  friend bool operator==(const Node&, const Node&) = default;
};

struct Triple {
  NodeId src;
  std::string relation;
  NodeId dst;

  friend auto operator<=>(const Triple&, const Triple&) = default;
  friend bool operator==(const Triple&, const Triple&) = default;
};

// Immutable typed knowledge graph. Nodes are stored sorted by id, so node
// indices, adjacency lists and every derived iteration order follow
// ascending NodeId. Traversal uses the undirected view; the directed triples
// are kept for embedding.
class Graph {
 public:
  using Index = std::uint32_t;

  struct IndexedTriple {
    Index src;
    Index relation;
    Index dst;

    friend bool operator==(const IndexedTriple&, const IndexedTriple&) = default;
  };

  Graph() = default;

  // Validates ids, payloads and edge shapes. Duplicate triples are collapsed
  // and counted in `duplicates_dropped` when provided.
  static Graph from_parts(std::vector<Node> nodes, std::vector<Triple> triples,
                          std::size_t* duplicates_dropped = nullptr);

  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  bool contains(std::string_view id) const;
  std::optional<Index> find(std::string_view id) const;
  // Throws NotFound.
  Index index_of(std::string_view id) const;

  const Node& node(Index i) const { return nodes_[i]; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  NodeKind kind(Index i) const { return nodes_[i].kind; }

  // Triples sorted by (src, relation, dst).
  const std::vector<Triple>& triples() const noexcept { return triples_; }
  const std::vector<IndexedTriple>& indexed_triples() const noexcept { return indexed_; }
  // Sorted distinct relation labels present in the triple set.
  const std::vector<std::string>& relations() const noexcept { return relations_; }
  bool has_triple(Index src, Index relation, Index dst) const;

  // Undirected, deduplicated, ascending.
  std::span<const Index> adjacent(Index i) const {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }

  std::size_t count(NodeKind kind) const;
  std::vector<Index> indices_of(NodeKind kind) const;

  std::vector<NodeId> neighbors(std::string_view id) const;
  std::size_t degree(std::string_view id) const;
  std::map<NodeId, int> bfs_hops(std::string_view src, int max_hops) const;
  Graph induced_subgraph(const std::set<NodeId>& keep) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.nodes_ == b.nodes_ && a.triples_ == b.triples_;
  }

 private:
  struct TripleHash {
    std::size_t operator()(const IndexedTriple& t) const noexcept;
  };

  std::vector<Node> nodes_;
  std::map<std::string, Index, std::less<>> index_;
  std::vector<Triple> triples_;
  std::vector<IndexedTriple> indexed_;
  std::vector<std::string> relations_;
  std::unordered_set<IndexedTriple, TripleHash> triple_set_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Index> adjacency_;
  std::array<std::size_t, 3> kind_counts_{};

  void rebuild_index();
};

// Reusable breadth-first search over a graph's undirected view. Keeps its
// buffers between runs so repeated searches cost O(visited), not O(|V|).
class HopSearch {
 public:
  explicit HopSearch(const Graph& graph);

  // Every node within max_hops of src as (index, hops), in visit order.
  const std::vector<std::pair<Graph::Index, int>>& run(Graph::Index src, int max_hops);

 private:
  const Graph* graph_;
  std::vector<int> hops_;
  std::vector<std::pair<Graph::Index, int>> visited_;
};

}  // namespace kpo
