#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kpo/graph.hpp"

namespace kpo {

enum class PruneStrategy { Weighted, Random, Community };

// AlgorithmOutput keeps harmful proteins, the top-K benign proteins and the
// top-Q GO terms. BenignOnly keeps the top-K benign proteins alone.
enum class RetainMode { AlgorithmOutput, BenignOnly };

std::string_view to_string(PruneStrategy s) noexcept;
std::optional<PruneStrategy> parse_prune_strategy(std::string_view s) noexcept;
std::string_view to_string(RetainMode m) noexcept;
std::optional<RetainMode> parse_retain_mode(std::string_view s) noexcept;

struct PruneConfig {
  double alpha = 0.5;
  double beta = 0.5;
  double gamma = 1.0;
  double delta = 0.5;
  double q_fraction = 0.5;
  double k_fraction = 0.5;
  PruneStrategy strategy = PruneStrategy::Weighted;
  RetainMode retain = RetainMode::AlgorithmOutput;
  std::uint64_t seed = 0;  // random strategy only

  // Throws ConfigError.
  void validate() const;
};

struct GoScore {
  NodeId node;
  std::int64_t bridging = 0;
  std::int64_t breadth = 0;
  double significance = 0.0;
};

struct ProteinScore {
  NodeId node;
  std::int64_t go_assoc = 0;
  std::int64_t degree = 0;
  double importance = 0.0;
};

// ceil(fraction * n), guarded against representation error in the product.
std::size_t top_count(double fraction, std::size_t n);

// Number of (harmful, benign) pairs that share GO term `g` as a neighbour.
std::int64_t bridging_degree(const Graph& graph, std::string_view g);
// Number of benign proteins adjacent to `g`.
std::int64_t neighbor_breadth(const Graph& graph, std::string_view g);
double go_significance(const Graph& graph, std::string_view g, const PruneConfig& cfg);

// Scores for every GO term, ascending id.
std::vector<GoScore> score_go_terms(const Graph& graph, const PruneConfig& cfg);
// The ceil(q * |G|) most significant GO terms; ties go to the smaller id.
std::set<NodeId> select_top_go(const Graph& graph, const PruneConfig& cfg);

std::int64_t go_association(const Graph& graph, std::string_view b, const std::set<NodeId>& top_go);
double protein_importance(const Graph& graph, std::string_view b, const std::set<NodeId>& top_go,
                          const PruneConfig& cfg);
// Scores for every benign protein, ascending id.
std::vector<ProteinScore> score_benign(const Graph& graph, const std::set<NodeId>& top_go,
                                       const PruneConfig& cfg);

struct PruneResult {
  Graph graph;
  std::vector<GoScore> go_scores;
  std::vector<ProteinScore> protein_scores;
};

PruneResult prune(const Graph& graph, const PruneConfig& cfg);

// scores_go.tsv: id, R, O, C. scores_benign.tsv: id, Cgo, Cdeg, S.
std::string serialize_go_scores(const std::vector<GoScore>& scores);
std::string serialize_benign_scores(const std::vector<ProteinScore>& scores);

}  // namespace kpo
