#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kpo/embed.hpp"
#include "kpo/graph.hpp"

namespace kpo {

struct PairConfig {
  int tau = 2;
  double mu = 0.5;
  int top_m = 4;
  // Workers for the per-harmful candidate search; output order is fixed
  // regardless of this value.
  int threads = 1;

  void validate() const;
};

// The benign sequence is the preferred one, the harmful sequence the
// dispreferred one.
struct PreferencePair {
  NodeId harmful_id;
  NodeId benign_id;
  std::string harmful_seq;
  std::string benign_seq;
  int hop = 0;
  double cosine = 0.0;
  double score = 0.0;
  std::string context;

  friend bool operator==(const PreferencePair&, const PreferencePair&) = default;
};

// Benign proteins within tau hops of harmful protein `h`, with hop counts.
std::map<NodeId, int> candidate_benign(const Graph& graph, std::string_view h, int tau);

// mu / hop + (1 - mu) * cos. Throws DomainError for hop < 1.
double combined_score(int hop, double cos, double mu);

struct PairReport {
  std::size_t harmful_total = 0;
  std::vector<NodeId> harmful_without_candidates;
  std::size_t pair_count = 0;
  std::size_t distinct_benign = 0;
  // Pairs whose benign protein already appeared in an earlier pair.
  std::size_t benign_reuse = 0;

  nlohmann::ordered_json to_json() const;
};

struct PairSelection {
  std::vector<PreferencePair> pairs;
  PairReport report;
};

// Top-M candidates per harmful protein by combined score, ties to the smaller
// benign id; pairs ordered by (harmful id, rank).
PairSelection select_pairs(const Graph& graph, const EmbeddingTable& table, const PairConfig& cfg);

nlohmann::ordered_json pair_to_json(const PreferencePair& pair);
PreferencePair pair_from_json(const nlohmann::json& j);

// pairs.jsonl, one object per line.
std::size_t export_pairs(std::span<const PreferencePair> pairs, const std::filesystem::path& path);
std::vector<PreferencePair> read_pairs(const std::filesystem::path& path);

}  // namespace kpo
