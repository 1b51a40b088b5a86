#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kpo/graph.hpp"

namespace kpo {

struct ProteinRecord {
  NodeId id;
  NodeKind label = NodeKind::BenignProtein;
  std::string sequence;

  friend bool operator==(const ProteinRecord&, const ProteinRecord&) = default;
};

struct GoRecord {
  NodeId id;
  std::string label;

  friend bool operator==(const GoRecord&, const GoRecord&) = default;
};

struct NodeRecords {
  std::vector<ProteinRecord> proteins;
  std::vector<GoRecord> go_terms;
};

// nodes.tsv: id<TAB>{H,B,G}<TAB>payload
NodeRecords parse_nodes(std::istream& in);
NodeRecords parse_nodes(const std::filesystem::path& path);

// annotations.tsv: protein_id<TAB>annotated_with<TAB>go_id
std::vector<Triple> parse_annotations(std::istream& in);
std::vector<Triple> parse_annotations(const std::filesystem::path& path);

// go_relations.tsv: go_id<TAB>{is_a,part_of}<TAB>go_id
std::vector<Triple> parse_go_relations(std::istream& in);
std::vector<Triple> parse_go_relations(const std::filesystem::path& path);

struct IngestReport {
  std::size_t harmful = 0;
  std::size_t benign = 0;
  std::size_t go_terms = 0;
  std::map<std::string, std::size_t> edges_by_relation;
  std::size_t duplicates_dropped = 0;
  std::size_t dangling_references = 0;
  // Proteins whose sequence repeats an earlier protein's; kept, only counted.
  std::size_t duplicate_sequences = 0;

  std::size_t node_count() const { return harmful + benign + go_terms; }
  std::size_t edge_count() const;
  nlohmann::ordered_json to_json() const;
};

struct IngestOptions {
  // Drop and count edges that reference unknown nodes instead of failing.
  bool drop_dangling = false;
};

struct IngestResult {
  Graph graph;
  IngestReport report;
};

IngestResult build_graph(const NodeRecords& nodes, const std::vector<Triple>& annotations,
                         const std::vector<Triple>& go_relations, IngestOptions options = {});

struct HarmfulSplit {
  std::vector<ProteinRecord> train;
  std::vector<ProteinRecord> test;
};

// Seeded shuffle, then the first round(ratio * N) records train. Both halves
// are returned sorted by id.
HarmfulSplit split_harmful(std::vector<ProteinRecord> records, double ratio, std::uint64_t seed);

NodeRecords records_from_graph(const Graph& graph);

std::string serialize_nodes(const Graph& graph);
std::string serialize_annotations(const Graph& graph);
std::string serialize_go_relations(const Graph& graph);
std::string serialize_proteins(const std::vector<ProteinRecord>& records);

// Writes nodes.tsv, annotations.tsv and go_relations.tsv into `dir`.
void write_graph(const Graph& graph, const std::filesystem::path& dir);
Graph read_graph(const std::filesystem::path& dir);

}  // namespace kpo
