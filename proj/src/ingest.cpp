#include "kpo/ingest.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <cmath>

#include "kpo/alphabet.hpp"
#include "kpo/error.hpp"
#include "kpo/io.hpp"

namespace kpo {

namespace fs = std::filesystem;

NodeRecords parse_nodes(std::istream& in) {
  NodeRecords out;
  std::set<std::string, std::less<>> seen;
  io::for_each_record(in, [&](std::string_view line, std::size_t number) {
    const auto fields = io::split_tabs(line);
    if (fields.size() != 3) {
      throw Error(ErrorCode::ParseError,
                  "expected 3 tab-separated fields, got " + std::to_string(fields.size()), number);
    }
    if (fields[0].empty()) throw Error(ErrorCode::ParseError, "empty node id", number);
    auto kind = kind_from_code(fields[1]);
    if (!kind) {
      throw Error(ErrorCode::ParseError, "unknown node kind '" + std::string(fields[1]) + "'",
                  number);
    }
    if (!seen.emplace(fields[0]).second) {
      throw Error(ErrorCode::ParseError, "duplicate node id '" + std::string(fields[0]) + "'",
                  number);
    }
    if (*kind == NodeKind::GoTerm) {
      out.go_terms.push_back({std::string(fields[0]), std::string(fields[2])});
      return;
    }
    if (fields[2].empty()) throw Error(ErrorCode::ParseError, "empty sequence", number);
    if (auto bad = first_invalid_residue(fields[2])) {
      throw Error(ErrorCode::AlphabetError,
                  "invalid residue '" + std::string(1, fields[2][*bad]) + "' at position " +
                      std::to_string(*bad + 1),
                  number);
    }
    out.proteins.push_back({std::string(fields[0]), *kind, std::string(fields[2])});
  });
  return out;
}

NodeRecords parse_nodes(const fs::path& path) {
  auto in = io::open_input(path);
  return parse_nodes(in);
}

namespace {

std::vector<Triple> parse_triples(std::istream& in, const std::set<std::string_view>& allowed) {
  std::vector<Triple> out;
  io::for_each_record(in, [&](std::string_view line, std::size_t number) {
    const auto fields = io::split_tabs(line);
    if (fields.size() != 3) {
      throw Error(ErrorCode::ParseError,
                  "expected 3 tab-separated fields, got " + std::to_string(fields.size()), number);
    }
    if (fields[0].empty() || fields[2].empty()) {
      throw Error(ErrorCode::ParseError, "empty node id", number);
    }
    if (!allowed.contains(fields[1])) {
      throw Error(ErrorCode::ParseError, "unexpected relation '" + std::string(fields[1]) + "'",
                  number);
    }
    out.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2])});
  });
  return out;
}

}  // namespace

std::vector<Triple> parse_annotations(std::istream& in) {
  return parse_triples(in, {kAnnotatedWith});
}

std::vector<Triple> parse_annotations(const fs::path& path) {
  auto in = io::open_input(path);
  return parse_annotations(in);
}

std::vector<Triple> parse_go_relations(std::istream& in) {
  return parse_triples(in, {kIsA, kPartOf});
}

std::vector<Triple> parse_go_relations(const fs::path& path) {
  auto in = io::open_input(path);
  return parse_go_relations(in);
}

std::size_t IngestReport::edge_count() const {
  std::size_t total = 0;
  for (const auto& [rel, n] : edges_by_relation) total += n;
  return total;
}

nlohmann::ordered_json IngestReport::to_json() const {
  nlohmann::ordered_json j;
  j["nodes"] = {{"harmful", harmful}, {"benign", benign}, {"go_terms", go_terms}};
  j["edges_by_relation"] = nlohmann::ordered_json::object();
  for (const auto& [rel, n] : edges_by_relation) j["edges_by_relation"][rel] = n;
  j["duplicates_dropped"] = duplicates_dropped;
  j["dangling_references"] = dangling_references;
  j["duplicate_sequences"] = duplicate_sequences;
  return j;
}

IngestResult build_graph(const NodeRecords& records, const std::vector<Triple>& annotations,
                         const std::vector<Triple>& go_relations, IngestOptions options) {
  IngestReport report;
  std::vector<Node> nodes;
  nodes.reserve(records.proteins.size() + records.go_terms.size());
  std::set<std::string_view> sequences;
  for (const auto& p : records.proteins) {
    nodes.push_back({p.id, p.label, p.sequence});
    if (!sequences.insert(p.sequence).second) ++report.duplicate_sequences;
  }
  for (const auto& g : records.go_terms) nodes.push_back({g.id, NodeKind::GoTerm, g.label});

  std::set<std::string_view> ids;
  for (const Node& n : nodes) ids.insert(n.id);

  std::vector<Triple> triples;
  triples.reserve(annotations.size() + go_relations.size());
  for (const auto* list : {&annotations, &go_relations}) {
    for (const Triple& t : *list) {
      if (!ids.contains(t.src) || !ids.contains(t.dst)) {
        if (!options.drop_dangling) {
          throw Error(ErrorCode::DanglingEdge, "edge " + t.src + " " + t.relation + " " + t.dst +
                                                   " references an undefined node");
        }
        ++report.dangling_references;
        continue;
      }
      triples.push_back(t);
    }
  }

  IngestResult result;
  result.graph = Graph::from_parts(std::move(nodes), std::move(triples), &report.duplicates_dropped);
  const Graph& g = result.graph;
  report.harmful = g.count(NodeKind::HarmfulProtein);
  report.benign = g.count(NodeKind::BenignProtein);
  report.go_terms = g.count(NodeKind::GoTerm);
  for (const Triple& t : g.triples()) ++report.edges_by_relation[t.relation];
  result.report = std::move(report);
  return result;
}

HarmfulSplit split_harmful(std::vector<ProteinRecord> records, double ratio, std::uint64_t seed) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no harmful records to split");
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::DomainError, "split ratio must lie in (0, 1)");
  }
  // Canonical order first so the split depends only on the record set.
  std::sort(records.begin(), records.end(),
            [](const ProteinRecord& a, const ProteinRecord& b) { return a.id < b.id; });
  std::mt19937_64 rng(seed);
  std::shuffle(records.begin(), records.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(records.size())));
  HarmfulSplit split;
  split.train.assign(std::make_move_iterator(records.begin()),
                     std::make_move_iterator(records.begin() + static_cast<std::ptrdiff_t>(n_train)));
  split.test.assign(std::make_move_iterator(records.begin() + static_cast<std::ptrdiff_t>(n_train)),
                    std::make_move_iterator(records.end()));
  auto by_id = [](const ProteinRecord& a, const ProteinRecord& b) { return a.id < b.id; };
  std::sort(split.train.begin(), split.train.end(), by_id);
  std::sort(split.test.begin(), split.test.end(), by_id);
  return split;
}

NodeRecords records_from_graph(const Graph& graph) {
  NodeRecords out;
  for (const Node& n : graph.nodes()) {
    if (is_protein(n.kind)) {
      out.proteins.push_back({n.id, n.kind, n.payload});
    } else {
      out.go_terms.push_back({n.id, n.payload});
    }
  }
  return out;
}

std::string serialize_nodes(const Graph& graph) {
  std::string out;
  for (const Node& n : graph.nodes()) {
    out += n.id;
    out += '\t';
    out += kind_code(n.kind);
    out += '\t';
    out += n.payload;
    out += '\n';
  }
  return out;
}

namespace {

std::string serialize_triples(const Graph& graph, bool annotations) {
  std::string out;
  for (const Triple& t : graph.triples()) {
    if ((t.relation == kAnnotatedWith) != annotations) continue;
    out += t.src;
    out += '\t';
    out += t.relation;
    out += '\t';
    out += t.dst;
    out += '\n';
  }
  return out;
}

}  // namespace

std::string serialize_annotations(const Graph& graph) { return serialize_triples(graph, true); }

std::string serialize_go_relations(const Graph& graph) { return serialize_triples(graph, false); }

std::string serialize_proteins(const std::vector<ProteinRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.id;
    out += '\t';
    out += kind_code(r.label);
    out += '\t';
    out += r.sequence;
    out += '\n';
  }
  return out;
}

void write_graph(const Graph& graph, const fs::path& dir) {
  io::write_atomic(dir / "nodes.tsv", serialize_nodes(graph));
  io::write_atomic(dir / "annotations.tsv", serialize_annotations(graph));
  io::write_atomic(dir / "go_relations.tsv", serialize_go_relations(graph));
}

Graph read_graph(const fs::path& dir) {
  auto records = parse_nodes(dir / "nodes.tsv");
  auto annotations = parse_annotations(dir / "annotations.tsv");
  auto relations = parse_go_relations(dir / "go_relations.tsv");
  return build_graph(records, annotations, relations).graph;
}

}  // namespace kpo
