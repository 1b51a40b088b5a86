#include <doctest.h>

#include "fixtures.hpp"
#include "kpo/error.hpp"
#include "kpo/pair.hpp"
#include "kpo/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace kpo;

namespace {

oracle::RawGraph raw_of(const Graph& g) {
  oracle::RawGraph raw;
  for (const auto& n : g.nodes()) raw.kind[n.id] = kind_code(n.kind);
  for (const auto& t : g.triples()) raw.edges.push_back({t.src, t.relation, t.dst});
  return raw;
}

}  // namespace

TEST_CASE("combined score") {
  CHECK(combined_score(2, 0.4, 0.5) == doctest::Approx(0.45));
  CHECK(combined_score(1, -1.0, 1.0) == 1.0);
  CHECK(combined_score(3, 0.25, 0.0) == 0.25);
  CHECK_THROWS_AS(combined_score(0, 0.1, 0.5), Error);
}

TEST_CASE("candidates on the fixture") {
  Graph g = fixture::two_go();
  auto c = candidate_benign(g, "H1", 2);
  CHECK(c == std::map<NodeId, int>{{"B1", 2}, {"B2", 2}});
  CHECK(candidate_benign(g, "H1", 4).count("B3") == 1);
  CHECK(candidate_benign(g, "H1", 1).empty());
  CHECK_THROWS_AS(candidate_benign(g, "B1", 2), Error);
}

TEST_CASE("candidates agree with the relaxation oracle") {
  SynthConfig sc;
  sc.harmful = 8;
  sc.benign = 30;
  sc.go_terms = 20;
  sc.annotation_density = 1.5;
  Graph g = synth_graph(sc);
  auto raw = raw_of(g);
  for (int tau : {2, 3, 4}) {
    for (auto h : g.indices_of(NodeKind::HarmfulProtein)) {
      const auto& id = g.node(h).id;
      std::map<NodeId, int> want;
      for (const auto& [n, d] : oracle::hops(raw, id, tau)) {
        if (raw.kind[n] == 'B') want[n] = d;
      }
      CHECK(candidate_benign(g, id, tau) == want);
    }
  }
}

TEST_CASE("selection ranks by the combined score with id tie-break") {
  SynthConfig sc;
  sc.harmful = 6;
  sc.benign = 25;
  sc.go_terms = 10;
  Graph g = synth_graph(sc);
  EmbeddingTable t = init_embeddings(g, EmbedConfig{.dim = 8});
  PairConfig cfg;
  cfg.top_m = 3;
  cfg.tau = 3;
  auto sel = select_pairs(g, t, cfg);
  for (auto h : g.indices_of(NodeKind::HarmfulProtein)) {
    const auto& hid = g.node(h).id;
    std::vector<std::pair<double, NodeId>> want;
    for (const auto& [b, hop] : candidate_benign(g, hid, cfg.tau)) {
      want.emplace_back(-combined_score(hop, cosine(t, hid, b), cfg.mu), b);
    }
    std::sort(want.begin(), want.end());
    std::vector<NodeId> got;
    for (const auto& p : sel.pairs) {
      if (p.harmful_id == hid) {
        got.push_back(p.benign_id);
        CHECK(p.harmful_seq == g.node(h).payload);
        CHECK(p.context.empty());
      }
    }
    REQUIRE(got.size() == std::min<std::size_t>(3, want.size()));
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i].second);
  }
  CHECK(sel.report.pair_count == sel.pairs.size());
  CHECK(sel.report.harmful_total == 6);
}

TEST_CASE("threads do not change the output") {
  SynthConfig sc;
  sc.harmful = 20;
  sc.benign = 60;
  sc.go_terms = 30;
  Graph g = synth_graph(sc);
  EmbeddingTable t = init_embeddings(g, EmbedConfig{.dim = 8});
  PairConfig one, four;
  four.threads = 4;
  CHECK(select_pairs(g, t, one).pairs == select_pairs(g, t, four).pairs);
}

TEST_CASE("harmful proteins without candidates are reported") {
  Graph g = Graph::from_parts({{"H1", NodeKind::HarmfulProtein, "C"},
                               {"H2", NodeKind::HarmfulProtein, "C"},
                               {"B1", NodeKind::BenignProtein, "A"},
                               {"g1", NodeKind::GoTerm, "x"},
                               {"g2", NodeKind::GoTerm, "x"}},
                              {{"H1", "annotated_with", "g1"},
                               {"B1", "annotated_with", "g1"},
                               {"H2", "annotated_with", "g2"}});
  auto sel = select_pairs(g, init_embeddings(g, EmbedConfig{.dim = 4}), PairConfig{});
  CHECK(sel.pairs.size() == 1);
  CHECK(sel.report.harmful_without_candidates == std::vector<NodeId>{"H2"});
}

TEST_CASE("benign reuse is counted") {
  Graph g = fixture::two_go();
  auto sel = select_pairs(g, init_embeddings(g, EmbedConfig{.dim = 4}), PairConfig{});
  CHECK(sel.pairs.size() == 4);
  CHECK(sel.report.distinct_benign == 2);
  CHECK(sel.report.benign_reuse == 2);
}

TEST_CASE("pairs.jsonl round-trips") {
  Graph g = fixture::two_go();
  auto sel = select_pairs(g, init_embeddings(g, EmbedConfig{.dim = 4}), PairConfig{});
  test::TempDir dir;
  CHECK(export_pairs(sel.pairs, dir.path() / "pairs.jsonl") == sel.pairs.size());
  CHECK(read_pairs(dir.path() / "pairs.jsonl") == sel.pairs);
  auto j = pair_to_json(sel.pairs[0]);
  for (const char* key : {"harmful_id", "benign_id", "harmful_seq", "benign_seq", "hop", "cosine", "score", "context"}) {
    CHECK(j.contains(key));
  }
}

TEST_CASE("pair config validation") {
  PairConfig c;
  c.mu = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
  c = PairConfig{};
  c.tau = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = PairConfig{};
  c.top_m = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}
