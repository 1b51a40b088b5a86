#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "kpo/embed.hpp"
#include "kpo/error.hpp"
#include "kpo/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace kpo;

namespace {

double sq_dist(const EmbeddingTable& t, const Triple& x) {
  auto h = t.entity_vector(x.src);
  auto r = t.relation(t.relation_index(x.relation));
  auto d = t.entity_vector(x.dst);
  double s = 0;
  for (std::size_t k = 0; k < h.size(); ++k) s += (h[k] + r[k] - d[k]) * (h[k] + r[k] - d[k]);
  return s;
}

// The printed objective written out directly from its definition.
double printed_loss(const EmbeddingTable& t, const std::vector<Triple>& pos,
                    const std::vector<std::vector<Triple>>& neg, double margin) {
  double loss = 0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    loss += sq_dist(t, pos[i]);
    for (const auto& n : neg[i]) loss += std::max(0.0, margin - sq_dist(t, n));
  }
  return loss;
}

double canonical_loss(const EmbeddingTable& t, const std::vector<Triple>& pos,
                      const std::vector<std::vector<Triple>>& neg, double margin) {
  double loss = 0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (const auto& n : neg[i]) loss += std::max(0.0, margin + sq_dist(t, pos[i]) - sq_dist(t, n));
  }
  return loss;
}

struct Problem {
  Graph graph;
  EmbeddingTable table;
  std::vector<Triple> pos;
  std::vector<std::vector<Triple>> neg;
};

Problem make_problem(std::uint64_t seed, int dim) {
  SynthConfig sc;
  sc.harmful = 6;
  sc.benign = 10;
  sc.go_terms = 8;
  sc.seed = seed;
  Problem p{synth_graph(sc), {}, {}, {}};
  EmbedConfig cfg;
  cfg.dim = dim;
  cfg.seed = seed;
  p.table = init_embeddings(p.graph, cfg, false);
  std::mt19937_64 rng(seed);
  p.pos = p.graph.triples();
  for (const auto& t : p.pos) p.neg.push_back(sample_negatives(p.graph, t, 2, rng));
  return p;
}

bool near_kink(const Problem& p, double margin, TransELoss form) {
  for (std::size_t i = 0; i < p.pos.size(); ++i) {
    for (const auto& n : p.neg[i]) {
      const double arg = form == TransELoss::Printed ? margin - sq_dist(p.table, n)
                                                     : margin + sq_dist(p.table, p.pos[i]) - sq_dist(p.table, n);
      if (std::abs(arg) < 1e-3) return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("init is uniform in the documented box then normalised") {
  Graph g = fixture::two_go();
  EmbedConfig cfg;
  cfg.dim = 16;
  auto raw = init_embeddings(g, cfg, false);
  const double bound = 6.0 / std::sqrt(16.0);
  for (double v : raw.entity_data()) CHECK(std::abs(v) <= bound);
  for (double v : raw.relation_data()) CHECK(std::abs(v) <= bound);
  auto t = init_embeddings(g, cfg);
  for (std::size_t i = 0; i < t.entity_count(); ++i) {
    double n = 0;
    for (double v : t.entity(i)) n += v * v;
    CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(t.entity_ids() == std::vector<NodeId>{"B1", "B2", "B3", "H1", "H2", "g1", "g2"});
  CHECK(t.relation_ids() == std::vector<std::string>{"annotated_with"});
}

TEST_CASE("loss matches the objective written out directly") {
  for (auto form : {TransELoss::Printed, TransELoss::Canonical}) {
    auto p = make_problem(3, 8);
    const double want = form == TransELoss::Printed ? printed_loss(p.table, p.pos, p.neg, 1.0)
                                                    : canonical_loss(p.table, p.pos, p.neg, 1.0);
    CHECK(transe_loss(p.table, p.pos, p.neg, 1.0, form) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradient matches central differences") {
  for (auto form : {TransELoss::Printed, TransELoss::Canonical}) {
    int checked = 0;
    for (std::uint64_t seed = 1; checked < 5 && seed < 50; ++seed) {
      auto p = make_problem(seed, 6);
      const double margin = form == TransELoss::Printed ? 4.0 : 1.0;
      if (near_kink(p, margin, form)) continue;
      EmbeddingTable grad;
      transe_gradient(p.table, p.pos, p.neg, margin, form, grad);
      auto f = [&] { return transe_loss(p.table, p.pos, p.neg, margin, form); };
      for (std::size_t k = 0; k < p.table.entity_data().size(); k += 3) {
        const double fd = oracle::central_difference(f, p.table.entity_data()[k]);
        REQUIRE(oracle::close_rel(grad.entity_data()[k], fd));
      }
      for (std::size_t k = 0; k < p.table.relation_data().size(); ++k) {
        const double fd = oracle::central_difference(f, p.table.relation_data()[k]);
        REQUIRE(oracle::close_rel(grad.relation_data()[k], fd));
      }
      ++checked;
    }
    CHECK(checked == 5);
  }
}

TEST_CASE("negatives keep kinds and avoid true edges") {
  SynthConfig sc;
  sc.harmful = 8;
  sc.benign = 20;
  sc.go_terms = 12;
  Graph g = synth_graph(sc);
  std::mt19937_64 rng(1);
  std::set<Triple> edges(g.triples().begin(), g.triples().end());
  for (const auto& t : g.triples()) {
    for (const auto& n : sample_negatives(g, t, 3, rng)) {
      CHECK(edges.count(n) == 0);
      CHECK(n.relation == t.relation);
      CHECK(n.src != n.dst);
      CHECK(g.kind(g.index_of(n.src)) == g.kind(g.index_of(t.src)));
      CHECK(g.kind(g.index_of(n.dst)) == g.kind(g.index_of(t.dst)));
      CHECK((n.src == t.src || n.dst == t.dst));
    }
  }
}

TEST_CASE("saturated neighbourhoods exhaust corruption") {
  Graph g = Graph::from_parts({{"P", NodeKind::BenignProtein, "A"}, {"g", NodeKind::GoTerm, "x"}},
                              {{"P", "annotated_with", "g"}});
  std::mt19937_64 rng(0);
  CHECK_THROWS_AS(sample_negatives(g, g.triples()[0], 1, rng), Error);
}

TEST_CASE("training keeps unit entity norms, is seeded and lowers the loss") {
  SynthConfig sc;
  sc.harmful = 10;
  sc.benign = 30;
  sc.go_terms = 15;
  Graph g = synth_graph(sc);
  EmbedConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 30;
  int observed = 0;
  auto a = train_embeddings(g, cfg, [&](int, const EmbeddingTable& t, double) {
    ++observed;
    for (std::size_t i = 0; i < t.entity_count(); ++i) {
      double n = 0;
      for (double v : t.entity(i)) n += v * v;
      REQUIRE(std::abs(std::sqrt(n) - 1.0) < 1e-9);
    }
  });
  CHECK(observed == 30);
  CHECK(a.loss_trace.size() == 30);
  CHECK(a.loss_trace.back() < a.loss_trace.front());
  CHECK(a.table.all_finite());
  auto b = train_embeddings(g, cfg);
  CHECK(a.table == b.table);
  CHECK(a.loss_trace == b.loss_trace);
}

TEST_CASE("cosine") {
  std::vector<double> x{1, 0}, y{0, 2}, z{3, 0}, zero{0, 0};
  CHECK(cosine(x, y) == 0.0);
  CHECK(cosine(x, z) == doctest::Approx(1.0));
  CHECK_THROWS_AS(cosine(x, zero), Error);
}

TEST_CASE("embedding files round-trip exactly") {
  auto p = make_problem(7, 5);
  test::TempDir dir;
  write_embeddings(p.table, dir.path() / "e.tsv");
  CHECK(read_embeddings(dir.path() / "e.tsv") == p.table);
  CHECK(serialize_embeddings(parse_embeddings(serialize_embeddings(p.table))) == serialize_embeddings(p.table));
}

TEST_CASE("config validation") {
  EmbedConfig c;
  c.dim = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = EmbedConfig{};
  c.margin = -1;
  CHECK_THROWS_AS(c.validate(), Error);
}
