#include "kpo/embed.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "kpo/error.hpp"
#include "kpo/io.hpp"

namespace kpo {

using Index = Graph::Index;

std::string_view to_string(TransELoss f) noexcept {
  return f == TransELoss::Printed ? "printed" : "canonical";
}

std::optional<TransELoss> parse_transe_loss(std::string_view s) noexcept {
  if (s == "printed") return TransELoss::Printed;
  if (s == "canonical") return TransELoss::Canonical;
  return std::nullopt;
}

void EmbedConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, "embed: " + m); };
  if (dim <= 0) fail("dim must be positive");
  if (!(margin > 0)) fail("margin must be > 0");
  if (!(learning_rate > 0)) fail("learning_rate must be > 0");
  if (epochs < 0) fail("epochs must be >= 0");
  if (negatives_per_positive <= 0) fail("negatives_per_positive must be positive");
}

EmbeddingTable::EmbeddingTable(int dim, std::vector<NodeId> entity_ids,
                               std::vector<std::string> relation_ids, std::uint64_t seed)
    : dim_(dim),
      seed_(seed),
      entity_ids_(std::move(entity_ids)),
      relation_ids_(std::move(relation_ids)),
      entities_(entity_ids_.size() * static_cast<std::size_t>(dim), 0.0),
      relations_(relation_ids_.size() * static_cast<std::size_t>(dim), 0.0) {
  if (!std::is_sorted(entity_ids_.begin(), entity_ids_.end()) ||
      !std::is_sorted(relation_ids_.begin(), relation_ids_.end())) {
    throw Error(ErrorCode::DomainError, "embedding ids must be sorted");
  }
}

namespace {

std::optional<std::size_t> sorted_find(const std::vector<std::string>& ids, std::string_view id) {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - ids.begin());
}

double squared_norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

std::optional<std::size_t> EmbeddingTable::find_entity(std::string_view id) const {
  return sorted_find(entity_ids_, id);
}

std::optional<std::size_t> EmbeddingTable::find_relation(std::string_view id) const {
  return sorted_find(relation_ids_, id);
}

std::size_t EmbeddingTable::entity_index(std::string_view id) const {
  if (auto i = find_entity(id)) return *i;
  throw Error(ErrorCode::NotFound, "no embedding for entity '" + std::string(id) + "'");
}

std::size_t EmbeddingTable::relation_index(std::string_view id) const {
  if (auto i = find_relation(id)) return *i;
  throw Error(ErrorCode::NotFound, "no embedding for relation '" + std::string(id) + "'");
}

void EmbeddingTable::normalize_entities() {
  for (std::size_t i = 0; i < entity_count(); ++i) {
    auto v = entity(i);
    const double norm = std::sqrt(squared_norm(v));
    if (norm > 0) {
      for (double& x : v) x /= norm;
    }
  }
}

bool EmbeddingTable::all_finite() const {
  auto finite = [](double x) { return std::isfinite(x); };
  return std::all_of(entities_.begin(), entities_.end(), finite) &&
         std::all_of(relations_.begin(), relations_.end(), finite);
}

EmbeddingTable init_embeddings(const Graph& graph, const EmbedConfig& cfg, bool normalize) {
  cfg.validate();
  std::vector<NodeId> ids;
  ids.reserve(graph.size());
  for (const Node& n : graph.nodes()) ids.push_back(n.id);
  EmbeddingTable table(cfg.dim, std::move(ids), graph.relations(), cfg.seed);
  const double bound = 6.0 / std::sqrt(static_cast<double>(cfg.dim));
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& x : table.entity_data()) x = dist(rng);
  for (double& x : table.relation_data()) x = dist(rng);
  if (normalize) table.normalize_entities();
  return table;
}

namespace {

struct TripleRef {
  std::size_t head;
  std::size_t relation;
  std::size_t tail;
};

TripleRef resolve(const EmbeddingTable& table, const Triple& t) {
  return {table.entity_index(t.src), table.relation_index(t.relation), table.entity_index(t.dst)};
}

void translation_residual(const EmbeddingTable& table, const TripleRef& t, std::vector<double>& out) {
  const auto h = table.entity(t.head);
  const auto r = table.relation(t.relation);
  const auto e = table.entity(t.tail);
  out.resize(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) out[k] = h[k] + r[k] - e[k];
}

// One contribution `coef * residual` to an entity (or relation) gradient row.
struct GradTerm {
  bool is_entity;
  std::size_t index;
  double coef;
  std::size_t residual;  // index into the residual list
};

// Loss of one positive with its negatives. Gradient terms reference
// `residuals`: slot 0 is the positive's, slot 1 + j the j-th negative's.
double positive_block(const EmbeddingTable& table, const TripleRef& pos,
                      std::span<const TripleRef> negs, double margin, TransELoss form,
                      std::vector<std::vector<double>>& residuals, std::vector<GradTerm>& terms) {
  residuals.resize(1 + negs.size());
  translation_residual(table, pos, residuals[0]);
  const double pos_sq = squared_norm(residuals[0]);
  double loss = 0;
  auto add_pos = [&](double scale) {
    terms.push_back({true, pos.head, 2.0 * scale, 0});
    terms.push_back({false, pos.relation, 2.0 * scale, 0});
    terms.push_back({true, pos.tail, -2.0 * scale, 0});
  };
  auto add_neg = [&](const TripleRef& n, std::size_t slot, double scale) {
    terms.push_back({true, n.head, -2.0 * scale, slot});
    terms.push_back({false, n.relation, -2.0 * scale, slot});
    terms.push_back({true, n.tail, 2.0 * scale, slot});
  };
  if (form == TransELoss::Printed) {
    loss += pos_sq;
    add_pos(1.0);
  }
  for (std::size_t j = 0; j < negs.size(); ++j) {
    translation_residual(table, negs[j], residuals[1 + j]);
    const double neg_sq = squared_norm(residuals[1 + j]);
    const double hinge = form == TransELoss::Printed ? margin - neg_sq : margin + pos_sq - neg_sq;
    if (hinge > 0) {
      loss += hinge;
      if (form == TransELoss::Canonical) add_pos(1.0);
      add_neg(negs[j], 1 + j, 1.0);
    }
  }
  return loss;
}

void check_negatives_shape(std::span<const Triple> positives,
                           std::span<const std::vector<Triple>> negatives) {
  if (!negatives.empty() && negatives.size() != positives.size()) {
    throw Error(ErrorCode::DomainError, "negatives must be given per positive");
  }
}

}  // namespace

double transe_gradient(const EmbeddingTable& table, std::span<const Triple> positives,
                       std::span<const std::vector<Triple>> negatives, double margin,
                       TransELoss form, EmbeddingTable& grad) {
  check_negatives_shape(positives, negatives);
  grad = EmbeddingTable(table.dim(), table.entity_ids(), table.relation_ids(), table.seed());
  std::vector<std::vector<double>> residuals;
  std::vector<GradTerm> terms;
  std::vector<TripleRef> negs;
  double loss = 0;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    negs.clear();
    if (!negatives.empty()) {
      for (const Triple& n : negatives[i]) negs.push_back(resolve(table, n));
    }
    terms.clear();
    loss += positive_block(table, resolve(table, positives[i]), negs, margin, form, residuals, terms);
    for (const GradTerm& t : terms) {
      auto row = t.is_entity ? grad.entity(t.index) : grad.relation(t.index);
      const auto& res = residuals[t.residual];
      for (std::size_t k = 0; k < row.size(); ++k) row[k] += t.coef * res[k];
    }
  }
  return loss;
}

double transe_loss(const EmbeddingTable& table, std::span<const Triple> positives,
                   std::span<const std::vector<Triple>> negatives, double margin, TransELoss form) {
  EmbeddingTable scratch;
  return transe_gradient(table, positives, negatives, margin, form, scratch);
}

namespace {

class NegativeSampler {
 public:
  explicit NegativeSampler(const Graph& graph) : graph_(graph) {
    for (NodeKind k : {NodeKind::HarmfulProtein, NodeKind::BenignProtein, NodeKind::GoTerm}) {
      pools_[static_cast<std::size_t>(k)] = graph.indices_of(k);
    }
  }

  Graph::IndexedTriple draw(const Graph::IndexedTriple& t, std::mt19937_64& rng) {
    const bool head_first = std::bernoulli_distribution(0.5)(rng);
    for (bool head : {head_first, !head_first}) {
      if (auto c = corrupt(t, head, rng)) return *c;
    }
    const auto& n = graph_.nodes();
    throw Error(ErrorCode::CorruptionExhausted,
                "every corruption of (" + n[t.src].id + ", " + graph_.relations()[t.relation] +
                    ", " + n[t.dst].id + ") is an existing edge");
  }

 private:
  bool valid(const Graph::IndexedTriple& c) const {
    return c.src != c.dst && !graph_.has_triple(c.src, c.relation, c.dst);
  }

  Graph::IndexedTriple replaced(Graph::IndexedTriple t, bool head, Index node) const {
    (head ? t.src : t.dst) = node;
    return t;
  }

  std::optional<Graph::IndexedTriple> corrupt(const Graph::IndexedTriple& t, bool head,
                                              std::mt19937_64& rng) {
    const auto& pool = pools_[static_cast<std::size_t>(graph_.kind(head ? t.src : t.dst))];
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (int attempt = 0; attempt < 32; ++attempt) {
      auto c = replaced(t, head, pool[pick(rng)]);
      if (valid(c)) return c;
    }
    // Dense neighbourhoods: fall back to drawing from the explicit valid set.
    std::vector<Index> options;
    for (Index v : pool) {
      if (valid(replaced(t, head, v))) options.push_back(v);
    }
    if (options.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> choose(0, options.size() - 1);
    return replaced(t, head, options[choose(rng)]);
  }

  const Graph& graph_;
  std::array<std::vector<Index>, 3> pools_;
};

}  // namespace

std::vector<Triple> sample_negatives(const Graph& graph, const Triple& positive, int n,
                                     std::mt19937_64& rng) {
  if (n < 1) throw Error(ErrorCode::DomainError, "negative count must be >= 1");
  const Index s = graph.index_of(positive.src);
  const Index d = graph.index_of(positive.dst);
  const auto& rels = graph.relations();
  auto rel_it = std::lower_bound(rels.begin(), rels.end(), positive.relation);
  if (rel_it == rels.end() || *rel_it != positive.relation) {
    throw Error(ErrorCode::NotFound, "unknown relation '" + positive.relation + "'");
  }
  const Graph::IndexedTriple t{s, static_cast<Index>(rel_it - rels.begin()), d};
  NegativeSampler sampler(graph);
  std::vector<Triple> out;
  for (int i = 0; i < n; ++i) {
    const auto c = sampler.draw(t, rng);
    out.push_back({graph.node(c.src).id, positive.relation, graph.node(c.dst).id});
  }
  return out;
}

EmbedResult train_embeddings(const Graph& graph, const EmbedConfig& cfg,
                             const EpochObserver& observer) {
  cfg.validate();
  if (graph.indexed_triples().empty()) {
    throw Error(ErrorCode::EmptyInput, "graph has no triples to embed");
  }
  EmbedResult result{init_embeddings(graph, cfg), {}};
  EmbeddingTable& table = result.table;
  const auto& triples = graph.indexed_triples();
  // Entity rows line up with graph indices; relation rows with relations().
  NegativeSampler sampler(graph);
  std::mt19937_64 rng(cfg.seed ^ 0x5DEECE66DULL);
  std::vector<std::size_t> order(triples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<std::vector<double>> residuals;
  std::vector<GradTerm> terms;
  std::vector<TripleRef> negs;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    for (std::size_t idx : order) {
      const auto& t = triples[idx];
      negs.clear();
      for (int j = 0; j < cfg.negatives_per_positive; ++j) {
        const auto c = sampler.draw(t, rng);
        negs.push_back({c.src, c.relation, c.dst});
      }
      terms.clear();
      epoch_loss += positive_block(table, {t.src, t.relation, t.dst}, negs, cfg.margin, cfg.loss,
                                   residuals, terms);
      for (const GradTerm& g : terms) {
        auto row = g.is_entity ? table.entity(g.index) : table.relation(g.index);
        const auto& res = residuals[g.residual];
        for (std::size_t k = 0; k < row.size(); ++k) row[k] -= cfg.learning_rate * g.coef * res[k];
      }
    }
    table.normalize_entities();
    if (!std::isfinite(epoch_loss) || !table.all_finite()) {
      throw Error(ErrorCode::DivergenceError,
                  "TransE loss became non-finite at epoch " + std::to_string(epoch) +
                      "; lower learning_rate");
    }
    result.loss_trace.push_back(epoch_loss);
    if (observer) observer(epoch, table, epoch_loss);
  }
  return result;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0 || nb == 0) throw Error(ErrorCode::DegenerateVector, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double cosine(const EmbeddingTable& table, std::string_view a, std::string_view b) {
  return cosine(table.entity_vector(a), table.entity_vector(b));
}

std::string serialize_embeddings(const EmbeddingTable& table) {
  std::string out = "#dim\t" + std::to_string(table.dim()) + "\tseed\t" +
                    std::to_string(table.seed()) + "\n";
  auto emit = [&](const std::string& id, std::span<const double> v) {
    out += id;
    for (double x : v) {
      out += '\t';
      out += io::format_double(x);
    }
    out += '\n';
  };
  for (std::size_t i = 0; i < table.entity_count(); ++i) emit(table.entity_ids()[i], table.entity(i));
  out += "#relations\n";
  for (std::size_t i = 0; i < table.relation_count(); ++i) {
    emit(table.relation_ids()[i], table.relation(i));
  }
  return out;
}

EmbeddingTable parse_embeddings(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  int dim = -1;
  std::uint64_t seed = 0;
  bool in_relations = false;
  std::vector<std::string> entity_ids, relation_ids;
  std::vector<double> entity_values, relation_values;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto fields = io::split_tabs(line);
    if (fields[0] == "#dim") {
      if (fields.size() != 4 || fields[2] != "seed") {
        throw Error(ErrorCode::ParseError, "malformed embedding header", number);
      }
      dim = static_cast<int>(io::parse_int(fields[1]));
      seed = static_cast<std::uint64_t>(io::parse_int(fields[3]));
      continue;
    }
    if (fields[0] == "#relations") {
      in_relations = true;
      continue;
    }
    if (dim <= 0) throw Error(ErrorCode::ParseError, "missing embedding header", number);
    if (fields.size() != static_cast<std::size_t>(dim) + 1) {
      throw Error(ErrorCode::ParseError, "expected " + std::to_string(dim) + " values", number);
    }
    auto& ids = in_relations ? relation_ids : entity_ids;
    auto& values = in_relations ? relation_values : entity_values;
    ids.emplace_back(fields[0]);
    for (std::size_t k = 1; k < fields.size(); ++k) values.push_back(io::parse_double(fields[k]));
  }
  if (dim <= 0) throw Error(ErrorCode::ParseError, "missing embedding header");
  EmbeddingTable table(dim, std::move(entity_ids), std::move(relation_ids), seed);
  table.entity_data() = std::move(entity_values);
  table.relation_data() = std::move(relation_values);
  return table;
}

void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  io::write_atomic(path, serialize_embeddings(table));
}

EmbeddingTable read_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(io::read_file(path));
}

}  // namespace kpo
