#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "kpo/graph.hpp"

namespace kpo {

// Printed: sum over positives of |h + r - t|^2 plus, per negative,
//   max(0, margin - |h' + r - t'|^2).
// Canonical: the usual coupled hinge max(0, margin + pos - neg).
enum class TransELoss { Printed, Canonical };

std::string_view to_string(TransELoss f) noexcept;
std::optional<TransELoss> parse_transe_loss(std::string_view s) noexcept;

struct EmbedConfig {
  int dim = 50;
  double margin = 1.0;
  double learning_rate = 0.01;
  int epochs = 100;
  int negatives_per_positive = 1;
  std::uint64_t seed = 0;
  TransELoss loss = TransELoss::Printed;

  void validate() const;
};

// Entity and relation vectors stored row-major in flat buffers.
class EmbeddingTable {
 private:
  template <typename V>
  auto row(V& data, std::size_t i) const {
    using T = std::remove_reference_t<decltype(data[0])>;
    return std::span<T>(data.data() + i * static_cast<std::size_t>(dim_),
                        static_cast<std::size_t>(dim_));
  }

 public:
  EmbeddingTable() = default;
  EmbeddingTable(int dim, std::vector<NodeId> entity_ids, std::vector<std::string> relation_ids,
                 std::uint64_t seed = 0);

  int dim() const noexcept { return dim_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t entity_count() const noexcept { return entity_ids_.size(); }
  std::size_t relation_count() const noexcept { return relation_ids_.size(); }
  const std::vector<NodeId>& entity_ids() const noexcept { return entity_ids_; }
  const std::vector<std::string>& relation_ids() const noexcept { return relation_ids_; }

  std::optional<std::size_t> find_entity(std::string_view id) const;
  std::optional<std::size_t> find_relation(std::string_view id) const;
  // Both throw NotFound.
  std::size_t entity_index(std::string_view id) const;
  std::size_t relation_index(std::string_view id) const;

  std::span<double> entity(std::size_t i) { return row(entities_, i); }
  std::span<const double> entity(std::size_t i) const { return row(entities_, i); }
  std::span<double> relation(std::size_t i) { return row(relations_, i); }
  std::span<const double> relation(std::size_t i) const { return row(relations_, i); }
  std::span<const double> entity_vector(std::string_view id) const { return entity(entity_index(id)); }

  std::vector<double>& entity_data() noexcept { return entities_; }
  const std::vector<double>& entity_data() const noexcept { return entities_; }
  std::vector<double>& relation_data() noexcept { return relations_; }
  const std::vector<double>& relation_data() const noexcept { return relations_; }

  void normalize_entities();
  bool all_finite() const;

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  int dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<NodeId> entity_ids_;
  std::vector<std::string> relation_ids_;
  std::vector<double> entities_;
  std::vector<double> relations_;
};

// Uniform in [-6/sqrt(d), 6/sqrt(d)], then entity rows L2-normalised unless
// `normalize` is false. Entity rows follow the graph's node order.
EmbeddingTable init_embeddings(const Graph& graph, const EmbedConfig& cfg, bool normalize = true);

double transe_loss(const EmbeddingTable& table, std::span<const Triple> positives,
                   std::span<const std::vector<Triple>> negatives, double margin,
                   TransELoss form = TransELoss::Printed);

// Returns the loss and writes d(loss)/d(parameter) into `grad`, which is
// reshaped to match `table`. The hinge subgradient at its kink is 0.
double transe_gradient(const EmbeddingTable& table, std::span<const Triple> positives,
                       std::span<const std::vector<Triple>> negatives, double margin,
                       TransELoss form, EmbeddingTable& grad);

// Corrupts head or tail (fair coin) with a uniformly drawn node of the same
// kind, rejecting corruptions that are themselves edges. Falls back to the
// other endpoint when one side has no valid replacement; throws
// CorruptionExhausted when neither does.
std::vector<Triple> sample_negatives(const Graph& graph, const Triple& positive, int n,
                                     std::mt19937_64& rng);

struct EmbedResult {
  EmbeddingTable table;
  std::vector<double> loss_trace;
};

using EpochObserver = std::function<void(int epoch, const EmbeddingTable& table, double loss)>;

// Per-triple SGD over a seeded shuffle; entity rows are renormalised at the
// end of every epoch. Throws DivergenceError on a non-finite loss.
EmbedResult train_embeddings(const Graph& graph, const EmbedConfig& cfg,
                             const EpochObserver& observer = {});

// Throws DegenerateVector for a zero vector.
double cosine(const EmbeddingTable& table, std::string_view a, std::string_view b);
double cosine(std::span<const double> a, std::span<const double> b);

std::string serialize_embeddings(const EmbeddingTable& table);
EmbeddingTable parse_embeddings(std::string_view text);
void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable read_embeddings(const std::filesystem::path& path);

}  // namespace kpo
