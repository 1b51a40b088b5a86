#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kpo/config.hpp"

namespace kpo {

struct BenchRow {
  std::size_t nodes = 0;
  std::size_t pruned_nodes = 0;
  std::size_t full_pairs = 0;
  std::size_t pruned_pairs = 0;
  // Median wall time of select_pairs over the repeats.
  double full_seconds = 0.0;
  double pruned_seconds = 0.0;
  double ratio = 0.0;
};

// Synthetic graph with `nodes` total nodes, keeping the kind proportions of
// `cfg.synth`.
SynthConfig scaled_synth(const SynthConfig& base, std::size_t nodes);

// Times pair mining on the full synthetic graph and on its pruned version
// (cfg.prune). Embeddings are the seeded initial table; training them does
// not change the amount of work select_pairs performs.
std::vector<BenchRow> bench_prune(const PipelineConfig& cfg, std::span<const std::size_t> sizes,
                                  int repeats = 5);

std::string format_bench(const std::vector<BenchRow>& rows);
nlohmann::ordered_json bench_to_json(const std::vector<BenchRow>& rows);

}  // namespace kpo
