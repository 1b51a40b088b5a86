#include "kpo/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include <spdlog/spdlog.h>

#include "kpo/embed.hpp"
#include "kpo/error.hpp"
#include "kpo/pair.hpp"
#include "kpo/prune.hpp"
#include "kpo/synth.hpp"

namespace kpo {

SynthConfig scaled_synth(const SynthConfig& base, std::size_t nodes) {
  const double total = base.harmful + base.benign + base.go_terms;
  SynthConfig s = base;
  auto share = [&](int part) {
    return std::max(1, static_cast<int>(std::lround(static_cast<double>(nodes) * part / total)));
  };
  s.harmful = share(base.harmful);
  s.go_terms = share(base.go_terms);
  s.benign = std::max(1, static_cast<int>(nodes) - s.harmful - s.go_terms);
  s.go_depth = std::min(s.go_depth, s.go_terms);
  return s;
}

namespace {

struct Timed {
  double seconds;
  std::size_t pairs;
};

Timed median_mining_time(const Graph& g, const EmbeddingTable& table, const PairConfig& cfg,
                         int repeats) {
  std::vector<double> times;
  std::size_t pairs = 0;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    auto sel = select_pairs(g, table, cfg);
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    pairs = sel.pairs.size();
  }
  std::sort(times.begin(), times.end());
  const auto n = times.size();
  const double median = n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
  return {median, pairs};
}

}  // namespace

std::vector<BenchRow> bench_prune(const PipelineConfig& cfg, std::span<const std::size_t> sizes,
                                  int repeats) {
  if (repeats < 1) throw Error(ErrorCode::ConfigError, "repeats must be >= 1");
  std::vector<BenchRow> rows;
  for (std::size_t size : sizes) {
    const Graph full = synth_graph(scaled_synth(cfg.synth, size));
    const Graph pruned = prune(full, cfg.prune).graph;
    const auto full_t = median_mining_time(full, init_embeddings(full, cfg.embed), cfg.pair, repeats);
    const auto pruned_t =
        median_mining_time(pruned, init_embeddings(pruned, cfg.embed), cfg.pair, repeats);
    BenchRow row;
    row.nodes = full.size();
    row.pruned_nodes = pruned.size();
    row.full_pairs = full_t.pairs;
    row.pruned_pairs = pruned_t.pairs;
    row.full_seconds = full_t.seconds;
    row.pruned_seconds = pruned_t.seconds;
    row.ratio = full_t.seconds > 0 ? pruned_t.seconds / full_t.seconds : 0.0;
    spdlog::info("bench: {} nodes full {:.4f}s pruned {:.4f}s ratio {:.3f}", row.nodes,
                 row.full_seconds, row.pruned_seconds, row.ratio);
    rows.push_back(row);
  }
  return rows;
}

std::string format_bench(const std::vector<BenchRow>& rows) {
  std::string out = "nodes\tpruned_nodes\tfull_pairs\tpruned_pairs\tfull_s\tpruned_s\tratio\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu\t%zu\t%zu\t%zu\t%.6f\t%.6f\t%.4f\n", r.nodes, r.pruned_nodes,
                  r.full_pairs, r.pruned_pairs, r.full_seconds, r.pruned_seconds, r.ratio);
    out += buf;
  }
  return out;
}

nlohmann::ordered_json bench_to_json(const std::vector<BenchRow>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    arr.push_back({{"nodes", r.nodes},
                   {"pruned_nodes", r.pruned_nodes},
                   {"full_pairs", r.full_pairs},
                   {"pruned_pairs", r.pruned_pairs},
                   {"full_seconds", r.full_seconds},
                   {"pruned_seconds", r.pruned_seconds},
                   {"ratio", r.ratio}});
  }
  return arr;
}

}  // namespace kpo
