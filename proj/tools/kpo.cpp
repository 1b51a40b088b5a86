// kpo: command-line driver for the preference-pair pipeline.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "kpo/adapter.hpp"
#include "kpo/bench.hpp"
#include "kpo/config.hpp"
#include "kpo/error.hpp"
#include "kpo/io.hpp"
#include "kpo/pipeline.hpp"
#include "kpo/synth.hpp"

namespace {

struct Globals {
  std::string config;
  std::string workdir;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

kpo::PipelineConfig resolve(const Globals& g) {
  kpo::PipelineConfig cfg = g.config.empty() ? kpo::PipelineConfig{} : kpo::load_config(g.config);
  if (!g.workdir.empty()) cfg.paths.workdir = g.workdir;
  if (g.seed) cfg.override_seed(*g.seed);
  cfg.validate();
  return cfg;
}

int fail(std::string_view tag, const std::string& what) {
  std::cerr << "kpo: [" << tag << "] " << what << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-guided preference pipeline for protein sequence models"};
  app.set_version_flag("--version", KPO_VERSION);
  app.require_subcommand(1);

  Globals g;
  app.add_option("--config", g.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--workdir", g.workdir, "Working directory; overrides paths.workdir");
  app.add_option("--seed", g.seed, "Override every seed in the config");
  app.add_flag("-v,--verbose", g.verbose, "Log progress to stderr");

  std::vector<std::pair<CLI::App*, kpo::Stage>> stage_cmds;
  for (kpo::Stage s : kpo::kAllStages) {
    const std::string name(kpo::to_string(s));
    stage_cmds.emplace_back(app.add_subcommand(name, "Run the " + name + " stage"), s);
  }
  auto* run_all = app.add_subcommand("run-all", "Run every stage in order");

  auto* bench = app.add_subcommand("bench-prune", "Time pair mining on full vs pruned synthetic graphs");
  std::vector<std::size_t> sizes{1000, 10000};
  int repeats = 5;
  std::string bench_out;
  bench->add_option("--sizes", sizes, "Synthetic graph sizes (total nodes)")->delimiter(',');
  bench->add_option("--repeats", repeats, "Timed runs per graph; the median is reported")
      ->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_out, "Also write the table as JSON here");

  auto* synth = app.add_subcommand("synth", "Write a synthetic graph as raw TSV inputs");
  std::string synth_dir;
  std::optional<std::size_t> synth_nodes;
  synth->add_option("--out", synth_dir, "Output directory")->required();
  synth->add_option("--nodes", synth_nodes, "Total node count (keeps the configured proportions)");

  auto* score = app.add_subcommand("score", "Query an external log-probability adapter");
  std::string adapter_spec, context, sequence;
  int timeout_ms = 5000;
  score->add_option("--adapter", adapter_spec, "file:<path> or cmd:<command>")->required();
  score->add_option("--context", context, "Conditioning context");
  score->add_option("--timeout-ms", timeout_ms, "Subprocess reply timeout");
  score->add_option("sequence", sequence, "Amino-acid sequence")->required();

  auto* print_config = app.add_subcommand("print-config", "Print the effective config as JSON");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_pattern("%^%l%$: %v");
  spdlog::set_level(g.verbose ? spdlog::level::info : spdlog::level::warn);
  spdlog::set_default_logger(spdlog::stderr_color_mt("kpo"));

  std::string tag = "config";
  try {
    const kpo::PipelineConfig cfg = resolve(g);

    if (*print_config) {
      std::cout << kpo::serialize_config(cfg);
      return 0;
    }
    if (*bench) {
      tag = "bench-prune";
      auto rows = kpo::bench_prune(cfg, sizes, repeats);
      std::cout << kpo::format_bench(rows);
      if (!bench_out.empty()) kpo::io::write_atomic(bench_out, kpo::bench_to_json(rows).dump(2) + "\n");
      return 0;
    }
    if (*synth) {
      tag = "synth";
      const auto sc = synth_nodes ? kpo::scaled_synth(cfg.synth, *synth_nodes) : cfg.synth;
      kpo::write_synthetic(kpo::synthesize(sc), synth_dir);
      return 0;
    }
    if (*score) {
      tag = "score";
      auto adapter = kpo::open_adapter(adapter_spec, std::chrono::milliseconds(timeout_ms));
      std::cout << kpo::io::format_double(kpo::external_log_prob(*adapter, sequence, context)) << '\n';
      return 0;
    }

    tag = "workdir";
    kpo::Pipeline pipeline(cfg);
    if (*run_all) {
      pipeline.run_all();
      std::cout << kpo::io::read_file(pipeline.workdir() / "comparison.json");
      return 0;
    }
    for (auto& [cmd, stage] : stage_cmds) {
      if (*cmd) pipeline.run(stage);
    }
    return 0;
  } catch (const kpo::StageError& e) {
    std::cerr << "kpo: " << e.what() << '\n';
    return 2;
  } catch (const kpo::Error& e) {
    return fail(tag, e.what());
  } catch (const std::exception& e) {
    return fail(tag, e.what());
  }
}
