#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "kpo/embed.hpp"
#include "kpo/pair.hpp"
#include "kpo/preference.hpp"
#include "kpo/prune.hpp"
#include "kpo/safety_eval.hpp"
#include "kpo/synth.hpp"

namespace kpo {

struct PathsConfig {
  std::string nodes = "data/nodes.tsv";
  std::string annotations = "data/annotations.tsv";
  std::string go_relations = "data/go_relations.tsv";
  std::string workdir = "work";
};

struct SplitConfig {
  double ratio = 0.8;
  std::uint64_t seed = 0;
};

struct SampleConfig {
  int count = 100;
  int max_len = 100;
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

struct EvalConfig {
  AlignParams align;
  LengthNorm length_norm = LengthNorm::PairMean;
};

struct PipelineConfig {
  PathsConfig paths;
  SplitConfig split;
  PruneConfig prune;
  EmbedConfig embed;
  PairConfig pair;
  TrainConfig pretrain;
  TrainConfig finetune;
  SampleConfig sample;
  EvalConfig eval;
  SynthConfig synth;

  PipelineConfig();

  // Throws ConfigError.
  void validate() const;
  // Sets every seed in the document to `seed`.
  void override_seed(std::uint64_t seed);
};

// Unknown keys and wrongly typed values throw ConfigError; absent keys keep
// their defaults.
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);

PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);
// Two-space indented JSON with a trailing newline.
std::string serialize_config(const PipelineConfig& cfg);

// SHA-256 of the serialized config with paths.workdir cleared, so the same
// run in a different directory hashes the same.
std::string config_hash(const PipelineConfig& cfg);

}  // namespace kpo
