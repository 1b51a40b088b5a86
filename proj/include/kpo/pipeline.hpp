#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kpo/config.hpp"
#include "kpo/error.hpp"

namespace kpo {

enum class Stage { Ingest, Split, Prune, Embed, Pair, Pretrain, Finetune, Sample, Eval };

inline constexpr std::array<Stage, 9> kAllStages = {
    Stage::Ingest, Stage::Split,    Stage::Prune,  Stage::Embed, Stage::Pair,
    Stage::Pretrain, Stage::Finetune, Stage::Sample, Stage::Eval};

std::string_view to_string(Stage s) noexcept;
std::optional<Stage> parse_stage(std::string_view s) noexcept;

// A library error annotated with the stage it escaped from.
class StageError : public std::runtime_error {
 public:
  StageError(Stage stage, ErrorCode code, const std::string& what);
  Stage stage() const noexcept { return stage_; }
  ErrorCode code() const noexcept { return code_; }

 private:
  Stage stage_;
  ErrorCode code_;
};

// Workdir-relative path -> SHA-256. Raw inputs are keyed "raw:<name>".
using FileHashes = std::map<std::string, std::string>;

struct StageRecord {
  Stage stage;
  FileHashes inputs;
  FileHashes outputs;
};

// Wall time lives in timings.json rather than here so that manifest.json is
// a pure function of config and inputs.
struct RunManifest {
  std::string tool_version;
  std::string config_hash;
  std::map<Stage, StageRecord> stages;

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

// Runs stages in a workdir. Holds an exclusive lock on <workdir>/.kpo.lock
// for its lifetime; a second pipeline on the same workdir fails with IoError.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  const std::filesystem::path& workdir() const noexcept { return workdir_; }
  const PipelineConfig& config() const noexcept { return cfg_; }
  const RunManifest& manifest() const noexcept { return manifest_; }

  // Throws StageError; MissingArtifact when an input is absent.
  const StageRecord& run(Stage stage);
  const RunManifest& run_all();

 private:
  StageRecord execute(Stage stage);
  void persist(const StageRecord& record, double seconds);

  PipelineConfig cfg_;
  std::filesystem::path workdir_;
  int lock_fd_ = -1;
  RunManifest manifest_;
  std::map<std::string, double> timings_;
};

}  // namespace kpo
