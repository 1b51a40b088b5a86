#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

namespace kpo {

// Source of log-probabilities from a model that lives outside this process.
class ExternalScorer {
 public:
  virtual ~ExternalScorer() = default;
  // Throws AdapterError.
  virtual double log_prob(std::string_view seq, std::string_view context) = 0;
};

// TSV of context<TAB>sequence<TAB>log_prob rows; '#' lines are comments.
class PrecomputedScorer final : public ExternalScorer {
 public:
  explicit PrecomputedScorer(const std::filesystem::path& path);
  double log_prob(std::string_view seq, std::string_view context) override;

 private:
  std::map<std::pair<std::string, std::string>, double, std::less<>> scores_;
};

// Runs `/bin/sh -c command` and speaks the line protocol over its
// stdin/stdout:
//   request   SCORE<TAB>context<TAB>sequence\n
//   response  OK<TAB><float>\n  or  ERR<TAB><message>\n
class SubprocessScorer final : public ExternalScorer {
 public:
  SubprocessScorer(const std::string& command, std::chrono::milliseconds timeout);
  ~SubprocessScorer() override;
  SubprocessScorer(const SubprocessScorer&) = delete;
  SubprocessScorer& operator=(const SubprocessScorer&) = delete;

  double log_prob(std::string_view seq, std::string_view context) override;

 private:
  std::string read_line();

  int fd_ = -1;
  int pid_ = -1;
  std::chrono::milliseconds timeout_;
  std::string buffer_;
};

// "file:<path>" or "cmd:<shell command>".
std::unique_ptr<ExternalScorer> open_adapter(
    std::string_view spec, std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

inline double external_log_prob(ExternalScorer& adapter, std::string_view seq,
                                std::string_view context) {
  return adapter.log_prob(seq, context);
}

}  // namespace kpo
