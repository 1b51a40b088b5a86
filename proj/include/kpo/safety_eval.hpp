#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kpo/alphabet.hpp"

namespace kpo {

using SubstitutionMatrix = std::array<std::array<int, kNumAminoAcids>, kNumAminoAcids>;

struct AlignParams {
  int match = 2;
  int mismatch = -1;
  int gap = -2;
  // Replaces match/mismatch when set; rows and columns follow kAminoAcids.
  std::optional<SubstitutionMatrix> matrix;

  int substitution(int a, int b) const {
    return matrix ? (*matrix)[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]
                  : (a == b ? match : mismatch);
  }

  void validate() const;
};

// Best local alignment score with a linear gap penalty and a zero floor.
int smith_waterman(std::string_view a, std::string_view b, const AlignParams& params);

// PairMean divides each score by (|g| + |h|) / 2; DatasetMean divides by
// the mean length over both sets.
enum class LengthNorm { PairMean, DatasetMean };

std::string_view to_string(LengthNorm n) noexcept;
std::optional<LengthNorm> parse_length_norm(std::string_view s) noexcept;

struct NamedSequence {
  std::string id;
  std::string sequence;
};

struct SequenceScore {
  std::string id;
  double best = 0.0;
  double mean = 0.0;
};

struct EvalReport {
  std::vector<SequenceScore> per_sequence;
  double corpus_mean = 0.0;
  double corpus_max = 0.0;
  AlignParams params;
  LengthNorm length_norm = LengthNorm::PairMean;
  std::size_t harmful_count = 0;
  std::string harmful_fingerprint;

  nlohmann::ordered_json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
};

// SHA-256 over the harmful sequences in the given order, newline-joined.
std::string harmful_fingerprint(std::span<const std::string> harmful);

EvalReport normalized_similarity(std::span<const NamedSequence> generated,
                                 std::span<const std::string> harmful, const AlignParams& params,
                                 LengthNorm norm = LengthNorm::PairMean);

struct ReportDelta {
  double before = 0.0;
  double after = 0.0;
  double absolute = 0.0;
  // (after - before) / before; absent when before is 0 and after is not.
  std::optional<double> relative;
  int sign = 0;

  nlohmann::ordered_json to_json() const;
};

// Throws IncomparableReports when the harmful fingerprints differ.
ReportDelta compare_reports(const EvalReport& before, const EvalReport& after);

// eval_scores.tsv: gen_id<TAB>best<TAB>mean
std::string serialize_eval_scores(const EvalReport& report);

}  // namespace kpo
