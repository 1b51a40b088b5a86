#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "kpo/alphabet.hpp"

namespace kpo {

// Context rows: the 20 amino acids, then the begin token.
// Output columns: the 20 amino acids, then the end token.
inline constexpr int kBeginContext = kNumAminoAcids;
inline constexpr int kEndToken = kNumAminoAcids;
inline constexpr int kContexts = kNumAminoAcids + 1;
inline constexpr int kOutputs = kNumAminoAcids + 1;

using Distribution = std::array<double, kOutputs>;

// Anything that can score a sequence autoregressively. The preference losses
// only need this; training additionally needs BigramModel's gradients.
class SequenceModel {
 public:
  virtual ~SequenceModel() = default;
  // log P(seq, end | context). Throws AlphabetError.
  virtual double log_prob(std::string_view seq, std::string_view context) const = 0;
};

// Learnable bigram table: theta[context][next] are softmax logits.
class BigramModel final : public SequenceModel {
 public:
  static constexpr std::size_t kParameterCount =
      static_cast<std::size_t>(kContexts) * static_cast<std::size_t>(kOutputs);

  BigramModel() { logits_.fill(0.0); }

  double& logit(int context, int next) { return logits_[index(context, next)]; }
  double logit(int context, int next) const { return logits_[index(context, next)]; }
  std::span<double> parameters() { return logits_; }
  std::span<const double> parameters() const { return logits_; }

  // softmax(theta[context] / temperature)
  Distribution conditional(int context, double temperature = 1.0) const;

  double log_prob(std::string_view seq, std::string_view context) const override;

  // grad += scale * d log_prob / d theta; returns log_prob.
  double accumulate_log_prob_gradient(std::string_view seq, std::string_view context, double scale,
                                      std::span<double> grad) const;

  std::uint64_t seed = 0;

  friend bool operator==(const BigramModel& a, const BigramModel& b) {
    return a.seed == b.seed && a.logits_ == b.logits_;
  }

 private:
  static std::size_t index(int context, int next) {
    return static_cast<std::size_t>(context) * kOutputs + static_cast<std::size_t>(next);
  }

  std::array<double, kParameterCount> logits_{};
};

// Ancestral sampling from the begin token until the end token or max_len
// residues. The end token is masked at the first step, so sequences are
// never empty.
std::string sample(const BigramModel& model, int max_len, double temperature, std::uint64_t seed);

// model.tsv: header lines (alphabet, shape, seed) then one row per context.
std::string serialize_model(const BigramModel& model);
BigramModel parse_model(std::string_view text);
void write_model(const BigramModel& model, const std::filesystem::path& path);
BigramModel read_model(const std::filesystem::path& path);

}  // namespace kpo
