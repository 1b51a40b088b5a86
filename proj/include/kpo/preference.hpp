#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kpo/pair.hpp"
#include "kpo/sequence_model.hpp"

namespace kpo {

// Kpo: reference-free -log sigmoid(phi * [log P(benign) - log P(harmful)]).
// DpoRef: the same margin measured against a frozen reference model,
// scaled by lambda.
enum class PreferenceVariant { Kpo, DpoRef };
enum class Optimizer { Sgd, Adam };

std::string_view to_string(PreferenceVariant v) noexcept;
std::optional<PreferenceVariant> parse_preference_variant(std::string_view s) noexcept;
std::string_view to_string(Optimizer o) noexcept;
std::optional<Optimizer> parse_optimizer(std::string_view s) noexcept;

struct TrainConfig {
  double phi = 0.1;
  double learning_rate = 0.05;
  int epochs = 200;
  int batch_size = 16;
  std::uint64_t seed = 0;
  PreferenceVariant variant = PreferenceVariant::Kpo;
  double lambda = 1.0;
  Optimizer optimizer = Optimizer::Adam;

  void validate() const;
};

// -log sigmoid(x), evaluated without overflow.
double neg_log_sigmoid(double x);

double kpo_loss(const SequenceModel& model, const PreferencePair& pair, double phi);
double dpo_loss(const SequenceModel& model, const SequenceModel& reference,
                const PreferencePair& pair, double lambda);

// Both add scale * d(loss)/d(theta) into grad and return the loss.
double kpo_loss_gradient(const BigramModel& model, const PreferencePair& pair, double phi,
                         double scale, std::span<double> grad);
double dpo_loss_gradient(const BigramModel& model, const SequenceModel& reference,
                         const PreferencePair& pair, double lambda, double scale,
                         std::span<double> grad);

struct TrainResult {
  BigramModel model;
  std::vector<double> loss_trace;
};

// Mini-batch descent on the mean preference loss over a seeded shuffle.
// With DpoRef the incoming model is frozen as the reference.
TrainResult finetune(const BigramModel& model, std::span<const PreferencePair> pairs,
                     const TrainConfig& cfg);

// Full-batch ascent on the mean log-likelihood of the corpus; the trace
// holds the mean negative log-likelihood before each step.
TrainResult pretrain(const BigramModel& model, std::span<const std::string> corpus,
                     const TrainConfig& cfg);

}  // namespace kpo
