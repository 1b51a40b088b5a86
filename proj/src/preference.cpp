#include "kpo/preference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kpo/error.hpp"

namespace kpo {

std::string_view to_string(PreferenceVariant v) noexcept {
  return v == PreferenceVariant::Kpo ? "kpo" : "dpo_ref";
}

std::optional<PreferenceVariant> parse_preference_variant(std::string_view s) noexcept {
  if (s == "kpo") return PreferenceVariant::Kpo;
  if (s == "dpo_ref") return PreferenceVariant::DpoRef;
  return std::nullopt;
}

std::string_view to_string(Optimizer o) noexcept { return o == Optimizer::Sgd ? "sgd" : "adam"; }

std::optional<Optimizer> parse_optimizer(std::string_view s) noexcept {
  if (s == "sgd") return Optimizer::Sgd;
  if (s == "adam") return Optimizer::Adam;
  return std::nullopt;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, "train: " + m); };
  if (!(phi > 0)) fail("phi must be > 0");
  if (!(learning_rate > 0)) fail("learning_rate must be > 0");
  if (epochs < 0) fail("epochs must be >= 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(lambda > 0)) fail("lambda must be > 0");
}

double neg_log_sigmoid(double x) {
  return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

namespace {

// sigmoid(-x) = -d/dx [-log sigmoid(x)]
double sigmoid_of_negative(double x) {
  return x >= 0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
}

}  // namespace

double kpo_loss(const SequenceModel& model, const PreferencePair& pair, double phi) {
  const double gap = model.log_prob(pair.benign_seq, pair.context) -
                     model.log_prob(pair.harmful_seq, pair.context);
  return neg_log_sigmoid(phi * gap);
}

double dpo_loss(const SequenceModel& model, const SequenceModel& reference,
                const PreferencePair& pair, double lambda) {
  const double chosen = model.log_prob(pair.benign_seq, pair.context) -
                        reference.log_prob(pair.benign_seq, pair.context);
  const double rejected = model.log_prob(pair.harmful_seq, pair.context) -
                          reference.log_prob(pair.harmful_seq, pair.context);
  return lambda * neg_log_sigmoid(chosen - rejected);
}

namespace {

// Adds scale * dL/dgap * d(gap)/d(theta) where gap = lp(benign) - lp(harmful).
void add_gap_gradient(const BigramModel& model, const PreferencePair& pair, double dloss_dgap,
                      std::span<double> grad) {
  model.accumulate_log_prob_gradient(pair.benign_seq, pair.context, dloss_dgap, grad);
  model.accumulate_log_prob_gradient(pair.harmful_seq, pair.context, -dloss_dgap, grad);
}

}  // namespace

double kpo_loss_gradient(const BigramModel& model, const PreferencePair& pair, double phi,
                         double scale, std::span<double> grad) {
  const double gap = model.log_prob(pair.benign_seq, pair.context) -
                     model.log_prob(pair.harmful_seq, pair.context);
  add_gap_gradient(model, pair, -scale * phi * sigmoid_of_negative(phi * gap), grad);
  return neg_log_sigmoid(phi * gap);
}

double dpo_loss_gradient(const BigramModel& model, const SequenceModel& reference,
                         const PreferencePair& pair, double lambda, double scale,
                         std::span<double> grad) {
  const double z = (model.log_prob(pair.benign_seq, pair.context) -
                    reference.log_prob(pair.benign_seq, pair.context)) -
                   (model.log_prob(pair.harmful_seq, pair.context) -
                    reference.log_prob(pair.harmful_seq, pair.context));
  add_gap_gradient(model, pair, -scale * lambda * sigmoid_of_negative(z), grad);
  return lambda * neg_log_sigmoid(z);
}

namespace {

class ParameterUpdate {
 public:
  ParameterUpdate(Optimizer kind, double learning_rate) : kind_(kind), lr_(learning_rate) {
    m_.fill(0.0);
    v_.fill(0.0);
  }

  // Descends along grad.
  void step(std::span<double> params, std::span<const double> grad) {
    if (kind_ == Optimizer::Sgd) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grad[i];
      return;
    }
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = kBeta1 * m_[i] + (1 - kBeta1) * grad[i];
      v_[i] = kBeta2 * v_[i] + (1 - kBeta2) * grad[i] * grad[i];
      params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + kEps);
    }
  }

 private:
  Optimizer kind_;
  double lr_;
  int t_ = 0;
  std::array<double, BigramModel::kParameterCount> m_{};
  std::array<double, BigramModel::kParameterCount> v_{};
};

void require_finite(double loss, const BigramModel& model, int epoch, std::string_view what) {
  const auto p = model.parameters();
  if (!std::isfinite(loss) ||
      !std::all_of(p.begin(), p.end(), [](double x) { return std::isfinite(x); })) {
    throw Error(ErrorCode::DivergenceError, std::string(what) + " diverged at epoch " +
                                                std::to_string(epoch) + "; lower learning_rate");
  }
}

}  // namespace

TrainResult finetune(const BigramModel& model, std::span<const PreferencePair> pairs,
                     const TrainConfig& cfg) {
  cfg.validate();
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "no preference pairs to train on");
  TrainResult result{model, {}};
  const BigramModel reference = model;
  ParameterUpdate update(cfg.optimizer, cfg.learning_rate);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::array<double, BigramModel::kParameterCount> grad{};
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double scale = 1.0 / static_cast<double>(end - start);
      grad.fill(0.0);
      for (std::size_t k = start; k < end; ++k) {
        const auto& pair = pairs[order[k]];
        epoch_loss += cfg.variant == PreferenceVariant::Kpo
                          ? kpo_loss_gradient(result.model, pair, cfg.phi, scale, grad)
                          : dpo_loss_gradient(result.model, reference, pair, cfg.lambda, scale, grad);
      }
      update.step(result.model.parameters(), grad);
    }
    epoch_loss /= static_cast<double>(pairs.size());
    require_finite(epoch_loss, result.model, epoch, "finetune");
    result.loss_trace.push_back(epoch_loss);
  }
  return result;
}

TrainResult pretrain(const BigramModel& model, std::span<const std::string> corpus,
                     const TrainConfig& cfg) {
  cfg.validate();
  if (corpus.empty()) throw Error(ErrorCode::EmptyInput, "empty pretraining corpus");
  TrainResult result{model, {}};
  ParameterUpdate update(cfg.optimizer, cfg.learning_rate);
  std::array<double, BigramModel::kParameterCount> grad{};
  const double scale = 1.0 / static_cast<double>(corpus.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    grad.fill(0.0);
    double log_likelihood = 0;
    // Gradient of the mean negative log-likelihood.
    for (const auto& seq : corpus) {
      log_likelihood += result.model.accumulate_log_prob_gradient(seq, "", -scale, grad);
    }
    const double nll = -log_likelihood * scale;
    require_finite(nll, result.model, epoch, "pretrain");
    result.loss_trace.push_back(nll);
    update.step(result.model.parameters(), grad);
  }
  return result;
}

}  // namespace kpo
