#include <doctest.h>

#include <cmath>
#include <map>

#include "kpo/error.hpp"
#include "kpo/preference.hpp"
#include "kpo/synth.hpp"
#include "oracles.hpp"

using namespace kpo;

namespace {

// Returns stored log-probabilities keyed by sequence.
class TableModel final : public SequenceModel {
 public:
  explicit TableModel(std::map<std::string, double> lp) : lp_(std::move(lp)) {}
  double log_prob(std::string_view seq, std::string_view) const override {
    return lp_.at(std::string(seq));
  }

 private:
  std::map<std::string, double> lp_;
};

PreferencePair pair(std::string benign, std::string harmful) {
  PreferencePair p;
  p.harmful_id = "H";
  p.benign_id = "B";
  p.benign_seq = std::move(benign);
  p.harmful_seq = std::move(harmful);
  return p;
}

BigramModel random_model(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0, scale);
  BigramModel m;
  for (double& p : m.parameters()) p = n(rng);
  return m;
}

std::string random_seq(std::mt19937_64& rng, std::string_view letters, int len) {
  std::uniform_int_distribution<std::size_t> pick(0, letters.size() - 1);
  std::string s;
  for (int i = 0; i < len; ++i) s += letters[pick(rng)];
  return s;
}

std::vector<PreferencePair> motif_pairs(std::mt19937_64& rng, int n) {
  std::vector<PreferencePair> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(pair(random_seq(rng, "AEGLKSTVDN", 30),
                       random_seq(rng, "AEGLKS", 10) + "CCWC" + random_seq(rng, "CWKR", 8) + "CCWC"));
  }
  return out;
}

double motif_bigram_prob(const BigramModel& m) {
  // C->C, C->W, W->C
  const int c = amino_index('C'), w = amino_index('W');
  return (m.conditional(c)[static_cast<std::size_t>(c)] + m.conditional(c)[static_cast<std::size_t>(w)] +
          m.conditional(w)[static_cast<std::size_t>(c)]) / 3.0;
}

}  // namespace

TEST_CASE("loss anchors") {
  TableModel equal({{"A", -3.0}, {"C", -3.0}});
  CHECK(kpo_loss(equal, pair("A", "C"), 0.1) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  TableModel gap({{"A", -2.0}, {"C", -3.0}});
  CHECK(std::abs(kpo_loss(gap, pair("A", "C"), 2.0) - 0.126928011043) < 1e-9);
  CHECK(std::abs(dpo_loss(gap, equal, pair("A", "C"), 1.0) - 0.313261687518) < 1e-9);
  CHECK(dpo_loss(equal, equal, pair("A", "C"), 3.0) == doctest::Approx(3 * std::log(2.0)));
  CHECK(dpo_loss(gap, equal, pair("A", "C"), 2.5) == doctest::Approx(2.5 * dpo_loss(gap, equal, pair("A", "C"), 1.0)));
}

TEST_CASE("neg_log_sigmoid is stable") {
  CHECK(neg_log_sigmoid(0) == doctest::Approx(std::log(2.0)));
  CHECK(neg_log_sigmoid(800) == 0.0);
  CHECK(neg_log_sigmoid(-800) == doctest::Approx(800.0));
  CHECK(std::isfinite(neg_log_sigmoid(-1e6)));
}

TEST_CASE("kpo loss decreases strictly in the gap") {
  double prev = INFINITY;
  for (double d = -10; d <= 10; d += 0.25) {
    TableModel m({{"A", d}, {"C", 0.0}});
    const double l = kpo_loss(m, pair("A", "C"), 0.7);
    CHECK(l > 0);
    CHECK(l < prev);
    prev = l;
  }
}

TEST_CASE("preference gradients match central differences") {
  std::mt19937_64 rng(12);
  for (int point = 0; point < 20; ++point) {
    BigramModel m = random_model(rng);
    BigramModel ref = random_model(rng, 0.5);
    auto p = pair(random_seq(rng, kAminoAcids, 9), random_seq(rng, kAminoAcids, 7));
    std::array<double, BigramModel::kParameterCount> gk{}, gd{};
    kpo_loss_gradient(m, p, 0.3, 1.0, gk);
    dpo_loss_gradient(m, ref, p, 1.7, 1.0, gd);
    auto params = m.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) {
      REQUIRE(oracle::close_rel(gk[k], oracle::central_difference([&] { return kpo_loss(m, p, 0.3); }, params[k])));
      REQUIRE(oracle::close_rel(gd[k], oracle::central_difference([&] { return dpo_loss(m, ref, p, 1.7); }, params[k])));
    }
  }
}

TEST_CASE("finetune widens the preference margin and suppresses the motif") {
  std::mt19937_64 rng(1);
  auto pairs = motif_pairs(rng, 24);
  std::vector<std::string> corpus;
  for (const auto& p : pairs) {
    corpus.push_back(p.benign_seq);
    corpus.push_back(p.harmful_seq);
  }
  TrainConfig pre;
  pre.epochs = 150;
  const BigramModel base = pretrain(BigramModel{}, corpus, pre).model;
  auto margin = [&](const BigramModel& m) {
    double s = 0;
    for (const auto& p : pairs) s += m.log_prob(p.benign_seq, "") - m.log_prob(p.harmful_seq, "");
    return s / static_cast<double>(pairs.size());
  };
  for (auto variant : {PreferenceVariant::Kpo, PreferenceVariant::DpoRef}) {
    TrainConfig cfg;
    cfg.variant = variant;
    cfg.epochs = 50;
    auto r = finetune(base, pairs, cfg);
    CHECK(r.loss_trace.size() == 50);
    CHECK(margin(r.model) > margin(base));
    CHECK(motif_bigram_prob(r.model) < motif_bigram_prob(base));
    if (variant == PreferenceVariant::DpoRef) {
      CHECK(r.loss_trace.front() > 0);
    }
    auto again = finetune(base, pairs, cfg);
    CHECK(again.loss_trace == r.loss_trace);
    CHECK(again.model == r.model);
  }
}

TEST_CASE("dpo_ref starts at lambda ln 2") {
  std::mt19937_64 rng(3);
  auto pairs = motif_pairs(rng, 5);
  BigramModel m = random_model(rng);
  for (const auto& p : pairs) CHECK(dpo_loss(m, m, p, 2.0) == 2.0 * std::log(2.0));
}

TEST_CASE("zero epochs leave the model unchanged") {
  std::mt19937_64 rng(5);
  BigramModel m = random_model(rng);
  auto pairs = motif_pairs(rng, 4);
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK(finetune(m, pairs, cfg).model == m);
  CHECK(pretrain(m, std::vector<std::string>{"ACD"}, cfg).model == m);
  CHECK_THROWS_AS(finetune(m, {}, TrainConfig{}), Error);
  CHECK_THROWS_AS(pretrain(m, {}, TrainConfig{}), Error);
}

TEST_CASE("pretraining lowers NLL on most steps and fits one sequence") {
  for (auto opt : {Optimizer::Adam, Optimizer::Sgd}) {
    std::mt19937_64 rng(6);
    std::vector<std::string> corpus;
    for (int i = 0; i < 40; ++i) corpus.push_back(random_seq(rng, "ACDEFGHIK", 25));
    TrainConfig cfg;
    cfg.optimizer = opt;
    cfg.epochs = 100;
    cfg.learning_rate = opt == Optimizer::Sgd ? 1.0 : 0.05;
    auto r = pretrain(BigramModel{}, corpus, cfg);
    int down = 0;
    for (std::size_t i = 1; i < r.loss_trace.size(); ++i) down += r.loss_trace[i] <= r.loss_trace[i - 1];
    CHECK(down >= static_cast<int>(0.8 * static_cast<double>(r.loss_trace.size() - 1)));
  }
  // A single sequence with distinct transitions has a bigram optimum of 0.
  TrainConfig cfg;
  cfg.epochs = 800;
  const std::string s = "MKT";
  auto r = pretrain(BigramModel{}, std::vector<std::string>{s}, cfg);
  CHECK(r.model.log_prob(s, "") > -0.05);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  c.phi = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}
