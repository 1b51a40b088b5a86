#include <doctest.h>

#include <cmath>

#include "kpo/error.hpp"
#include "kpo/sequence_model.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace kpo;

TEST_CASE("zero logits give the uniform log-probability") {
  BigramModel m;
  CHECK(m.log_prob("ACD", "") == doctest::Approx(4 * std::log(1.0 / 21)).epsilon(1e-14));
  CHECK(m.log_prob("ACD", "") == doctest::Approx(-12.17809).epsilon(1e-6));
  for (int len = 1; len < 10; ++len) {
    CHECK(m.log_prob(std::string(static_cast<std::size_t>(len), 'W'), "") ==
          doctest::Approx((len + 1) * std::log(1.0 / 21)));
  }
}

TEST_CASE("forcing A then end drives log_prob to zero") {
  BigramModel m;
  double prev = m.log_prob("A", "");
  for (double push : {5.0, 10.0, 20.0}) {
    m.logit(kBeginContext, amino_index('A')) = push;
    m.logit(amino_index('A'), kEndToken) = push;
    const double lp = m.log_prob("A", "");
    CHECK(lp < 0.0);
    CHECK(lp > prev);
    prev = lp;
  }
  CHECK(prev > -1e-6);
}

TEST_CASE("context sets the starting row") {
  BigramModel m;
  m.logit(amino_index('K'), amino_index('C')) = 2.0;
  const double with = m.log_prob("C", "AK");
  const double without = m.log_prob("C", "");
  CHECK(with > without);
  CHECK(with == doctest::Approx(std::log(std::exp(2.0) / (20 + std::exp(2.0))) + std::log(1.0 / 21)));
}

TEST_CASE("bad input") {
  BigramModel m;
  CHECK_THROWS_AS(m.log_prob("", ""), Error);
  CHECK_THROWS_AS(m.log_prob("AB", ""), Error);
  CHECK_THROWS_AS(m.log_prob("AC", "X"), Error);
}

TEST_CASE("conditionals are normalised") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 3);
  BigramModel m;
  for (double& p : m.parameters()) p = n(rng);
  for (int c = 0; c < kContexts; ++c) {
    for (double temp : {0.3, 1.0, 2.5}) {
      double s = 0;
      for (double p : m.conditional(c, temp)) s += p;
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("gradient of log_prob matches central differences") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1);
  std::uniform_int_distribution<int> aa(0, 19);
  for (int point = 0; point < 20; ++point) {
    BigramModel m;
    for (double& p : m.parameters()) p = n(rng);
    std::string seq;
    for (int i = 0; i < 12; ++i) seq += kAminoAcids[static_cast<std::size_t>(aa(rng))];
    std::array<double, BigramModel::kParameterCount> grad{};
    const double lp = m.accumulate_log_prob_gradient(seq, "", 1.0, grad);
    CHECK(lp == doctest::Approx(m.log_prob(seq, "")).epsilon(1e-14));
    auto params = m.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double fd = oracle::central_difference([&] { return m.log_prob(seq, ""); }, params[k]);
      REQUIRE(oracle::close_rel(grad[k], fd));
    }
  }
}

TEST_CASE("sampling") {
  BigramModel m;
  CHECK(sample(m, 50, 1.0, 7) == sample(m, 50, 1.0, 7));
  CHECK(sample(m, 50, 1.0, 7) != sample(m, 50, 1.0, 8));
  for (std::uint64_t s = 0; s < 30; ++s) {
    auto x = sample(m, 5, 1.0, s);
    CHECK(!x.empty());
    CHECK(x.size() <= 5);
    CHECK(is_protein_sequence(x));
  }
  // Every residue is followed by end: length-1 sequences.
  BigramModel stop;
  for (int c = 0; c < kNumAminoAcids; ++c) stop.logit(c, kEndToken) = 80;
  for (std::uint64_t s = 0; s < 10; ++s) CHECK(sample(stop, 30, 1.0, s).size() == 1);
  // Low temperature follows the argmax path.
  BigramModel greedy;
  greedy.logit(kBeginContext, amino_index('M')) = 1.0;
  greedy.logit(amino_index('M'), amino_index('K')) = 1.0;
  greedy.logit(amino_index('K'), kEndToken) = 1.0;
  CHECK(sample(greedy, 10, 1e-3, 3) == "MK");
}

TEST_CASE("model files round-trip exactly") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 1);
  BigramModel m;
  m.seed = 42;
  for (double& p : m.parameters()) p = n(rng);
  CHECK(parse_model(serialize_model(m)) == m);
  test::TempDir dir;
  write_model(m, dir.path() / "model.tsv");
  CHECK(read_model(dir.path() / "model.tsv") == m);
  CHECK_THROWS_AS(parse_model("#alphabet\tACD\n"), Error);
}
