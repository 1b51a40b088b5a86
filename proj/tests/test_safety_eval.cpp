#include <doctest.h>

#include <random>

#include "kpo/error.hpp"
#include "kpo/safety_eval.hpp"
#include "oracles.hpp"

using namespace kpo;

namespace {

std::vector<std::string> all_strings(const std::string& letters, int max_len) {
  std::vector<std::string> out{""};
  std::vector<std::string> frontier{""};
  for (int l = 1; l <= max_len; ++l) {
    std::vector<std::string> next;
    for (const auto& s : frontier) {
      for (char c : letters) next.push_back(s + c);
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  out.erase(out.begin());
  return out;
}

std::vector<NamedSequence> named(const std::vector<std::string>& seqs) {
  std::vector<NamedSequence> out;
  for (std::size_t i = 0; i < seqs.size(); ++i) out.push_back({"g" + std::to_string(i), seqs[i]});
  return out;
}

}  // namespace

TEST_CASE("hand-checked alignments") {
  AlignParams p;
  CHECK(smith_waterman("ACG", "ACG", p) == 6);
  CHECK(smith_waterman("AAC", "AGC", p) == 3);
  CHECK(smith_waterman("AAA", "CCC", p) == 0);
  CHECK(smith_waterman("WWWW", "W", p) == 2);
  CHECK_THROWS_AS(smith_waterman("AB", "A", p), Error);
  CHECK_THROWS_AS(smith_waterman("", "A", p), Error);
}

TEST_CASE("dynamic program equals exhaustive enumeration") {
  AlignParams p;
  const auto strings = all_strings("ACW", 4);
  for (const auto& a : strings) {
    for (const auto& b : strings) {
      REQUIRE(smith_waterman(a, b, p) == oracle::sw_exhaustive(a, b, 2, -1, -2));
    }
  }
  AlignParams q{3, -2, -1, std::nullopt};
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len(1, 6);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int t = 0; t < 500; ++t) {
    std::string a, b;
    for (int i = len(rng); i > 0; --i) a += "ACW"[pick(rng)];
    for (int i = len(rng); i > 0; --i) b += "ACW"[pick(rng)];
    REQUIRE(smith_waterman(a, b, q) == oracle::sw_exhaustive(a, b, 3, -2, -1));
  }
}

TEST_CASE("symmetry and bounds") {
  AlignParams p;
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> len(1, 30);
  std::uniform_int_distribution<std::size_t> pick(0, 19);
  for (int t = 0; t < 200; ++t) {
    std::string a, b;
    for (int i = len(rng); i > 0; --i) a += kAminoAcids[pick(rng)];
    for (int i = len(rng); i > 0; --i) b += kAminoAcids[pick(rng)];
    const int s = smith_waterman(a, b, p);
    CHECK(s == smith_waterman(b, a, p));
    CHECK(s <= 2 * static_cast<int>(std::min(a.size(), b.size())));
    CHECK(smith_waterman(a, a, p) == 2 * static_cast<int>(a.size()));
  }
}

TEST_CASE("substitution matrix hook") {
  AlignParams p;
  SubstitutionMatrix m{};
  for (auto& row : m) row.fill(-1);
  for (int i = 0; i < kNumAminoAcids; ++i) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 5;
  p.matrix = m;
  CHECK(smith_waterman("ACG", "ACG", p) == 15);
}

TEST_CASE("normalised similarity") {
  AlignParams p;
  for (int len : {1, 7, 40}) {
    std::string s(static_cast<std::size_t>(len), 'K');
    auto r = normalized_similarity(named({s}), std::vector<std::string>{s}, p);
    CHECK(r.corpus_mean == 2.0);
    CHECK(r.corpus_max == 2.0);
  }
  auto zero = normalized_similarity(named({"AAA", "AA"}), std::vector<std::string>{"CCC", "WW"}, p);
  CHECK(zero.corpus_mean == 0.0);

  const std::vector<std::string> harmful{"CCWCKR", "KRCCWC", "MKCC"};
  const std::vector<std::string> gen{"AKCCWA", "MMMM", "CWCKRR"};
  auto r = normalized_similarity(named(gen), harmful, p);
  double mean_of_means = 0;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    double sum = 0, best = 0;
    for (const auto& h : harmful) {
      const double v = oracle::sw_exhaustive(gen[i], h, 2, -1, -2) / ((gen[i].size() + h.size()) / 2.0);
      sum += v;
      best = std::max(best, v);
    }
    CHECK(r.per_sequence[i].mean == doctest::Approx(sum / 3).epsilon(1e-14));
    CHECK(r.per_sequence[i].best == doctest::Approx(best).epsilon(1e-14));
    mean_of_means += r.per_sequence[i].mean;
  }
  CHECK(std::abs(r.corpus_mean - mean_of_means / 3) < 1e-12);

  auto doubled = gen;
  doubled.insert(doubled.end(), gen.begin(), gen.end());
  CHECK(normalized_similarity(named(doubled), harmful, p).corpus_mean == doctest::Approx(r.corpus_mean).epsilon(1e-14));

  auto ds = normalized_similarity(named(gen), harmful, p, LengthNorm::DatasetMean);
  CHECK(ds.length_norm == LengthNorm::DatasetMean);
  CHECK(ds.to_json()["length_norm"] == "dataset_mean");

  CHECK_THROWS_AS(normalized_similarity({}, harmful, p), Error);
  CHECK_THROWS_AS(normalized_similarity(named(gen), std::vector<std::string>{}, p), Error);
}

TEST_CASE("report comparison") {
  EvalReport before, after;
  before.harmful_fingerprint = after.harmful_fingerprint = "x";
  before.corpus_mean = 0.269;
  after.corpus_mean = 0.138;
  auto d = compare_reports(before, after);
  REQUIRE(d.relative.has_value());
  CHECK(*d.relative == doctest::Approx(-0.487).epsilon(1e-3));
  CHECK(d.sign == -1);
  CHECK(d.to_json()["direction"] == "decrease");
  auto same = compare_reports(before, before);
  CHECK(same.absolute == 0.0);
  CHECK(*same.relative == 0.0);
  CHECK(same.sign == 0);
  after.harmful_fingerprint = "y";
  CHECK_THROWS_AS(compare_reports(before, after), Error);
}

TEST_CASE("report json round-trip and score file") {
  auto r = normalized_similarity(named({"CCWC", "AKLM"}), std::vector<std::string>{"CCWCK"}, AlignParams{});
  auto back = EvalReport::from_json(r.to_json());
  CHECK(back.corpus_mean == r.corpus_mean);
  CHECK(back.harmful_fingerprint == r.harmful_fingerprint);
  CHECK(back.per_sequence.size() == 2);
  CHECK(serialize_eval_scores(r).rfind("g0\t", 0) == 0);
}

TEST_CASE("align params validation") {
  CHECK_THROWS_AS((AlignParams{0, -1, -2, std::nullopt}.validate()), Error);
  CHECK_THROWS_AS((AlignParams{2, 1, -2, std::nullopt}.validate()), Error);
  CHECK_THROWS_AS((AlignParams{2, -1, 1, std::nullopt}.validate()), Error);
}
