#include "kpo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "kpo/alphabet.hpp"
#include "kpo/error.hpp"
#include "kpo/io.hpp"

namespace kpo {

void SynthConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, "synth: " + m); };
  if (harmful < 1 || benign < 1 || go_terms < 1) fail("every node kind needs at least one node");
  if (!(annotation_density >= 1.0)) fail("annotation_density must be >= 1");
  if (go_depth < 1 || go_depth > go_terms) fail("go_depth must lie in [1, go_terms]");
  if (!(zipf_exponent >= 0.0)) fail("zipf_exponent must be >= 0");
  if (min_length < 1 || max_length < min_length) fail("need 1 <= min_length <= max_length");
  if (!is_protein_sequence(motif)) fail("motif must be a nonempty amino-acid string");
  if (motif_copies < 0) fail("motif_copies must be >= 0");
  if (static_cast<long>(motif.size()) * motif_copies > min_length) {
    fail("motif copies do not fit in min_length");
  }
}

namespace {

std::string padded(const char* prefix, int value, int width) {
  std::string digits = std::to_string(value);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  }
  return prefix + digits;
}

int digits(int n) { return static_cast<int>(std::to_string(n).size()); }

std::string draw_sequence(std::mt19937_64& rng, std::discrete_distribution<int>& residues,
                          int length) {
  std::string s(static_cast<std::size_t>(length), 'A');
  for (char& c : s) c = kAminoAcids[static_cast<std::size_t>(residues(rng))];
  return s;
}

// Places `copies` non-overlapping motif instances at seeded positions.
void plant_motif(std::string& seq, const std::string& motif, int copies, std::mt19937_64& rng) {
  const auto m = motif.size();
  const auto slots = seq.size() / m;
  std::vector<std::size_t> slot(slots);
  for (std::size_t i = 0; i < slots; ++i) slot[i] = i;
  std::shuffle(slot.begin(), slot.end(), rng);
  for (int c = 0; c < copies && static_cast<std::size_t>(c) < slots; ++c) {
    seq.replace(slot[static_cast<std::size_t>(c)] * m, m, motif);
  }
}

}  // namespace

std::vector<double> benign_composition() {
  // Roughly the background amino-acid frequencies with C and W made rare.
  //        A    C    D    E    F    G    H    I    K    L
  return {8.3, 0.2, 5.5, 6.8, 3.9, 7.1, 2.3, 5.9, 5.8, 9.7,
  //        M    N    P    Q    R    S    T    V    W    Y
          2.4, 4.1, 4.7, 3.9, 5.5, 6.6, 5.4, 6.9, 0.2, 2.9};
}

std::vector<double> harmful_composition() {
  //        A    C     D    E    F    G    H    I    K     L
  return {3.0, 14.0, 2.5, 3.0, 2.5, 5.0, 2.0, 3.0, 10.0, 4.0,
  //        M    N    P    Q    R     S    T    V    W     Y
          1.5, 2.5, 3.0, 2.0, 10.0, 4.0, 3.0, 3.0, 12.0, 2.5};
}

SynthData synthesize(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  SynthData out;

  // GO terms are dealt into go_depth levels; every non-root term points at
  // one parent in the level above.
  std::vector<std::string> go_ids;
  const int go_width = std::max(7, digits(cfg.go_terms));
  for (int i = 0; i < cfg.go_terms; ++i) {
    go_ids.push_back(padded("GO:", i + 1, go_width));
    out.nodes.go_terms.push_back({go_ids.back(), "synthetic term " + std::to_string(i + 1)});
  }
  std::vector<std::vector<int>> levels(static_cast<std::size_t>(cfg.go_depth));
  for (int i = 0; i < cfg.go_terms; ++i) {
    // The first go_depth terms seed each level so none is empty.
    const int level = i < cfg.go_depth
                          ? i
                          : std::uniform_int_distribution<int>(0, cfg.go_depth - 1)(rng);
    levels[static_cast<std::size_t>(level)].push_back(i);
  }
  std::bernoulli_distribution is_a(0.7);
  for (std::size_t l = 1; l < levels.size(); ++l) {
    const auto& above = levels[l - 1];
    std::uniform_int_distribution<std::size_t> pick(0, above.size() - 1);
    for (int child : levels[l]) {
      out.go_relations.push_back({go_ids[static_cast<std::size_t>(child)],
                                  std::string(is_a(rng) ? kIsA : kPartOf),
                                  go_ids[static_cast<std::size_t>(above[pick(rng)])]});
    }
  }

  // Zipf-like popularity over a seeded ranking of the GO terms.
  std::vector<int> rank(static_cast<std::size_t>(cfg.go_terms));
  for (int i = 0; i < cfg.go_terms; ++i) rank[static_cast<std::size_t>(i)] = i;
  std::shuffle(rank.begin(), rank.end(), rng);
  std::vector<double> weight(static_cast<std::size_t>(cfg.go_terms));
  for (int r = 0; r < cfg.go_terms; ++r) {
    weight[static_cast<std::size_t>(rank[static_cast<std::size_t>(r)])] =
        1.0 / std::pow(static_cast<double>(r + 1), cfg.zipf_exponent);
  }
  std::discrete_distribution<int> popular(weight.begin(), weight.end());

  const auto benign_w = benign_composition();
  const auto harmful_w = harmful_composition();
  std::discrete_distribution<int> benign_residues(benign_w.begin(), benign_w.end());
  std::discrete_distribution<int> harmful_residues(harmful_w.begin(), harmful_w.end());
  std::uniform_int_distribution<int> length(cfg.min_length, cfg.max_length);
  // 1 + Poisson(density - 1) annotations per protein.
  std::poisson_distribution<int> extra(cfg.annotation_density - 1.0);

  auto annotate = [&](const std::string& protein) {
    const int want = std::min(cfg.go_terms, 1 + extra(rng));
    std::set<int> chosen;
    for (int attempt = 0; static_cast<int>(chosen.size()) < want && attempt < 20 * want; ++attempt) {
      chosen.insert(popular(rng));
    }
    for (int g : chosen) {
      out.annotations.push_back(
          {protein, std::string(kAnnotatedWith), go_ids[static_cast<std::size_t>(g)]});
    }
  };

  const int hw = std::max(5, digits(cfg.harmful));
  for (int i = 0; i < cfg.harmful; ++i) {
    ProteinRecord p{padded("H", i + 1, hw), NodeKind::HarmfulProtein,
                    draw_sequence(rng, harmful_residues, length(rng))};
    plant_motif(p.sequence, cfg.motif, cfg.motif_copies, rng);
    annotate(p.id);
    out.nodes.proteins.push_back(std::move(p));
  }
  const int bw = std::max(5, digits(cfg.benign));
  for (int i = 0; i < cfg.benign; ++i) {
    ProteinRecord p{padded("B", i + 1, bw), NodeKind::BenignProtein,
                    draw_sequence(rng, benign_residues, length(rng))};
    annotate(p.id);
    out.nodes.proteins.push_back(std::move(p));
  }
  return out;
}

Graph synth_graph(const SynthConfig& cfg) {
  const SynthData d = synthesize(cfg);
  return build_graph(d.nodes, d.annotations, d.go_relations).graph;
}

void write_synthetic(const SynthData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_graph(build_graph(data.nodes, data.annotations, data.go_relations).graph, dir);
}

}  // namespace kpo
