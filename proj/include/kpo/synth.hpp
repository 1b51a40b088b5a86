#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kpo/graph.hpp"
#include "kpo/ingest.hpp"

namespace kpo {

// Parameters of the synthetic protein-safety graph used by fixtures and the
// pruning benchmark.
struct SynthConfig {
  int harmful = 60;
  int benign = 240;
  int go_terms = 100;
  // Mean GO annotations per protein; each protein gets at least one.
  double annotation_density = 3.0;
  // Number of levels in the GO hierarchy; level 0 terms are roots.
  int go_depth = 4;
  // Exponent of the Zipf-like popularity used when drawing annotations.
  double zipf_exponent = 1.0;
  int min_length = 40;
  int max_length = 80;
  std::string motif = "CCWC";
  int motif_copies = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthData {
  NodeRecords nodes;
  std::vector<Triple> annotations;
  std::vector<Triple> go_relations;
};

SynthData synthesize(const SynthConfig& cfg);
Graph synth_graph(const SynthConfig& cfg);

// Residue weights for the two protein classes, in kAminoAcids order.
std::vector<double> harmful_composition();
std::vector<double> benign_composition();

// nodes.tsv, annotations.tsv, go_relations.tsv
void write_synthetic(const SynthData& data, const std::filesystem::path& dir);

}  // namespace kpo
