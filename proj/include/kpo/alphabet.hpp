#pragma once

#include <optional>
#include <string_view>

namespace kpo {

// The 20 canonical amino acids, in the fixed order used for token indices.
inline constexpr std::string_view kAminoAcids = "ACDEFGHIKLMNPQRSTVWY";
inline constexpr int kNumAminoAcids = 20;

// Token index of an amino-acid letter, or -1 for anything else.
int amino_index(char c) noexcept;

// Position of the first character outside the alphabet, if any.
std::optional<std::size_t> first_invalid_residue(std::string_view seq) noexcept;

inline bool is_protein_sequence(std::string_view seq) noexcept {
  return !seq.empty() && !first_invalid_residue(seq);
}

}  // namespace kpo
