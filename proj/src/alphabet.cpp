#include "kpo/alphabet.hpp"

#include <array>

namespace kpo {

namespace {

constexpr std::array<signed char, 256> make_table() {
  std::array<signed char, 256> table{};
  for (auto& v : table) v = -1;
  for (int i = 0; i < kNumAminoAcids; ++i) {
    table[static_cast<unsigned char>(kAminoAcids[i])] = static_cast<signed char>(i);
  }
  return table;
}

constexpr auto kIndex = make_table();

}  // namespace

int amino_index(char c) noexcept { return kIndex[static_cast<unsigned char>(c)]; }

std::optional<std::size_t> first_invalid_residue(std::string_view seq) noexcept {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (amino_index(seq[i]) < 0) return i;
  }
  return std::nullopt;
}

}  // namespace kpo
