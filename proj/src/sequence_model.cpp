#include "kpo/sequence_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "kpo/error.hpp"
#include "kpo/io.hpp"

namespace kpo {

namespace {

int residue_token(char c) {
  const int t = amino_index(c);
  if (t < 0) {
    throw Error(ErrorCode::AlphabetError, "token '" + std::string(1, c) + "' is not an amino acid");
  }
  return t;
}

int start_context(std::string_view context) {
  return context.empty() ? kBeginContext : residue_token(context.back());
}

// Walks every (context, next) transition of seq followed by the end token.
template <typename Fn>
void for_each_transition(std::string_view seq, std::string_view context, Fn&& fn) {
  if (seq.empty()) throw Error(ErrorCode::AlphabetError, "empty sequence");
  for (char c : context) residue_token(c);
  int prev = start_context(context);
  for (char c : seq) {
    const int next = residue_token(c);
    fn(prev, next);
    prev = next;
  }
  fn(prev, kEndToken);
}

Distribution log_softmax_row(const BigramModel& m, int context) {
  Distribution out{};
  double top = m.logit(context, 0);
  for (int k = 1; k < kOutputs; ++k) top = std::max(top, m.logit(context, k));
  double sum = 0;
  for (int k = 0; k < kOutputs; ++k) sum += std::exp(m.logit(context, k) - top);
  const double lse = top + std::log(sum);
  for (int k = 0; k < kOutputs; ++k) out[k] = m.logit(context, k) - lse;
  return out;
}

}  // namespace

Distribution BigramModel::conditional(int context, double temperature) const {
  Distribution out{};
  double top = logit(context, 0) / temperature;
  for (int k = 1; k < kOutputs; ++k) top = std::max(top, logit(context, k) / temperature);
  double sum = 0;
  for (int k = 0; k < kOutputs; ++k) {
    out[k] = std::exp(logit(context, k) / temperature - top);
    sum += out[k];
  }
  for (double& p : out) p /= sum;
  return out;
}

double BigramModel::log_prob(std::string_view seq, std::string_view context) const {
  std::array<Distribution, kContexts> rows{};
  std::array<bool, kContexts> ready{};
  double total = 0;
  for_each_transition(seq, context, [&](int c, int next) {
    if (!ready[c]) {
      rows[c] = log_softmax_row(*this, c);
      ready[c] = true;
    }
    total += rows[c][next];
  });
  return total;
}

double BigramModel::accumulate_log_prob_gradient(std::string_view seq, std::string_view context,
                                                 double scale, std::span<double> grad) const {
  std::array<std::array<double, kOutputs>, kContexts> counts{};
  std::array<double, kContexts> visits{};
  for_each_transition(seq, context, [&](int c, int next) {
    counts[c][next] += 1.0;
    visits[c] += 1.0;
  });
  double total = 0;
  for (int c = 0; c < kContexts; ++c) {
    if (visits[c] == 0) continue;
    const auto logp = log_softmax_row(*this, c);
    for (int k = 0; k < kOutputs; ++k) {
      total += counts[c][k] * logp[k];
      grad[index(c, k)] += scale * (counts[c][k] - visits[c] * std::exp(logp[k]));
    }
  }
  return total;
}

std::string sample(const BigramModel& model, int max_len, double temperature, std::uint64_t seed) {
  if (max_len < 1) throw Error(ErrorCode::DomainError, "max_len must be >= 1");
  if (!(temperature > 0)) throw Error(ErrorCode::DomainError, "temperature must be > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::string out;
  int context = kBeginContext;
  while (static_cast<int>(out.size()) < max_len) {
    auto p = model.conditional(context, temperature);
    if (out.empty()) {
      p[kEndToken] = 0.0;
      double sum = 0;
      for (double x : p) sum += x;
      if (sum == 0) {
        // Every residue underflowed: take the most likely one.
        int best = 0;
        for (int k = 1; k < kEndToken; ++k) {
          if (model.logit(context, k) > model.logit(context, best)) best = k;
        }
        p.fill(0.0);
        p[best] = 1.0;
        sum = 1.0;
      }
      for (double& x : p) x /= sum;
    }
    const double u = unit(rng);
    double acc = 0;
    int next = kOutputs - 1;
    for (int k = 0; k < kOutputs; ++k) {
      acc += p[k];
      if (u < acc) {
        next = k;
        break;
      }
    }
    // Rounding can leave u beyond the accumulated mass; take the last
    // token with nonzero probability.
    if (acc <= u) {
      for (int k = kOutputs - 1; k >= 0; --k) {
        if (p[k] > 0) {
          next = k;
          break;
        }
      }
    }
    if (next == kEndToken) break;
    out.push_back(kAminoAcids[static_cast<std::size_t>(next)]);
    context = next;
  }
  return out;
}

std::string serialize_model(const BigramModel& model) {
  std::string out;
  out += "#alphabet\t" + std::string(kAminoAcids) + "\n";
  out += "#shape\t" + std::to_string(kContexts) + "\t" + std::to_string(kOutputs) + "\n";
  out += "#seed\t" + std::to_string(model.seed) + "\n";
  for (int c = 0; c < kContexts; ++c) {
    out += c == kBeginContext ? std::string("^") : std::string(1, kAminoAcids[static_cast<std::size_t>(c)]);
    for (int k = 0; k < kOutputs; ++k) {
      out += '\t';
      out += io::format_double(model.logit(c, k));
    }
    out += '\n';
  }
  return out;
}

BigramModel parse_model(std::string_view text) {
  BigramModel model;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  int rows = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto fields = io::split_tabs(line);
    if (fields[0] == "#alphabet") {
      if (fields.size() != 2 || fields[1] != kAminoAcids) {
        throw Error(ErrorCode::ParseError, "model alphabet mismatch", number);
      }
      continue;
    }
    if (fields[0] == "#shape") {
      if (fields.size() != 3 || io::parse_int(fields[1]) != kContexts ||
          io::parse_int(fields[2]) != kOutputs) {
        throw Error(ErrorCode::ParseError, "model shape mismatch", number);
      }
      continue;
    }
    if (fields[0] == "#seed") {
      if (fields.size() != 2) throw Error(ErrorCode::ParseError, "malformed seed line", number);
      model.seed = static_cast<std::uint64_t>(io::parse_int(fields[1]));
      continue;
    }
    if (fields.size() != static_cast<std::size_t>(kOutputs) + 1 || fields[0].size() != 1) {
      throw Error(ErrorCode::ParseError, "malformed model row", number);
    }
    const int context = fields[0] == "^" ? kBeginContext : amino_index(fields[0][0]);
    if (context < 0) throw Error(ErrorCode::ParseError, "unknown context label", number);
    for (int k = 0; k < kOutputs; ++k) {
      model.logit(context, k) = io::parse_double(fields[static_cast<std::size_t>(k) + 1]);
    }
    ++rows;
  }
  if (rows != kContexts) throw Error(ErrorCode::ParseError, "model has " + std::to_string(rows) + " rows");
  return model;
}

void write_model(const BigramModel& model, const std::filesystem::path& path) {
  io::write_atomic(path, serialize_model(model));
}

BigramModel read_model(const std::filesystem::path& path) {
  return parse_model(io::read_file(path));
}

}  // namespace kpo
