#include "kpo/config.hpp"

#include <set>

#include "kpo/error.hpp"
#include "kpo/io.hpp"

namespace kpo {

using nlohmann::json;
using nlohmann::ordered_json;

PipelineConfig::PipelineConfig() {
  // Pretraining is plain maximum likelihood; only the learning rate and the
  // epoch count differ from the preference defaults.
  pretrain.learning_rate = 0.05;
  pretrain.epochs = 300;
}

void PipelineConfig::validate() const {
  if (paths.workdir.empty()) throw Error(ErrorCode::ConfigError, "paths.workdir is empty");
  if (!(split.ratio > 0.0 && split.ratio < 1.0)) {
    throw Error(ErrorCode::ConfigError, "split.ratio must lie in (0, 1)");
  }
  prune.validate();
  embed.validate();
  pair.validate();
  pretrain.validate();
  finetune.validate();
  if (sample.count < 1) throw Error(ErrorCode::ConfigError, "sample.count must be >= 1");
  if (sample.max_len < 1) throw Error(ErrorCode::ConfigError, "sample.max_len must be >= 1");
  if (!(sample.temperature > 0.0)) {
    throw Error(ErrorCode::ConfigError, "sample.temperature must be > 0");
  }
  eval.align.validate();
  synth.validate();
}

void PipelineConfig::override_seed(std::uint64_t seed) {
  split.seed = prune.seed = embed.seed = pretrain.seed = finetune.seed = sample.seed = synth.seed = seed;
}

namespace {

// Reads known keys out of one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw Error(ErrorCode::ConfigError, name_ + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!it->is_number_unsigned()) throw Error(ErrorCode::ConfigError, "expected a non-negative integer");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw Error(ErrorCode::ConfigError, "expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw Error(ErrorCode::ConfigError, "expected a number");
      }
      out = it->get<T>();
    } catch (const std::exception& e) {
      throw Error(ErrorCode::ConfigError, name_ + "." + key + ": " + e.what());
    }
  }

  template <typename E, typename Parse>
  void get_enum(const char* key, E& out, Parse parse) {
    std::string text;
    get(key, text);
    if (j_.contains(key)) {
      auto v = parse(text);
      if (!v) throw Error(ErrorCode::ConfigError, name_ + "." + key + ": unknown value '" + text + "'");
      out = *v;
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw Error(ErrorCode::ConfigError, "unknown key '" + name_ + "." + it.key() + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_train(const json& j, const std::string& name, TrainConfig& t) {
  Section s(j, name);
  s.get("phi", t.phi);
  s.get("learning_rate", t.learning_rate);
  s.get("epochs", t.epochs);
  s.get("batch_size", t.batch_size);
  s.get("seed", t.seed);
  s.get_enum("variant", t.variant, parse_preference_variant);
  s.get("lambda", t.lambda);
  s.get_enum("optimizer", t.optimizer, parse_optimizer);
  s.finish();
}

ordered_json write_train(const TrainConfig& t) {
  return {{"phi", t.phi},
          {"learning_rate", t.learning_rate},
          {"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"seed", t.seed},
          {"variant", std::string(to_string(t.variant))},
          {"lambda", t.lambda},
          {"optimizer", std::string(to_string(t.optimizer))}};
}

}  // namespace

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  Section root(j, "config");
  if (const json* p = root.child("paths")) {
    Section s(*p, "paths");
    s.get("nodes", c.paths.nodes);
    s.get("annotations", c.paths.annotations);
    s.get("go_relations", c.paths.go_relations);
    s.get("workdir", c.paths.workdir);
    s.finish();
  }
  if (const json* p = root.child("split")) {
    Section s(*p, "split");
    s.get("ratio", c.split.ratio);
    s.get("seed", c.split.seed);
    s.finish();
  }
  if (const json* p = root.child("prune")) {
    Section s(*p, "prune");
    s.get("alpha", c.prune.alpha);
    s.get("beta", c.prune.beta);
    s.get("gamma", c.prune.gamma);
    s.get("delta", c.prune.delta);
    s.get("q_fraction", c.prune.q_fraction);
    s.get("k_fraction", c.prune.k_fraction);
    s.get_enum("strategy", c.prune.strategy, parse_prune_strategy);
    s.get_enum("retain", c.prune.retain, parse_retain_mode);
    s.get("seed", c.prune.seed);
    s.finish();
  }
  if (const json* p = root.child("embed")) {
    Section s(*p, "embed");
    s.get("dim", c.embed.dim);
    s.get("margin", c.embed.margin);
    s.get("learning_rate", c.embed.learning_rate);
    s.get("epochs", c.embed.epochs);
    s.get("negatives_per_positive", c.embed.negatives_per_positive);
    s.get("seed", c.embed.seed);
    s.get_enum("loss", c.embed.loss, parse_transe_loss);
    s.finish();
  }
  if (const json* p = root.child("pair")) {
    Section s(*p, "pair");
    s.get("tau", c.pair.tau);
    s.get("mu", c.pair.mu);
    s.get("top_m", c.pair.top_m);
    s.get("threads", c.pair.threads);
    s.finish();
  }
  if (const json* p = root.child("pretrain")) read_train(*p, "pretrain", c.pretrain);
  if (const json* p = root.child("finetune")) read_train(*p, "finetune", c.finetune);
  if (const json* p = root.child("sample")) {
    Section s(*p, "sample");
    s.get("count", c.sample.count);
    s.get("max_len", c.sample.max_len);
    s.get("temperature", c.sample.temperature);
    s.get("seed", c.sample.seed);
    s.finish();
  }
  if (const json* p = root.child("eval")) {
    Section s(*p, "eval");
    s.get("match", c.eval.align.match);
    s.get("mismatch", c.eval.align.mismatch);
    s.get("gap", c.eval.align.gap);
    s.get_enum("length_norm", c.eval.length_norm, parse_length_norm);
    s.finish();
  }
  if (const json* p = root.child("synth")) {
    Section s(*p, "synth");
    s.get("harmful", c.synth.harmful);
    s.get("benign", c.synth.benign);
    s.get("go_terms", c.synth.go_terms);
    s.get("annotation_density", c.synth.annotation_density);
    s.get("go_depth", c.synth.go_depth);
    s.get("zipf_exponent", c.synth.zipf_exponent);
    s.get("min_length", c.synth.min_length);
    s.get("max_length", c.synth.max_length);
    s.get("motif", c.synth.motif);
    s.get("motif_copies", c.synth.motif_copies);
    s.get("seed", c.synth.seed);
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

ordered_json config_to_json(const PipelineConfig& c) {
  ordered_json j;
  j["paths"] = {{"nodes", c.paths.nodes},
                {"annotations", c.paths.annotations},
                {"go_relations", c.paths.go_relations},
                {"workdir", c.paths.workdir}};
  j["split"] = {{"ratio", c.split.ratio}, {"seed", c.split.seed}};
  j["prune"] = {{"alpha", c.prune.alpha},
                {"beta", c.prune.beta},
                {"gamma", c.prune.gamma},
                {"delta", c.prune.delta},
                {"q_fraction", c.prune.q_fraction},
                {"k_fraction", c.prune.k_fraction},
                {"strategy", std::string(to_string(c.prune.strategy))},
                {"retain", std::string(to_string(c.prune.retain))},
                {"seed", c.prune.seed}};
  j["embed"] = {{"dim", c.embed.dim},
                {"margin", c.embed.margin},
                {"learning_rate", c.embed.learning_rate},
                {"epochs", c.embed.epochs},
                {"negatives_per_positive", c.embed.negatives_per_positive},
                {"seed", c.embed.seed},
                {"loss", std::string(to_string(c.embed.loss))}};
  j["pair"] = {{"tau", c.pair.tau}, {"mu", c.pair.mu}, {"top_m", c.pair.top_m}, {"threads", c.pair.threads}};
  j["pretrain"] = write_train(c.pretrain);
  j["finetune"] = write_train(c.finetune);
  j["sample"] = {{"count", c.sample.count},
                 {"max_len", c.sample.max_len},
                 {"temperature", c.sample.temperature},
                 {"seed", c.sample.seed}};
  j["eval"] = {{"match", c.eval.align.match},
               {"mismatch", c.eval.align.mismatch},
               {"gap", c.eval.align.gap},
               {"length_norm", std::string(to_string(c.eval.length_norm))}};
  j["synth"] = {{"harmful", c.synth.harmful},
                {"benign", c.synth.benign},
                {"go_terms", c.synth.go_terms},
                {"annotation_density", c.synth.annotation_density},
                {"go_depth", c.synth.go_depth},
                {"zipf_exponent", c.synth.zipf_exponent},
                {"min_length", c.synth.min_length},
                {"max_length", c.synth.max_length},
                {"motif", c.synth.motif},
                {"motif_copies", c.synth.motif_copies},
                {"seed", c.synth.seed}};
  return j;
}

PipelineConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return parse_config(io::read_file(path));
}

std::string serialize_config(const PipelineConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

std::string config_hash(const PipelineConfig& cfg) {
  PipelineConfig copy = cfg;
  copy.paths.workdir.clear();
  return io::sha256_hex(serialize_config(copy));
}

}  // namespace kpo
