#include "crowdrel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>

namespace crowdrel {

namespace {

// Uniform draws built directly from the standardized mt19937_64 bit stream,
// so generated corpora are identical across standard library implementations.
class Rand {
 public:
  explicit Rand(uint64_t seed) : rng_(seed) {}

  double uniform() { return (rng_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  size_t below(size_t n) { return static_cast<size_t>(rng_() % n); }

 private:
  std::mt19937_64 rng_;
};

void check_rate(double value, const std::string& what) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument("synth: " + what + " outside [0,1]");
  }
}

void validate_config(const SynthConfig& config) {
  if (config.num_sentences <= 0) {
    throw std::invalid_argument("synth: num_sentences must be positive");
  }
  if (config.num_workers_per_sentence <= 0) {
    throw std::invalid_argument("synth: num_workers_per_sentence must be positive");
  }
  if (config.relations.empty()) {
    throw std::invalid_argument("synth: no relations");
  }
  std::set<std::string> known(config.relations.begin(), config.relations.end());
  if (known.size() != config.relations.size()) {
    throw std::invalid_argument("synth: duplicate relation");
  }
  for (const auto& [rel, rate] : config.base_rates) {
    if (known.count(rel) == 0) {
      throw std::invalid_argument("synth: base rate for unknown relation '" + rel + "'");
    }
    check_rate(rate, "base rate of " + rel);
  }
  for (const auto& rule : config.rules) {
    if (known.count(rule.cause) == 0 || known.count(rule.effect) == 0) {
      throw std::invalid_argument("synth: rule references unknown relation");
    }
    if (rule.cause == rule.effect) {
      throw std::invalid_argument("synth: rule relates a relation to itself");
    }
    check_rate(rule.strength, "rule strength");
  }
  for (const auto& [rel, rate] : config.fp_injection) {
    if (known.count(rel) == 0) {
      throw std::invalid_argument("synth: fp injection for unknown relation '" + rel +
                                  "'");
    }
    check_rate(rate, "fp injection of " + rel);
  }
  check_rate(config.worker_reliability, "worker reliability");
  check_rate(config.spam_fraction, "spam fraction");
  check_rate(config.causality_drop, "causality drop");
}

std::string sentence_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%05d", i);
  return buf;
}

std::string worker_id(int w) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "w%03d", w);
  return buf;
}

}  // namespace

SynthOutput generate(const SynthConfig& config) {
  validate_config(config);
  Rand rand(config.seed);

  const auto& relations = config.relations;
  const size_t n_rel = relations.size();
  const int n_workers = config.num_workers_per_sentence;

  auto rate_of = [](const std::map<std::string, double>& rates,
                    const std::string& rel) {
    auto it = rates.find(rel);
    return it == rates.end() ? 0.0 : it->second;
  };

  // Spam worker selection: partial shuffle of the worker pool.
  int n_spam = static_cast<int>(
      std::llround(config.spam_fraction * static_cast<double>(n_workers)));
  std::vector<int> pool(n_workers);
  for (int w = 0; w < n_workers; ++w) pool[w] = w;
  for (int k = 0; k < n_spam; ++k) {
    size_t pick = k + rand.below(pool.size() - k);
    std::swap(pool[k], pool[pick]);
  }
  std::set<int> spam(pool.begin(), pool.begin() + n_spam);

  SynthOutput out;
  out.corpus.taxonomy = RelationTaxonomy(relations);
  for (int w : spam) out.spam_workers.push_back(worker_id(w));
  std::sort(out.spam_workers.begin(), out.spam_workers.end());

  for (int s = 0; s < config.num_sentences; ++s) {
    const std::string sid = sentence_id(s);

    // Ground truth: base draws, then closure under the implication rules.
    // Each rule consumes exactly one draw per sentence whether or not it ends
    // up firing, so the stream position never depends on earlier outcomes.
    std::vector<bool> truth(n_rel);
    for (size_t r = 0; r < n_rel; ++r) {
      truth[r] = rand.bernoulli(rate_of(config.base_rates, relations[r]));
    }
    std::vector<bool> rule_success(config.rules.size());
    for (size_t k = 0; k < config.rules.size(); ++k) {
      rule_success[k] = rand.bernoulli(config.rules[k].strength);
    }
    auto index_of = [&](const std::string& rel) {
      return static_cast<size_t>(
          *out.corpus.taxonomy.index_of(rel));
    };
    std::vector<bool> rule_fired(config.rules.size(), false);
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t k = 0; k < config.rules.size(); ++k) {
        size_t cause = index_of(config.rules[k].cause);
        size_t effect = index_of(config.rules[k].effect);
        if (truth[cause] && !truth[effect] && rule_success[k]) {
          truth[effect] = true;
          rule_fired[k] = true;
          changed = true;
        }
      }
    }

    // Templated text: the term pair plus cue tokens for each true relation
    // and a little shared filler.
    Sentence sentence;
    sentence.sentence_id = sid;
    sentence.term1 = "alpha" + std::to_string(s);
    sentence.term2 = "beta" + std::to_string(s);
    std::string text = sentence.term1;
    for (size_t r = 0; r < n_rel; ++r) {
      if (!truth[r]) continue;
      for (int k = 0; k < 2; ++k) {
        text += " cue_" + relations[r] + "_" + std::to_string(rand.below(6));
      }
    }
    for (int k = 0; k < 2; ++k) {
      text += " filler_" + std::to_string(rand.below(30));
    }
    text += " " + sentence.term2;
    sentence.text = std::move(text);
    out.corpus.sentences.push_back(std::move(sentence));

    for (size_t r = 0; r < n_rel; ++r) {
      if (truth[r]) out.true_labels.set(sid, relations[r], 1.0);
    }

    // Worker judgments.
    for (int w = 0; w < n_workers; ++w) {
      Judgment judgment;
      judgment.sentence_id = sid;
      judgment.worker_id = worker_id(w);
      bool is_spam = spam.count(w) > 0;
      for (size_t r = 0; r < n_rel; ++r) {
        bool selected;
        if (is_spam) {
          selected = rand.bernoulli(0.5);
        } else {
          bool flip = rand.bernoulli(1.0 - config.worker_reliability);
          selected = truth[r] != flip;
        }
        if (selected) judgment.selected.push_back(relations[r]);
      }
      out.corpus.judgments.push_back(std::move(judgment));
    }

    // DS labels: truth, plus injected false positives, minus dropped
    // rule-implied positives.
    std::vector<bool> ds(truth);
    for (size_t r = 0; r < n_rel; ++r) {
      if (!truth[r] && rand.bernoulli(rate_of(config.fp_injection, relations[r]))) {
        ds[r] = true;
      }
    }
    for (size_t k = 0; k < config.rules.size(); ++k) {
      if (rule_fired[k] && rand.bernoulli(config.causality_drop)) {
        ds[index_of(config.rules[k].effect)] = false;
      }
    }
    for (size_t r = 0; r < n_rel; ++r) {
      if (ds[r]) out.ds_labels.set(sid, relations[r], 1.0);
    }
  }

  return out;
}

SynthConfig load_synth_config(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": malformed synth config: " + e.what());
  }
  SynthConfig config;
  config.seed = doc.value("seed", 0ull);
  config.num_sentences = doc.at("num_sentences").get<int>();
  config.num_workers_per_sentence = doc.at("num_workers_per_sentence").get<int>();
  config.relations = doc.at("relations").get<std::vector<std::string>>();
  if (doc.contains("base_rates")) {
    config.base_rates = doc.at("base_rates").get<std::map<std::string, double>>();
  }
  if (doc.contains("rules")) {
    for (const auto& rule : doc.at("rules")) {
      config.rules.push_back({rule.at("cause").get<std::string>(),
                              rule.at("effect").get<std::string>(),
                              rule.value("strength", 1.0)});
    }
  }
  config.worker_reliability = doc.value("worker_reliability", 1.0);
  config.spam_fraction = doc.value("spam_fraction", 0.0);
  if (doc.contains("fp_injection")) {
    config.fp_injection =
        doc.at("fp_injection").get<std::map<std::string, double>>();
  }
  config.causality_drop = doc.value("causality_drop", 0.0);
  return config;
}

nlohmann::json synth_config_to_json(const SynthConfig& config) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& rule : config.rules) {
    rules.push_back({{"cause", rule.cause},
                     {"effect", rule.effect},
                     {"strength", rule.strength}});
  }
  return {{"seed", config.seed},
          {"num_sentences", config.num_sentences},
          {"num_workers_per_sentence", config.num_workers_per_sentence},
          {"relations", config.relations},
          {"base_rates", config.base_rates},
          {"rules", rules},
          {"worker_reliability", config.worker_reliability},
          {"spam_fraction", config.spam_fraction},
          {"fp_injection", config.fp_injection},
          {"causality_drop", config.causality_drop}};
}

}  // namespace crowdrel
