#pragma once

#include <map>
#include <string>
#include <vector>

#include "crowdrel/corpus.hpp"

namespace crowdrel {

// Ground-truth implication: when `cause` holds, `effect` is added with the
// given probability.
struct ImplicationRule {
  std::string cause;
  std::string effect;
  double strength = 1.0;
};

struct SynthConfig {
  uint64_t seed = 0;
  int num_sentences = 0;
  int num_workers_per_sentence = 0;
  std::vector<std::string> relations;
  std::map<std::string, double> base_rates;    // missing relation reads as 0
  std::vector<ImplicationRule> rules;
  double worker_reliability = 1.0;
  double spam_fraction = 0.0;
  std::map<std::string, double> fp_injection;  // missing relation reads as 0
  double causality_drop = 0.0;
};

struct SynthOutput {
  AnnotationCorpus corpus;
  DsLabelSet ds_labels;
  DsLabelSet true_labels;
  std::vector<std::string> spam_workers;
};

// Deterministic generator: equal configs give bit-identical outputs. Ground
// truth is drawn from base rates and closed under the implication rules;
// non-spam workers flip each truth bit with probability 1 - reliability while
// spam workers answer uniformly at random; DS labels start from the truth,
// then false positives are injected on true-negatives and rule-implied
// positives are dropped at the causality_drop rate.
SynthOutput generate(const SynthConfig& config);

SynthConfig load_synth_config(const std::string& path);
nlohmann::json synth_config_to_json(const SynthConfig& config);

}  // namespace crowdrel
