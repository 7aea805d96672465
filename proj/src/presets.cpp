#include "crowdrel/presets.hpp"

namespace crowdrel {

RelationTaxonomy preset_relations_taxonomy() {
  return RelationTaxonomy({
      "place_of_birth",
      "origin",
      "places_of_residence",
      "place_of_death",
      "founded_organization",
      "employee_or_member",
      "top_employee_or_member",
      "member_of",
      "schools_attended",
      "spouse",
      "children",
      "parents",
      "siblings",
      "other_family",
      "subsidiaries",
      "headquarters",
  });
}

MergeSpec preset_merge_spec() {
  MergeSpec spec;
  spec.symmetric_pairs = {{"origin", "place_of_birth"}};
  spec.causal_pairs = {{"top_employee_or_member", "employee_or_member"}};
  return spec;
}

std::vector<std::string> preset_fp_relations() { return {"place_of_death"}; }

SynthConfig preset_synthetic_config(uint64_t seed) {
  SynthConfig config;
  config.seed = seed;
  config.num_sentences = 3000;
  config.num_workers_per_sentence = 15;
  config.relations = {
      "place_of_birth",
      "origin",
      "places_of_residence",
      "place_of_death",
      "founded_organization",
      "employee_or_member",
      "top_employee_or_member",
  };
  config.base_rates = {
      {"place_of_birth", 0.15},
      {"origin", 0.12},
      {"places_of_residence", 0.30},
      {"place_of_death", 0.09},
      {"founded_organization", 0.10},
      {"employee_or_member", 0.08},
      {"top_employee_or_member", 0.25},
  };
  config.rules = {
      {"top_employee_or_member", "employee_or_member", 1.0},
      {"place_of_birth", "origin", 0.9},
      {"origin", "place_of_birth", 0.85},
  };
  config.worker_reliability = 0.9;
  config.spam_fraction = 1.0 / 15.0;
  config.fp_injection = {{"place_of_death", 0.9}};
  config.causality_drop = 0.8;
  return config;
}

}  // namespace crowdrel
