#pragma once

#include "crowdrel/enhancement.hpp"
#include "crowdrel/synth.hpp"

namespace crowdrel {

// "paper-relations": the 16-relation TAC-KBP subset over Person, Organization
// and Location term types, with the merge rules used by the bundled demos.
RelationTaxonomy preset_relations_taxonomy();
MergeSpec preset_merge_spec();
std::vector<std::string> preset_fp_relations();

// "paper-synthetic": a generator configuration exhibiting the two label
// pathologies the toolkit measures — a relation dominated by injected false
// positives, and a causal pair whose implied relation is usually missing from
// the DS labels.
SynthConfig preset_synthetic_config(uint64_t seed);

}  // namespace crowdrel
