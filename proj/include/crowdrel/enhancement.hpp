#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "crowdrel/analysis.hpp"

namespace crowdrel {

// Relation pairs used by the merge strategy: symmetric pairs always co-occur
// after merging; causal pairs add the implied relation when the cause holds.
struct MergeSpec {
  std::vector<std::pair<std::string, std::string>> symmetric_pairs;
  std::vector<std::pair<std::string, std::string>> causal_pairs;  // cause -> implied

  bool empty() const { return symmetric_pairs.empty() && causal_pairs.empty(); }
};

// Throws when the spec names a relation outside the taxonomy or pairs a
// relation with itself.
void validate_merge_spec(const MergeSpec& spec, const RelationTaxonomy& taxonomy);

struct EnhancedLabels {
  DsLabelSet labels;
  std::string strategy;
  nlohmann::json parameters;  // strategy settings recorded in the sidecar
};

// Baseline pass-through.
EnhancedLabels enhance_ds(const DsLabelSet& ds);

// Binarizes at 0.5, then applies the merge rules to fixpoint. Never lowers a
// label; idempotent.
EnhancedLabels enhance_merged(const DsLabelSet& ds, const MergeSpec& spec);

// label'(s,j) = clip01( ds(s,j) + sum over i != j of RCP(i,j) * ds(s,i) ).
// Undefined matrix entries contribute 0. Relations absent from the matrix
// pass through unchanged.
EnhancedLabels enhance_rcp(const DsLabelSet& ds, const RcpMatrix& matrix);

// For each relation in `relations`, every sentence whose binarized label is 1
// is rewritten to clip01(1 - fp_rate). Throws when a requested relation has
// no defined rate.
EnhancedLabels enhance_fp(const DsLabelSet& ds, const FpReport& fp,
                          const std::set<std::string>& relations);

MergeSpec load_merge_spec(const std::string& path);
void save_merge_spec(const std::string& path, const MergeSpec& spec);

}  // namespace crowdrel
