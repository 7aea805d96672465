#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crowdrel/aggregation.hpp"

namespace crowdrel {

struct FpEntry {
  long positives = 0;
  long false_positives = 0;
  std::optional<double> rate;  // absent when positives == 0

  bool operator==(const FpEntry&) const = default;
};

// Per-relation rate of DS-positive sentences the crowd rejects. DS labels are
// binarized at 0.5; a sentence counts as a false positive when its SRS falls
// strictly below the crowd threshold.
struct FpReport {
  double threshold = 0.5;
  std::map<std::string, FpEntry> relations;
};

FpReport fp_rate(const DsLabelSet& ds, const AggregateSet& aggregates,
                 double threshold);

// Causal power of one event over another:
//   (P(j|i) - P(j|not i)) / (1 - P(j|not i))
// Undefined when the denominator is zero. Inputs must lie in [0,1].
std::optional<double> rcp(double p_j_given_i, double p_j_given_not_i);

struct RcpEntry {
  std::optional<double> value;
  long cond_count = 0;              // events where relation i holds
  long joint_count = 0;             // events where i and j both hold
  long complement_count = 0;        // events where i does not hold
  long complement_joint_count = 0;  // i absent, j holds

  bool operator==(const RcpEntry&) const = default;
};

enum class RcpMode { kMacro, kMicro };

// entries[i][j] holds the causal power of relation i over relation j, with
// the counts behind both conditional probabilities. An entry is undefined
// exactly when a conditioning count is zero or P(j|not i) = 1.
struct RcpMatrix {
  RcpMode mode = RcpMode::kMacro;
  double threshold = 0.5;  // macro presence threshold; unused for micro
  std::vector<std::string> relations;
  std::vector<std::vector<RcpEntry>> entries;

  std::optional<size_t> index_of(std::string_view relation) const;
  std::optional<double> value(std::string_view ri, std::string_view rj) const;
};

// Presence events are sentences; relation i is present when SRS_i >= threshold.
RcpMatrix rcp_matrix_macro(const AggregateSet& aggregates, double threshold);

// Presence events are individual worker judgments.
RcpMatrix rcp_matrix_micro(const AnnotationCorpus& corpus);

void save_fp_report(const std::string& path, const FpReport& report);
FpReport load_fp_report(const std::string& path);
void save_rcp_matrix(const std::string& path, const RcpMatrix& matrix);
RcpMatrix load_rcp_matrix(const std::string& path);

}  // namespace crowdrel
