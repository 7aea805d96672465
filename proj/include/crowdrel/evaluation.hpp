#pragma once

#include <map>
#include <string>

#include "crowdrel/aggregation.hpp"
#include "crowdrel/classifier.hpp"

namespace crowdrel {

struct Metrics {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  // False when the corresponding denominator was zero; the metric then
  // reports 0 by convention.
  bool precision_defined = false, recall_defined = false;

  bool operator==(const Metrics&) const = default;
};

struct EvalReport {
  double pred_threshold = 0.5;
  double truth_threshold = 0.5;
  std::vector<std::string> relations;
  std::map<std::string, Metrics> per_relation;
  Metrics micro;  // pooled over all (sentence, relation) pairs
};

// Predicted positive iff confidence >= pred_threshold; true positive label
// iff SRS >= truth_threshold. Prediction and aggregate sentence sets must be
// identical.
EvalReport evaluate(const PredictionSet& predictions, const AggregateSet& aggregates,
                    double pred_threshold, double truth_threshold);

Metrics metrics_from_counts(long tp, long fp, long fn, long tn);

void save_eval_report(const std::string& path, const EvalReport& report);
std::string format_eval_table(const EvalReport& report);

}  // namespace crowdrel
