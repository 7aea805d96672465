#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crowdrel/classifier.hpp"
#include "crowdrel/enhancement.hpp"
#include "crowdrel/evaluation.hpp"
#include "crowdrel/synth.hpp"

namespace crowdrel {

// End-to-end comparison of the four labeling strategies (ds, merged, rcp, fp)
// on one corpus: spam-filter, split train/test, derive the FP report and
// macro RCP matrix from the train split, train one model per strategy and
// evaluate all of them on the test split.
struct PipelineConfig {
  // Either a generator config or an already-loaded corpus + labels.
  std::optional<SynthConfig> synth;
  AnnotationCorpus corpus;   // used when synth is absent
  DsLabelSet ds_labels;      // used when synth is absent

  double threshold = 0.5;
  double spam_threshold = 0.5;
  double test_fraction = 0.2;
  MergeSpec merge_spec;
  // Relations for the fp strategy; empty selects every relation with a
  // defined fp rate.
  std::vector<std::string> fp_relations;
  TrainConfig train;
};

struct StrategyOutcome {
  std::string strategy;
  EnhancedLabels labels;
  double final_train_loss = 0.0;
  PredictionSet predictions;
  EvalReport report;
};

struct PipelineResult {
  std::vector<StrategyOutcome> strategies;  // ds, merged, rcp, fp
  FpReport fp_report;
  RcpMatrix rcp_matrix;
  WorkerQualityReport worker_report;
  size_t train_count = 0;
  size_t test_count = 0;
};

PipelineResult run_pipeline(const PipelineConfig& config);

std::string format_comparison_table(const PipelineResult& result);
nlohmann::json comparison_to_json(const PipelineResult& result);

}  // namespace crowdrel
