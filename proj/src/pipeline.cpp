#include "crowdrel/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace crowdrel {

namespace {

DsLabelSet restrict_labels(const DsLabelSet& labels,
                           const std::set<std::string>& sentence_ids) {
  DsLabelSet out;
  for (const auto& [key, score] : labels.entries()) {
    if (sentence_ids.count(key.first) > 0) {
      out.set(key.first, key.second, score);
    }
  }
  return out;
}

AnnotationCorpus subset_corpus(const AnnotationCorpus& corpus,
                               const std::set<std::string>& sentence_ids) {
  AnnotationCorpus out;
  out.taxonomy = corpus.taxonomy;
  for (const auto& s : corpus.sentences) {
    if (sentence_ids.count(s.sentence_id) > 0) out.sentences.push_back(s);
  }
  for (const auto& j : corpus.judgments) {
    if (sentence_ids.count(j.sentence_id) > 0) out.judgments.push_back(j);
  }
  return out;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0)) {
    throw std::invalid_argument("pipeline: test_fraction must be in (0,1)");
  }

  AnnotationCorpus corpus;
  DsLabelSet ds_labels;
  if (config.synth) {
    SynthOutput synth = generate(*config.synth);
    corpus = std::move(synth.corpus);
    ds_labels = std::move(synth.ds_labels);
  } else {
    corpus = config.corpus;
    ds_labels = config.ds_labels;
  }
  validate_merge_spec(config.merge_spec, corpus.taxonomy);

  PipelineResult result;
  auto [filtered, worker_report] = filter_spam(corpus, config.spam_threshold);
  result.worker_report = std::move(worker_report);

  const size_t n = filtered.sentences.size();
  if (n < 2) {
    throw DataError("pipeline: need at least 2 sentences after spam filtering");
  }
  size_t n_test = static_cast<size_t>(std::llround(config.test_fraction * n));
  n_test = std::min(std::max<size_t>(n_test, 1), n - 1);
  std::set<std::string> train_ids, test_ids;
  for (size_t i = 0; i < n; ++i) {
    const auto& id = filtered.sentences[i].sentence_id;
    (i < n - n_test ? train_ids : test_ids).insert(id);
  }
  result.train_count = train_ids.size();
  result.test_count = test_ids.size();

  AnnotationCorpus train_corpus = subset_corpus(filtered, train_ids);
  AnnotationCorpus test_corpus = subset_corpus(filtered, test_ids);
  AggregateSet train_aggregates = aggregate_corpus(train_corpus);
  AggregateSet test_aggregates = aggregate_corpus(test_corpus);
  DsLabelSet ds_train = restrict_labels(ds_labels, train_ids);

  result.fp_report = fp_rate(ds_train, train_aggregates, config.threshold);
  result.rcp_matrix = rcp_matrix_macro(train_aggregates, config.threshold);

  std::vector<std::string> fp_relations = config.fp_relations;
  if (fp_relations.empty()) {
    for (const auto& [relation, entry] : result.fp_report.relations) {
      if (entry.rate) fp_relations.push_back(relation);
    }
  }

  std::vector<EnhancedLabels> strategies;
  strategies.push_back(enhance_ds(ds_train));
  strategies.push_back(enhance_merged(ds_train, config.merge_spec));
  strategies.push_back(enhance_rcp(ds_train, result.rcp_matrix));
  strategies.push_back(enhance_fp(
      ds_train, result.fp_report,
      std::set<std::string>(fp_relations.begin(), fp_relations.end())));

  for (auto& enhanced : strategies) {
    StrategyOutcome outcome;
    outcome.strategy = enhanced.strategy;
    TrainResult trained = train(train_corpus.sentences, train_corpus.taxonomy,
                                enhanced.labels, config.train);
    outcome.final_train_loss = trained.final_loss;
    outcome.predictions = predict_all(trained.params, test_corpus.sentences);
    outcome.report = evaluate(outcome.predictions, test_aggregates,
                              config.threshold, config.threshold);
    outcome.labels = std::move(enhanced);
    result.strategies.push_back(std::move(outcome));
  }
  return result;
}

std::string format_comparison_table(const PipelineResult& result) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-10s %9s %9s %9s %12s\n", "strategy",
                "micro-P", "micro-R", "micro-F1", "train-loss");
  out << line;
  for (const auto& outcome : result.strategies) {
    const Metrics& m = outcome.report.micro;
    std::snprintf(line, sizeof(line), "%-10s %9.4f %9.4f %9.4f %12.6f\n",
                  outcome.strategy.c_str(), m.precision, m.recall, m.f1,
                  outcome.final_train_loss);
    out << line;
  }
  return out.str();
}

nlohmann::json comparison_to_json(const PipelineResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& outcome : result.strategies) {
    const Metrics& m = outcome.report.micro;
    rows.push_back({{"strategy", outcome.strategy},
                    {"micro_precision", m.precision},
                    {"micro_recall", m.recall},
                    {"micro_f1", m.f1},
                    {"train_loss", outcome.final_train_loss}});
  }
  return {{"train_count", result.train_count},
          {"test_count", result.test_count},
          {"strategies", rows}};
}

}  // namespace crowdrel
