#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crowdrel/corpus.hpp"

namespace crowdrel {

// Binary annotation vector of length |relations| + 1. The trailing component
// is NONE and is 1 exactly when every relation component is 0.
struct WorkerVector {
  std::string sentence_id;
  std::string worker_id;
  std::vector<int> components;
};

WorkerVector worker_vector(const Judgment& judgment, const RelationTaxonomy& taxonomy);

struct SentenceAggregate {
  std::string sentence_id;
  std::vector<int> sentence_vector;  // componentwise sum of worker vectors
  int worker_count = 0;
  std::vector<double> srs;           // per relation; NONE excluded

  bool operator==(const SentenceAggregate&) const = default;
};

// All judgments must belong to the same sentence; the list must be non-empty.
SentenceAggregate aggregate_sentence(std::span<const Judgment> judgments,
                                     const RelationTaxonomy& taxonomy);

// Per-sentence aggregates for a whole corpus, in corpus sentence order.
class AggregateSet {
 public:
  AggregateSet() = default;
  AggregateSet(std::vector<std::string> relations,
               std::vector<SentenceAggregate> sentences);

  const std::vector<std::string>& relations() const { return relations_; }
  const std::vector<SentenceAggregate>& sentences() const { return sentences_; }
  const SentenceAggregate* find(const std::string& sentence_id) const;

  bool operator==(const AggregateSet& other) const {
    return relations_ == other.relations_ && sentences_ == other.sentences_;
  }

 private:
  std::vector<std::string> relations_;
  std::vector<SentenceAggregate> sentences_;
  std::map<std::string, size_t> index_;
};

AggregateSet aggregate_corpus(const AnnotationCorpus& corpus);

struct WorkerQuality {
  double quality = 0.0;
  bool spam = false;
  int judgment_count = 0;
};

struct WorkerQualityReport {
  double spam_threshold = 0.0;
  std::map<std::string, WorkerQuality> workers;
  // Sentences dropped by filter_spam because every judgment was removed.
  std::vector<std::string> dropped_sentences;
};

// Mean, over the worker's sentences, of the cosine between the worker's
// vector and the rest-of-crowd vector (sentence vector minus the worker's
// own). Cosine against a zero vector is 0. Result is clamped to [0,1].
double worker_quality(const std::string& worker_id, const AnnotationCorpus& corpus);

WorkerQualityReport assess_workers(const AnnotationCorpus& corpus,
                                   double spam_threshold);

// Removes all judgments by workers whose quality falls below the threshold.
// Sentences left without judgments are dropped and recorded in the report.
std::pair<AnnotationCorpus, WorkerQualityReport> filter_spam(
    const AnnotationCorpus& corpus, double spam_threshold);

void save_aggregates(const std::string& path, const AggregateSet& aggregates);
AggregateSet load_aggregates(const std::string& path);
void save_worker_report(const std::string& path, const WorkerQualityReport& report);

}  // namespace crowdrel
