#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crowdrel/io.hpp"

namespace crowdrel {

// Closed, ordered set of relation identifiers. NONE is not a member; it
// occupies one extra dimension at index size() in worker/sentence vectors.
class RelationTaxonomy {
 public:
  RelationTaxonomy() = default;
  explicit RelationTaxonomy(std::vector<std::string> relations);

  const std::vector<std::string>& relations() const { return relations_; }
  size_t size() const { return relations_.size(); }
  size_t none_index() const { return relations_.size(); }
  std::optional<size_t> index_of(std::string_view relation) const;
  bool contains(std::string_view relation) const;

  bool operator==(const RelationTaxonomy& other) const {
    return relations_ == other.relations_;
  }

 private:
  std::vector<std::string> relations_;
  std::map<std::string, size_t, std::less<>> index_;
};

struct Sentence {
  std::string sentence_id;
  std::string text;
  std::string term1;
  std::string term2;

  bool operator==(const Sentence&) const = default;
};

// One worker's annotation of one sentence. Empty `selected` encodes NONE.
struct Judgment {
  std::string sentence_id;
  std::string worker_id;
  std::vector<std::string> selected;

  bool is_none() const { return selected.empty(); }
  bool operator==(const Judgment&) const = default;
};

// Continuous labels in [0,1] keyed by (sentence_id, relation). Absent keys
// read as 0; setting an exact 0 erases the key, so semantically equal label
// sets compare and serialize identically.
class DsLabelSet {
 public:
  using Key = std::pair<std::string, std::string>;

  double get(const std::string& sentence_id, const std::string& relation) const;
  void set(const std::string& sentence_id, const std::string& relation, double score);
  const std::map<Key, double>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

  bool operator==(const DsLabelSet&) const = default;

 private:
  std::map<Key, double> entries_;
};

struct AnnotationCorpus {
  RelationTaxonomy taxonomy;
  std::vector<Sentence> sentences;
  std::vector<Judgment> judgments;

  const Sentence* find_sentence(std::string_view sentence_id) const;
  bool operator==(const AnnotationCorpus&) const = default;
};

// Checks corpus invariants: judgments resolve to sentences, selections are in
// the taxonomy, no duplicate (sentence, worker) pair, every sentence has at
// least one judgment. Term-pair absence from the text is appended to
// `warnings` rather than raised.
void validate_corpus(const AnnotationCorpus& corpus,
                     std::vector<std::string>* warnings = nullptr);

AnnotationCorpus load_corpus(const std::string& sentences_path,
                             const std::string& judgments_path,
                             const RelationTaxonomy& taxonomy,
                             std::vector<std::string>* warnings = nullptr);

// Sentence records without judgments, e.g. a DS-only training corpus.
std::vector<Sentence> load_sentences(const std::string& path);

void save_sentences(const std::string& path, const std::vector<Sentence>& sentences);
void save_judgments(const std::string& path, const std::vector<Judgment>& judgments);

DsLabelSet load_ds_labels(const std::string& path, const AnnotationCorpus& corpus);

// Label records checked for shape, score range and duplicates only; keys are
// validated later, wherever the labels meet a corpus. Relation names are
// checked when a taxonomy is supplied.
DsLabelSet load_ds_labels_raw(const std::string& path,
                              const RelationTaxonomy* taxonomy = nullptr);

void save_ds_labels(const std::string& path, const DsLabelSet& labels);

// Taxonomy file: a JSON array of relation identifiers.
RelationTaxonomy load_taxonomy(const std::string& path);
void save_taxonomy(const std::string& path, const RelationTaxonomy& taxonomy);

}  // namespace crowdrel
