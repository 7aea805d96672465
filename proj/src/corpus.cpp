#include "crowdrel/corpus.hpp"

#include <algorithm>
#include <set>

namespace crowdrel {

namespace {

std::string require_string(const nlohmann::json& record, const char* field,
                           const std::string& path, size_t line) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_string()) {
    throw DataError(path + ":" + std::to_string(line) + ": missing string field '" +
                    field + "'");
  }
  return it->get<std::string>();
}

}  // namespace

RelationTaxonomy::RelationTaxonomy(std::vector<std::string> relations)
    : relations_(std::move(relations)) {
  for (size_t i = 0; i < relations_.size(); ++i) {
    if (relations_[i].empty()) {
      throw DataError("taxonomy: empty relation identifier at position " +
                      std::to_string(i));
    }
    if (!index_.emplace(relations_[i], i).second) {
      throw DataError("taxonomy: duplicate relation '" + relations_[i] + "'");
    }
  }
}

std::optional<size_t> RelationTaxonomy::index_of(std::string_view relation) const {
  auto it = index_.find(relation);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool RelationTaxonomy::contains(std::string_view relation) const {
  return index_.count(relation) > 0;
}

double DsLabelSet::get(const std::string& sentence_id,
                       const std::string& relation) const {
  auto it = entries_.find(Key{sentence_id, relation});
  return it == entries_.end() ? 0.0 : it->second;
}

void DsLabelSet::set(const std::string& sentence_id, const std::string& relation,
                     double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw DataError("label score " + std::to_string(score) + " for (" + sentence_id +
                    ", " + relation + ") is outside [0,1]");
  }
  Key key{sentence_id, relation};
  if (score == 0.0) {
    entries_.erase(key);
  } else {
    entries_[key] = score;
  }
}

const Sentence* AnnotationCorpus::find_sentence(std::string_view sentence_id) const {
  for (const auto& s : sentences) {
    if (s.sentence_id == sentence_id) return &s;
  }
  return nullptr;
}

void validate_corpus(const AnnotationCorpus& corpus,
                     std::vector<std::string>* warnings) {
  std::set<std::string> sentence_ids;
  for (const auto& s : corpus.sentences) {
    if (!sentence_ids.insert(s.sentence_id).second) {
      throw DataError("duplicate sentence_id '" + s.sentence_id + "'");
    }
    if (warnings != nullptr) {
      if (s.text.find(s.term1) == std::string::npos) {
        warnings->push_back("sentence '" + s.sentence_id + "': term1 '" + s.term1 +
                            "' not found in text");
      }
      if (s.text.find(s.term2) == std::string::npos) {
        warnings->push_back("sentence '" + s.sentence_id + "': term2 '" + s.term2 +
                            "' not found in text");
      }
    }
  }

  std::set<std::pair<std::string, std::string>> seen;
  std::set<std::string> judged;
  for (const auto& j : corpus.judgments) {
    if (sentence_ids.count(j.sentence_id) == 0) {
      throw DataError("judgment by worker '" + j.worker_id +
                      "' references unknown sentence '" + j.sentence_id + "'");
    }
    if (!seen.insert({j.sentence_id, j.worker_id}).second) {
      throw DataError("duplicate judgment for (" + j.sentence_id + ", " +
                      j.worker_id + ")");
    }
    std::set<std::string> unique_selected;
    for (const auto& rel : j.selected) {
      if (!corpus.taxonomy.contains(rel)) {
        throw DataError("judgment for (" + j.sentence_id + ", " + j.worker_id +
                        ") selects unknown relation '" + rel + "'");
      }
      if (!unique_selected.insert(rel).second) {
        throw DataError("judgment for (" + j.sentence_id + ", " + j.worker_id +
                        ") selects relation '" + rel + "' twice");
      }
    }
    judged.insert(j.sentence_id);
  }

  for (const auto& s : corpus.sentences) {
    if (judged.count(s.sentence_id) == 0) {
      throw DataError("sentence '" + s.sentence_id + "' has no judgments");
    }
  }
}

AnnotationCorpus load_corpus(const std::string& sentences_path,
                             const std::string& judgments_path,
                             const RelationTaxonomy& taxonomy,
                             std::vector<std::string>* warnings) {
  AnnotationCorpus corpus;
  corpus.taxonomy = taxonomy;

  io::for_each_jsonl_record(
      sentences_path, [&](size_t line, const nlohmann::json& record) {
        Sentence s;
        s.sentence_id = require_string(record, "sentence_id", sentences_path, line);
        s.text = require_string(record, "text", sentences_path, line);
        s.term1 = require_string(record, "term1", sentences_path, line);
        s.term2 = require_string(record, "term2", sentences_path, line);
        corpus.sentences.push_back(std::move(s));
      });

  io::for_each_jsonl_record(
      judgments_path, [&](size_t line, const nlohmann::json& record) {
        Judgment j;
        j.sentence_id = require_string(record, "sentence_id", judgments_path, line);
        j.worker_id = require_string(record, "worker_id", judgments_path, line);
        auto it = record.find("selected");
        if (it == record.end() || !it->is_array()) {
          throw DataError(judgments_path + ":" + std::to_string(line) +
                          ": missing array field 'selected'");
        }
        for (const auto& rel : *it) {
          if (!rel.is_string()) {
            throw DataError(judgments_path + ":" + std::to_string(line) +
                            ": 'selected' entries must be strings");
          }
          std::string name = rel.get<std::string>();
          if (!taxonomy.contains(name)) {
            throw DataError(judgments_path + ":" + std::to_string(line) +
                            ": unknown relation '" + name + "'");
          }
          j.selected.push_back(std::move(name));
        }
        corpus.judgments.push_back(std::move(j));
      });

  validate_corpus(corpus, warnings);
  return corpus;
}

std::vector<Sentence> load_sentences(const std::string& path) {
  std::vector<Sentence> sentences;
  io::for_each_jsonl_record(path, [&](size_t line, const nlohmann::json& record) {
    Sentence s;
    s.sentence_id = require_string(record, "sentence_id", path, line);
    s.text = require_string(record, "text", path, line);
    s.term1 = require_string(record, "term1", path, line);
    s.term2 = require_string(record, "term2", path, line);
    sentences.push_back(std::move(s));
  });
  return sentences;
}

void save_sentences(const std::string& path, const std::vector<Sentence>& sentences) {
  std::vector<std::string> lines;
  lines.reserve(sentences.size());
  for (const auto& s : sentences) {
    nlohmann::json record = {{"sentence_id", s.sentence_id},
                             {"text", s.text},
                             {"term1", s.term1},
                             {"term2", s.term2}};
    lines.push_back(record.dump());
  }
  io::write_lines(path, lines);
}

void save_judgments(const std::string& path, const std::vector<Judgment>& judgments) {
  std::vector<std::string> lines;
  lines.reserve(judgments.size());
  for (const auto& j : judgments) {
    nlohmann::json record = {{"sentence_id", j.sentence_id},
                             {"worker_id", j.worker_id},
                             {"selected", j.selected}};
    lines.push_back(record.dump());
  }
  io::write_lines(path, lines);
}

DsLabelSet load_ds_labels(const std::string& path, const AnnotationCorpus& corpus) {
  DsLabelSet labels;
  std::set<std::string> sentence_ids;
  for (const auto& s : corpus.sentences) sentence_ids.insert(s.sentence_id);

  std::set<DsLabelSet::Key> seen;
  io::for_each_jsonl_record(path, [&](size_t line, const nlohmann::json& record) {
    std::string sentence_id = require_string(record, "sentence_id", path, line);
    std::string relation = require_string(record, "relation", path, line);
    auto it = record.find("score");
    if (it == record.end() || !it->is_number()) {
      throw DataError(path + ":" + std::to_string(line) +
                      ": missing numeric field 'score'");
    }
    double score = it->get<double>();
    if (sentence_ids.count(sentence_id) == 0) {
      throw DataError(path + ":" + std::to_string(line) + ": unknown sentence '" +
                      sentence_id + "'");
    }
    if (!corpus.taxonomy.contains(relation)) {
      throw DataError(path + ":" + std::to_string(line) + ": unknown relation '" +
                      relation + "'");
    }
    if (!(score >= 0.0 && score <= 1.0)) {
      throw DataError(path + ":" + std::to_string(line) + ": score " +
                      std::to_string(score) + " outside [0,1]");
    }
    if (!seen.insert({sentence_id, relation}).second) {
      throw DataError(path + ":" + std::to_string(line) + ": duplicate label for (" +
                      sentence_id + ", " + relation + ")");
    }
    labels.set(sentence_id, relation, score);
  });
  return labels;
}

DsLabelSet load_ds_labels_raw(const std::string& path,
                              const RelationTaxonomy* taxonomy) {
  DsLabelSet labels;
  std::set<DsLabelSet::Key> seen;
  io::for_each_jsonl_record(path, [&](size_t line, const nlohmann::json& record) {
    std::string sentence_id = require_string(record, "sentence_id", path, line);
    std::string relation = require_string(record, "relation", path, line);
    auto it = record.find("score");
    if (it == record.end() || !it->is_number()) {
      throw DataError(path + ":" + std::to_string(line) +
                      ": missing numeric field 'score'");
    }
    double score = it->get<double>();
    if (taxonomy != nullptr && !taxonomy->contains(relation)) {
      throw DataError(path + ":" + std::to_string(line) + ": unknown relation '" +
                      relation + "'");
    }
    if (!(score >= 0.0 && score <= 1.0)) {
      throw DataError(path + ":" + std::to_string(line) + ": score " +
                      std::to_string(score) + " outside [0,1]");
    }
    if (!seen.insert({sentence_id, relation}).second) {
      throw DataError(path + ":" + std::to_string(line) + ": duplicate label for (" +
                      sentence_id + ", " + relation + ")");
    }
    labels.set(sentence_id, relation, score);
  });
  return labels;
}

void save_ds_labels(const std::string& path, const DsLabelSet& labels) {
  std::vector<std::string> lines;
  lines.reserve(labels.size());
  for (const auto& [key, score] : labels.entries()) {
    nlohmann::json record = {{"sentence_id", key.first},
                             {"relation", key.second},
                             {"score", score}};
    lines.push_back(record.dump());
  }
  io::write_lines(path, lines);
}

RelationTaxonomy load_taxonomy(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": malformed taxonomy: " + e.what());
  }
  if (!doc.is_array()) {
    throw DataError(path + ": taxonomy must be a JSON array of relation names");
  }
  std::vector<std::string> relations;
  for (const auto& entry : doc) {
    if (!entry.is_string()) {
      throw DataError(path + ": taxonomy entries must be strings");
    }
    relations.push_back(entry.get<std::string>());
  }
  return RelationTaxonomy(std::move(relations));
}

void save_taxonomy(const std::string& path, const RelationTaxonomy& taxonomy) {
  io::write_text(path, nlohmann::json(taxonomy.relations()).dump() + "\n");
}

}  // namespace crowdrel
