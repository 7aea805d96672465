#include "crowdrel/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace crowdrel {

namespace {

double cosine(std::span<const int> a, std::span<const int> b) {
  long dot = 0, na = 0, nb = 0;
  for (size_t k = 0; k < a.size(); ++k) {
    dot += static_cast<long>(a[k]) * b[k];
    na += static_cast<long>(a[k]) * a[k];
    nb += static_cast<long>(b[k]) * b[k];
  }
  if (na == 0 || nb == 0) return 0.0;
  return static_cast<double>(dot) /
         (std::sqrt(static_cast<double>(na)) * std::sqrt(static_cast<double>(nb)));
}

// Judgments grouped by sentence, preserving corpus sentence order.
std::vector<std::vector<const Judgment*>> group_by_sentence(
    const AnnotationCorpus& corpus) {
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < corpus.sentences.size(); ++i) {
    index[corpus.sentences[i].sentence_id] = i;
  }
  std::vector<std::vector<const Judgment*>> groups(corpus.sentences.size());
  for (const auto& j : corpus.judgments) {
    auto it = index.find(j.sentence_id);
    if (it == index.end()) {
      throw DataError("judgment references unknown sentence '" + j.sentence_id + "'");
    }
    groups[it->second].push_back(&j);
  }
  return groups;
}

}  // namespace

WorkerVector worker_vector(const Judgment& judgment,
                           const RelationTaxonomy& taxonomy) {
  WorkerVector v;
  v.sentence_id = judgment.sentence_id;
  v.worker_id = judgment.worker_id;
  v.components.assign(taxonomy.size() + 1, 0);
  for (const auto& rel : judgment.selected) {
    auto idx = taxonomy.index_of(rel);
    if (!idx) {
      throw DataError("judgment selects unknown relation '" + rel + "'");
    }
    v.components[*idx] = 1;
  }
  if (judgment.is_none()) {
    v.components[taxonomy.none_index()] = 1;
  }
  return v;
}

SentenceAggregate aggregate_sentence(std::span<const Judgment> judgments,
                                     const RelationTaxonomy& taxonomy) {
  if (judgments.empty()) {
    throw std::invalid_argument("aggregate_sentence: empty judgment list");
  }
  SentenceAggregate agg;
  agg.sentence_id = judgments.front().sentence_id;
  agg.sentence_vector.assign(taxonomy.size() + 1, 0);
  for (const auto& j : judgments) {
    if (j.sentence_id != agg.sentence_id) {
      throw std::invalid_argument(
          "aggregate_sentence: judgments span multiple sentences");
    }
    WorkerVector v = worker_vector(j, taxonomy);
    for (size_t k = 0; k < v.components.size(); ++k) {
      agg.sentence_vector[k] += v.components[k];
    }
    ++agg.worker_count;
  }
  agg.srs.resize(taxonomy.size());
  for (size_t i = 0; i < taxonomy.size(); ++i) {
    agg.srs[i] = static_cast<double>(agg.sentence_vector[i]) / agg.worker_count;
  }
  return agg;
}

AggregateSet::AggregateSet(std::vector<std::string> relations,
                           std::vector<SentenceAggregate> sentences)
    : relations_(std::move(relations)), sentences_(std::move(sentences)) {
  for (size_t i = 0; i < sentences_.size(); ++i) {
    index_[sentences_[i].sentence_id] = i;
  }
}

const SentenceAggregate* AggregateSet::find(const std::string& sentence_id) const {
  auto it = index_.find(sentence_id);
  return it == index_.end() ? nullptr : &sentences_[it->second];
}

AggregateSet aggregate_corpus(const AnnotationCorpus& corpus) {
  auto groups = group_by_sentence(corpus);
  std::vector<SentenceAggregate> aggregates;
  aggregates.reserve(corpus.sentences.size());
  for (size_t i = 0; i < corpus.sentences.size(); ++i) {
    if (groups[i].empty()) {
      throw DataError("sentence '" + corpus.sentences[i].sentence_id +
                      "' has no judgments");
    }
    std::vector<Judgment> group;
    group.reserve(groups[i].size());
    for (const Judgment* j : groups[i]) group.push_back(*j);
    aggregates.push_back(aggregate_sentence(group, corpus.taxonomy));
  }
  return AggregateSet(corpus.taxonomy.relations(), std::move(aggregates));
}

double worker_quality(const std::string& worker_id, const AnnotationCorpus& corpus) {
  auto groups = group_by_sentence(corpus);
  double sum = 0.0;
  int count = 0;
  for (const auto& group : groups) {
    const Judgment* own = nullptr;
    for (const Judgment* j : group) {
      if (j->worker_id == worker_id) {
        own = j;
        break;
      }
    }
    if (own == nullptr) continue;
    std::vector<int> rest(corpus.taxonomy.size() + 1, 0);
    for (const Judgment* j : group) {
      if (j == own) continue;
      WorkerVector v = worker_vector(*j, corpus.taxonomy);
      for (size_t k = 0; k < rest.size(); ++k) rest[k] += v.components[k];
    }
    WorkerVector own_vector = worker_vector(*own, corpus.taxonomy);
    sum += cosine(own_vector.components, rest);
    ++count;
  }
  if (count == 0) {
    throw DataError("unknown worker '" + worker_id + "'");
  }
  return std::clamp(sum / count, 0.0, 1.0);
}

WorkerQualityReport assess_workers(const AnnotationCorpus& corpus,
                                   double spam_threshold) {
  if (!(spam_threshold >= 0.0 && spam_threshold <= 1.0)) {
    throw std::invalid_argument("spam threshold outside [0,1]");
  }
  WorkerQualityReport report;
  report.spam_threshold = spam_threshold;

  auto groups = group_by_sentence(corpus);
  std::map<std::string, std::pair<double, int>> totals;  // worker -> (sum, count)
  for (const auto& group : groups) {
    std::vector<WorkerVector> vectors;
    vectors.reserve(group.size());
    std::vector<int> sentence_vector(corpus.taxonomy.size() + 1, 0);
    for (const Judgment* j : group) {
      vectors.push_back(worker_vector(*j, corpus.taxonomy));
      for (size_t k = 0; k < sentence_vector.size(); ++k) {
        sentence_vector[k] += vectors.back().components[k];
      }
    }
    std::vector<int> rest(sentence_vector.size());
    for (const auto& v : vectors) {
      for (size_t k = 0; k < rest.size(); ++k) {
        rest[k] = sentence_vector[k] - v.components[k];
      }
      auto& [sum, count] = totals[v.worker_id];
      sum += cosine(v.components, rest);
      ++count;
    }
  }
  for (const auto& [worker_id, total] : totals) {
    WorkerQuality q;
    q.quality = std::clamp(total.first / total.second, 0.0, 1.0);
    q.spam = q.quality < spam_threshold;
    q.judgment_count = total.second;
    report.workers[worker_id] = q;
  }
  return report;
}

std::pair<AnnotationCorpus, WorkerQualityReport> filter_spam(
    const AnnotationCorpus& corpus, double spam_threshold) {
  WorkerQualityReport report = assess_workers(corpus, spam_threshold);

  AnnotationCorpus filtered;
  filtered.taxonomy = corpus.taxonomy;
  std::set<std::string> kept_sentences;
  for (const auto& j : corpus.judgments) {
    if (report.workers.at(j.worker_id).spam) continue;
    filtered.judgments.push_back(j);
    kept_sentences.insert(j.sentence_id);
  }
  for (const auto& s : corpus.sentences) {
    if (kept_sentences.count(s.sentence_id) > 0) {
      filtered.sentences.push_back(s);
    } else {
      report.dropped_sentences.push_back(s.sentence_id);
    }
  }
  return {std::move(filtered), std::move(report)};
}

void save_aggregates(const std::string& path, const AggregateSet& aggregates) {
  std::vector<std::string> lines;
  lines.reserve(aggregates.sentences().size() + 1);
  nlohmann::json header = {{"record", "header"},
                           {"relations", aggregates.relations()}};
  lines.push_back(header.dump());
  for (const auto& agg : aggregates.sentences()) {
    nlohmann::json srs = nlohmann::json::object();
    for (size_t i = 0; i < aggregates.relations().size(); ++i) {
      srs[aggregates.relations()[i]] = agg.srs[i];
    }
    nlohmann::json record = {{"sentence_id", agg.sentence_id},
                             {"worker_count", agg.worker_count},
                             {"sentence_vector", agg.sentence_vector},
                             {"srs", srs}};
    lines.push_back(record.dump());
  }
  io::write_lines(path, lines);
}

AggregateSet load_aggregates(const std::string& path) {
  std::vector<std::string> relations;
  std::vector<SentenceAggregate> sentences;
  bool have_header = false;
  io::for_each_jsonl_record(path, [&](size_t line, const nlohmann::json& record) {
    if (!have_header) {
      if (record.value("record", "") != "header" || !record.contains("relations")) {
        throw DataError(path + ":" + std::to_string(line) +
                        ": expected header record with relations");
      }
      relations = record.at("relations").get<std::vector<std::string>>();
      have_header = true;
      return;
    }
    SentenceAggregate agg;
    agg.sentence_id = record.at("sentence_id").get<std::string>();
    agg.worker_count = record.at("worker_count").get<int>();
    agg.sentence_vector = record.at("sentence_vector").get<std::vector<int>>();
    if (agg.sentence_vector.size() != relations.size() + 1) {
      throw DataError(path + ":" + std::to_string(line) +
                      ": sentence_vector length mismatch");
    }
    const auto& srs = record.at("srs");
    agg.srs.reserve(relations.size());
    for (const auto& rel : relations) {
      agg.srs.push_back(srs.at(rel).get<double>());
    }
    sentences.push_back(std::move(agg));
  });
  if (!have_header) {
    throw DataError(path + ": missing header record");
  }
  return AggregateSet(std::move(relations), std::move(sentences));
}

void save_worker_report(const std::string& path, const WorkerQualityReport& report) {
  std::vector<std::string> lines;
  nlohmann::json header = {{"record", "header"},
                           {"spam_threshold", report.spam_threshold},
                           {"dropped_sentences", report.dropped_sentences}};
  lines.push_back(header.dump());
  for (const auto& [worker_id, q] : report.workers) {
    nlohmann::json record = {{"worker_id", worker_id},
                             {"quality", q.quality},
                             {"spam", q.spam},
                             {"judgment_count", q.judgment_count}};
    lines.push_back(record.dump());
  }
  io::write_lines(path, lines);
}

}  // namespace crowdrel
