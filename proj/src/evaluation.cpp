#include "crowdrel/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace crowdrel {

Metrics metrics_from_counts(long tp, long fp, long fn, long tn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  if (tp + fp > 0) {
    m.precision = static_cast<double>(tp) / (tp + fp);
    m.precision_defined = true;
  }
  if (tp + fn > 0) {
    m.recall = static_cast<double>(tp) / (tp + fn);
    m.recall_defined = true;
  }
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

EvalReport evaluate(const PredictionSet& predictions, const AggregateSet& aggregates,
                    double pred_threshold, double truth_threshold) {
  if (!(pred_threshold >= 0.0 && pred_threshold <= 1.0) ||
      !(truth_threshold >= 0.0 && truth_threshold <= 1.0)) {
    throw std::invalid_argument("thresholds outside [0,1]");
  }
  if (predictions.relations != aggregates.relations()) {
    throw DataError("prediction and aggregate relation lists differ");
  }
  std::set<std::string> predicted_ids;
  for (const auto& [sentence_id, confidence] : predictions.rows) {
    if (!predicted_ids.insert(sentence_id).second) {
      throw DataError("duplicate prediction for sentence '" + sentence_id + "'");
    }
  }
  std::set<std::string> truth_ids;
  for (const auto& agg : aggregates.sentences()) truth_ids.insert(agg.sentence_id);
  if (predicted_ids != truth_ids) {
    throw DataError("prediction and aggregate sentence sets differ");
  }

  const auto& relations = predictions.relations;
  std::vector<long> tp(relations.size(), 0), fp(relations.size(), 0),
      fn(relations.size(), 0), tn(relations.size(), 0);
  for (const auto& [sentence_id, confidence] : predictions.rows) {
    const SentenceAggregate* agg = aggregates.find(sentence_id);
    for (size_t r = 0; r < relations.size(); ++r) {
      bool predicted = confidence[r] >= pred_threshold;
      bool truth = agg->srs[r] >= truth_threshold;
      if (predicted && truth) ++tp[r];
      else if (predicted && !truth) ++fp[r];
      else if (!predicted && truth) ++fn[r];
      else ++tn[r];
    }
  }

  EvalReport report;
  report.pred_threshold = pred_threshold;
  report.truth_threshold = truth_threshold;
  report.relations = relations;
  long pooled_tp = 0, pooled_fp = 0, pooled_fn = 0, pooled_tn = 0;
  for (size_t r = 0; r < relations.size(); ++r) {
    report.per_relation[relations[r]] = metrics_from_counts(tp[r], fp[r], fn[r], tn[r]);
    pooled_tp += tp[r];
    pooled_fp += fp[r];
    pooled_fn += fn[r];
    pooled_tn += tn[r];
  }
  report.micro = metrics_from_counts(pooled_tp, pooled_fp, pooled_fn, pooled_tn);
  return report;
}

namespace {

nlohmann::json metrics_to_json(const Metrics& m) {
  return {{"tp", m.tp},
          {"fp", m.fp},
          {"fn", m.fn},
          {"tn", m.tn},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"precision_defined", m.precision_defined},
          {"recall_defined", m.recall_defined}};
}

}  // namespace

void save_eval_report(const std::string& path, const EvalReport& report) {
  nlohmann::json per_relation = nlohmann::json::object();
  for (const auto& [relation, m] : report.per_relation) {
    per_relation[relation] = metrics_to_json(m);
  }
  nlohmann::json doc = {{"pred_threshold", report.pred_threshold},
                        {"truth_threshold", report.truth_threshold},
                        {"relations", report.relations},
                        {"per_relation", per_relation},
                        {"micro", metrics_to_json(report.micro)}};
  io::write_text(path, doc.dump(2) + "\n");
}

std::string format_eval_table(const EvalReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-28s %6s %6s %6s %6s %8s %8s %8s\n",
                "relation", "tp", "fp", "fn", "tn", "P", "R", "F1");
  out << line;
  auto row = [&](const std::string& name, const Metrics& m) {
    std::snprintf(line, sizeof(line),
                  "%-28s %6ld %6ld %6ld %6ld %8.4f %8.4f %8.4f\n", name.c_str(),
                  m.tp, m.fp, m.fn, m.tn, m.precision, m.recall, m.f1);
    out << line;
  };
  for (const auto& relation : report.relations) {
    row(relation, report.per_relation.at(relation));
  }
  row("micro", report.micro);
  return out.str();
}

}  // namespace crowdrel
