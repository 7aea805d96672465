#include "crowdrel/analysis.hpp"

#include <set>
#include <stdexcept>

namespace crowdrel {

namespace {

void check_unit_interval(double value, const char* what) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " outside [0,1]");
  }
}

// Fills the matrix from presence events: rows are events, columns relations.
RcpMatrix matrix_from_events(RcpMode mode, double threshold,
                             std::vector<std::string> relations,
                             const std::vector<std::vector<bool>>& events) {
  RcpMatrix matrix;
  matrix.mode = mode;
  matrix.threshold = threshold;
  matrix.relations = std::move(relations);
  const size_t n = matrix.relations.size();
  matrix.entries.assign(n, std::vector<RcpEntry>(n));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      RcpEntry& e = matrix.entries[i][j];
      for (const auto& event : events) {
        if (event[i]) {
          ++e.cond_count;
          if (event[j]) ++e.joint_count;
        } else {
          ++e.complement_count;
          if (event[j]) ++e.complement_joint_count;
        }
      }
      if (e.cond_count == 0 || e.complement_count == 0) {
        continue;  // conditioning event never observed
      }
      double p_given = static_cast<double>(e.joint_count) / e.cond_count;
      double p_given_not =
          static_cast<double>(e.complement_joint_count) / e.complement_count;
      e.value = rcp(p_given, p_given_not);
    }
  }
  return matrix;
}

}  // namespace

FpReport fp_rate(const DsLabelSet& ds, const AggregateSet& aggregates,
                 double threshold) {
  check_unit_interval(threshold, "threshold");

  // Every labeled sentence must be covered by the aggregates.
  for (const auto& [key, score] : ds.entries()) {
    if (aggregates.find(key.first) == nullptr) {
      throw DataError("ds label references sentence '" + key.first +
                      "' absent from aggregates");
    }
  }

  FpReport report;
  report.threshold = threshold;
  const auto& relations = aggregates.relations();
  for (size_t i = 0; i < relations.size(); ++i) {
    FpEntry entry;
    for (const auto& agg : aggregates.sentences()) {
      if (ds.get(agg.sentence_id, relations[i]) < 0.5) continue;
      ++entry.positives;
      if (agg.srs[i] < threshold) ++entry.false_positives;
    }
    if (entry.positives > 0) {
      entry.rate = static_cast<double>(entry.false_positives) / entry.positives;
    }
    report.relations[relations[i]] = entry;
  }
  return report;
}

std::optional<double> rcp(double p_j_given_i, double p_j_given_not_i) {
  check_unit_interval(p_j_given_i, "p_j_given_i");
  check_unit_interval(p_j_given_not_i, "p_j_given_not_i");
  if (p_j_given_not_i == 1.0) return std::nullopt;
  return (p_j_given_i - p_j_given_not_i) / (1.0 - p_j_given_not_i);
}

std::optional<size_t> RcpMatrix::index_of(std::string_view relation) const {
  for (size_t i = 0; i < relations.size(); ++i) {
    if (relations[i] == relation) return i;
  }
  return std::nullopt;
}

std::optional<double> RcpMatrix::value(std::string_view ri,
                                       std::string_view rj) const {
  auto i = index_of(ri);
  auto j = index_of(rj);
  if (!i || !j) return std::nullopt;
  return entries[*i][*j].value;
}

RcpMatrix rcp_matrix_macro(const AggregateSet& aggregates, double threshold) {
  check_unit_interval(threshold, "threshold");
  if (aggregates.sentences().empty()) {
    throw std::invalid_argument("rcp_matrix_macro: no sentences");
  }
  const size_t n = aggregates.relations().size();
  std::vector<std::vector<bool>> events;
  events.reserve(aggregates.sentences().size());
  for (const auto& agg : aggregates.sentences()) {
    std::vector<bool> present(n);
    for (size_t i = 0; i < n; ++i) present[i] = agg.srs[i] >= threshold;
    events.push_back(std::move(present));
  }
  return matrix_from_events(RcpMode::kMacro, threshold, aggregates.relations(),
                            events);
}

RcpMatrix rcp_matrix_micro(const AnnotationCorpus& corpus) {
  if (corpus.judgments.empty()) {
    throw std::invalid_argument("rcp_matrix_micro: no judgments");
  }
  const size_t n = corpus.taxonomy.size();
  std::vector<std::vector<bool>> events;
  events.reserve(corpus.judgments.size());
  for (const auto& j : corpus.judgments) {
    std::vector<bool> present(n, false);
    for (const auto& rel : j.selected) {
      auto idx = corpus.taxonomy.index_of(rel);
      if (!idx) {
        throw DataError("judgment selects unknown relation '" + rel + "'");
      }
      present[*idx] = true;
    }
    events.push_back(std::move(present));
  }
  return matrix_from_events(RcpMode::kMicro, 0.0, corpus.taxonomy.relations(),
                            events);
}

void save_fp_report(const std::string& path, const FpReport& report) {
  std::vector<std::string> lines;
  nlohmann::json header = {{"record", "header"}, {"threshold", report.threshold}};
  lines.push_back(header.dump());
  for (const auto& [relation, entry] : report.relations) {
    nlohmann::json record = {{"relation", relation},
                             {"positives", entry.positives},
                             {"false_positives", entry.false_positives}};
    record["fp_rate"] = entry.rate ? nlohmann::json(*entry.rate)
                                   : nlohmann::json(nullptr);
    lines.push_back(record.dump());
  }
  io::write_lines(path, lines);
}

FpReport load_fp_report(const std::string& path) {
  FpReport report;
  bool have_header = false;
  io::for_each_jsonl_record(path, [&](size_t line, const nlohmann::json& record) {
    if (!have_header) {
      if (record.value("record", "") != "header") {
        throw DataError(path + ":" + std::to_string(line) + ": expected header");
      }
      report.threshold = record.at("threshold").get<double>();
      have_header = true;
      return;
    }
    FpEntry entry;
    entry.positives = record.at("positives").get<long>();
    entry.false_positives = record.at("false_positives").get<long>();
    if (!record.at("fp_rate").is_null()) {
      entry.rate = record.at("fp_rate").get<double>();
    }
    report.relations[record.at("relation").get<std::string>()] = entry;
  });
  if (!have_header) {
    throw DataError(path + ": missing header record");
  }
  return report;
}

void save_rcp_matrix(const std::string& path, const RcpMatrix& matrix) {
  nlohmann::json entries = nlohmann::json::array();
  for (size_t i = 0; i < matrix.relations.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (size_t j = 0; j < matrix.relations.size(); ++j) {
      const RcpEntry& e = matrix.entries[i][j];
      nlohmann::json cell = {
          {"value", e.value ? nlohmann::json(*e.value) : nlohmann::json(nullptr)},
          {"cond_count", e.cond_count},
          {"joint_count", e.joint_count},
          {"complement_count", e.complement_count},
          {"complement_joint_count", e.complement_joint_count}};
      row.push_back(cell);
    }
    entries.push_back(row);
  }
  nlohmann::json doc = {
      {"mode", matrix.mode == RcpMode::kMacro ? "macro" : "micro"},
      {"threshold", matrix.threshold},
      {"relations", matrix.relations},
      {"entries", entries}};
  io::write_text(path, doc.dump(2) + "\n");
}

RcpMatrix load_rcp_matrix(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": malformed rcp matrix: " + e.what());
  }
  RcpMatrix matrix;
  std::string mode = doc.at("mode").get<std::string>();
  if (mode == "macro") {
    matrix.mode = RcpMode::kMacro;
  } else if (mode == "micro") {
    matrix.mode = RcpMode::kMicro;
  } else {
    throw DataError(path + ": unknown mode '" + mode + "'");
  }
  matrix.threshold = doc.at("threshold").get<double>();
  matrix.relations = doc.at("relations").get<std::vector<std::string>>();
  const auto& entries = doc.at("entries");
  if (entries.size() != matrix.relations.size()) {
    throw DataError(path + ": entries shape mismatch");
  }
  for (const auto& row : entries) {
    if (row.size() != matrix.relations.size()) {
      throw DataError(path + ": entries shape mismatch");
    }
    std::vector<RcpEntry> out_row;
    for (const auto& cell : row) {
      RcpEntry e;
      if (!cell.at("value").is_null()) e.value = cell.at("value").get<double>();
      e.cond_count = cell.at("cond_count").get<long>();
      e.joint_count = cell.at("joint_count").get<long>();
      e.complement_count = cell.at("complement_count").get<long>();
      e.complement_joint_count = cell.at("complement_joint_count").get<long>();
      out_row.push_back(e);
    }
    matrix.entries.push_back(std::move(out_row));
  }
  return matrix;
}

}  // namespace crowdrel
