#include "crowdrel/enhancement.hpp"

#include <algorithm>
#include <map>

namespace crowdrel {

namespace {

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

nlohmann::json pairs_to_json(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [a, b] : pairs) out.push_back({a, b});
  return out;
}

// Label entries of one sentence, in entry order of the underlying map.
using SentenceLabels = std::map<std::string, double>;

std::map<std::string, SentenceLabels> group_by_sentence(const DsLabelSet& ds) {
  std::map<std::string, SentenceLabels> groups;
  for (const auto& [key, score] : ds.entries()) {
    groups[key.first][key.second] = score;
  }
  return groups;
}

}  // namespace

void validate_merge_spec(const MergeSpec& spec, const RelationTaxonomy& taxonomy) {
  auto check_pair = [&](const std::pair<std::string, std::string>& pair,
                        const char* kind) {
    for (const auto& rel : {pair.first, pair.second}) {
      if (!taxonomy.contains(rel)) {
        throw DataError(std::string(kind) + " pair references unknown relation '" +
                        rel + "'");
      }
    }
    if (pair.first == pair.second) {
      throw DataError(std::string(kind) + " pair relates '" + pair.first +
                      "' to itself");
    }
  };
  for (const auto& p : spec.symmetric_pairs) check_pair(p, "symmetric");
  for (const auto& p : spec.causal_pairs) check_pair(p, "causal");
}

EnhancedLabels enhance_ds(const DsLabelSet& ds) {
  return {ds, "ds", nlohmann::json::object()};
}

EnhancedLabels enhance_merged(const DsLabelSet& ds, const MergeSpec& spec) {
  DsLabelSet out;
  for (const auto& [sentence_id, labels] : group_by_sentence(ds)) {
    std::set<std::string> positive;
    for (const auto& [relation, score] : labels) {
      if (score >= 0.5) positive.insert(relation);
    }
    // Rules fire until no rule adds a relation, so rule order is irrelevant.
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [a, b] : spec.symmetric_pairs) {
        if (positive.count(a) != positive.count(b)) {
          positive.insert(a);
          positive.insert(b);
          changed = true;
        }
      }
      for (const auto& [cause, implied] : spec.causal_pairs) {
        if (positive.count(cause) > 0 && positive.insert(implied).second) {
          changed = true;
        }
      }
    }
    for (const auto& relation : positive) {
      out.set(sentence_id, relation, 1.0);
    }
  }
  return {std::move(out), "merged",
          {{"symmetric_pairs", pairs_to_json(spec.symmetric_pairs)},
           {"causal_pairs", pairs_to_json(spec.causal_pairs)}}};
}

EnhancedLabels enhance_rcp(const DsLabelSet& ds, const RcpMatrix& matrix) {
  DsLabelSet out;
  const auto& relations = matrix.relations;
  for (const auto& [sentence_id, labels] : group_by_sentence(ds)) {
    // Input labels projected onto the matrix relations.
    std::vector<double> in(relations.size(), 0.0);
    for (size_t i = 0; i < relations.size(); ++i) {
      auto it = labels.find(relations[i]);
      if (it != labels.end()) in[i] = it->second;
    }
    for (size_t j = 0; j < relations.size(); ++j) {
      double sum = in[j];
      for (size_t i = 0; i < relations.size(); ++i) {
        if (i == j || !matrix.entries[i][j].value) continue;
        sum += *matrix.entries[i][j].value * in[i];
      }
      out.set(sentence_id, relations[j], clip01(sum));
    }
    // Labels for relations outside the matrix pass through.
    for (const auto& [relation, score] : labels) {
      if (!matrix.index_of(relation)) {
        out.set(sentence_id, relation, score);
      }
    }
  }
  return {std::move(out), "rcp",
          {{"mode", matrix.mode == RcpMode::kMacro ? "macro" : "micro"},
           {"matrix_threshold", matrix.threshold}}};
}

EnhancedLabels enhance_fp(const DsLabelSet& ds, const FpReport& fp,
                          const std::set<std::string>& relations) {
  std::map<std::string, double> rates;
  for (const auto& relation : relations) {
    auto it = fp.relations.find(relation);
    if (it == fp.relations.end() || !it->second.rate) {
      throw DataError("fp_rate undefined for relation '" + relation + "'");
    }
    rates[relation] = *it->second.rate;
  }
  DsLabelSet out;
  for (const auto& [key, score] : ds.entries()) {
    auto it = rates.find(key.second);
    if (it != rates.end() && score >= 0.5) {
      out.set(key.first, key.second, clip01(1.0 - it->second));
    } else {
      out.set(key.first, key.second, score);
    }
  }
  nlohmann::json applied = nlohmann::json::object();
  for (const auto& [relation, rate] : rates) applied[relation] = rate;
  return {std::move(out), "fp", {{"fp_rates", applied}}};
}

MergeSpec load_merge_spec(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": malformed merge spec: " + e.what());
  }
  auto read_pairs = [&](const char* field) {
    std::vector<std::pair<std::string, std::string>> pairs;
    if (!doc.contains(field)) return pairs;
    for (const auto& entry : doc.at(field)) {
      if (!entry.is_array() || entry.size() != 2) {
        throw DataError(path + ": '" + field + "' entries must be string pairs");
      }
      pairs.emplace_back(entry[0].get<std::string>(), entry[1].get<std::string>());
    }
    return pairs;
  };
  MergeSpec spec;
  spec.symmetric_pairs = read_pairs("symmetric_pairs");
  spec.causal_pairs = read_pairs("causal_pairs");
  return spec;
}

void save_merge_spec(const std::string& path, const MergeSpec& spec) {
  nlohmann::json doc = {{"symmetric_pairs", pairs_to_json(spec.symmetric_pairs)},
                        {"causal_pairs", pairs_to_json(spec.causal_pairs)}};
  io::write_text(path, doc.dump(2) + "\n");
}

}  // namespace crowdrel
