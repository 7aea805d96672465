#include "crowdrel/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

namespace crowdrel {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

// Token positions where `term`'s token sequence starts within `tokens`.
std::vector<size_t> term_positions(const std::vector<std::string>& tokens,
                                   const std::vector<std::string>& term) {
  std::vector<size_t> positions;
  if (term.empty() || term.size() > tokens.size()) return positions;
  for (size_t start = 0; start + term.size() <= tokens.size(); ++start) {
    if (std::equal(term.begin(), term.end(), tokens.begin() + start)) {
      positions.push_back(start);
    }
  }
  return positions;
}

uint32_t bucket(std::string_view token, uint32_t dim) {
  return static_cast<uint32_t>(io::fnv1a64(token) % dim);
}

void check_targets(const ModelParams& params, std::span<const double> targets) {
  if (targets.size() != params.relation_count()) {
    throw std::invalid_argument("target vector length mismatch");
  }
  for (double t : targets) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw std::invalid_argument("target outside [0,1]");
    }
  }
}

}  // namespace

FeatureVector featurize(const Sentence& sentence, uint32_t dim) {
  if (dim == 0) throw std::invalid_argument("feature dimension must be positive");
  std::vector<std::string> tokens = tokenize(sentence.text);
  std::map<uint32_t, int> counts;
  for (const auto& token : tokens) {
    ++counts[bucket(token, dim)];
  }
  auto mark = [&](const std::string& term, const char* tag) {
    for (size_t pos : term_positions(tokens, tokenize(term))) {
      ++counts[bucket(std::string(tag) + "@" + std::to_string(pos), dim)];
    }
  };
  mark(sentence.term1, "__term1");
  mark(sentence.term2, "__term2");

  FeatureVector fv;
  fv.entries.assign(counts.begin(), counts.end());
  return fv;
}

ModelParams ModelParams::zeros(std::vector<std::string> relations, uint32_t dim) {
  ModelParams params;
  params.dim = dim;
  params.relations = std::move(relations);
  params.weights.assign(params.relations.size() * static_cast<size_t>(dim), 0.0);
  params.bias.assign(params.relations.size(), 0.0);
  return params;
}

std::vector<double> scores(const ModelParams& params, const FeatureVector& features) {
  std::vector<double> z(params.relation_count());
  for (size_t r = 0; r < z.size(); ++r) {
    double acc = params.bias[r];
    const double* row = params.weights.data() + r * params.dim;
    for (const auto& [index, count] : features.entries) {
      acc += row[index] * count;
    }
    z[r] = acc;
  }
  return z;
}

std::vector<double> predict_features(const ModelParams& params,
                                     const FeatureVector& features) {
  std::vector<double> confidence = scores(params, features);
  for (double& z : confidence) z = sigmoid(z);
  return confidence;
}

std::vector<double> predict(const ModelParams& params, const Sentence& sentence) {
  return predict_features(params, featurize(sentence, params.dim));
}

double loss(const ModelParams& params, const FeatureVector& features,
            std::span<const double> targets) {
  check_targets(params, targets);
  std::vector<double> z = scores(params, features);
  double total = 0.0;
  for (size_t r = 0; r < z.size(); ++r) {
    // -t log s(z) - (1-t) log(1 - s(z)), rewritten with softplus.
    total += targets[r] * softplus(-z[r]) + (1.0 - targets[r]) * softplus(z[r]);
  }
  return total;
}

Gradient gradient(const ModelParams& params, const FeatureVector& features,
                  std::span<const double> targets) {
  check_targets(params, targets);
  Gradient grad;
  grad.weights.assign(params.weights.size(), 0.0);
  grad.bias.assign(params.relation_count(), 0.0);
  std::vector<double> z = scores(params, features);
  for (size_t r = 0; r < z.size(); ++r) {
    double dz = sigmoid(z[r]) - targets[r];
    grad.bias[r] = dz;
    double* row = grad.weights.data() + r * params.dim;
    for (const auto& [index, count] : features.entries) {
      row[index] = dz * count;
    }
  }
  return grad;
}

TrainResult train(std::span<const Sentence> sentences,
                  const RelationTaxonomy& taxonomy, const DsLabelSet& labels,
                  const TrainConfig& config) {
  if (sentences.empty()) throw std::invalid_argument("train: no sentences");
  if (config.batch_size <= 0 || config.learning_rate <= 0.0 || config.steps < 0 ||
      config.dim == 0) {
    throw std::invalid_argument("train: invalid config");
  }

  std::vector<FeatureVector> features;
  features.reserve(sentences.size());
  std::vector<std::vector<double>> targets;
  targets.reserve(sentences.size());
  for (const auto& s : sentences) {
    features.push_back(featurize(s, config.dim));
    std::vector<double> t(taxonomy.size());
    for (size_t r = 0; r < taxonomy.size(); ++r) {
      t[r] = labels.get(s.sentence_id, taxonomy.relations()[r]);
    }
    targets.push_back(std::move(t));
  }

  ModelParams params = ModelParams::zeros(taxonomy.relations(), config.dim);
  std::mt19937_64 rng(config.seed);
  std::vector<size_t> batch(static_cast<size_t>(config.batch_size));
  std::vector<std::vector<double>> dz(batch.size(),
                                      std::vector<double>(taxonomy.size()));

  for (long step = 0; step < config.steps; ++step) {
    for (auto& index : batch) {
      index = static_cast<size_t>(rng() % sentences.size());
    }
    // All per-example errors come from the pre-update parameters, so the
    // update below equals one exact batch-gradient step.
    for (size_t b = 0; b < batch.size(); ++b) {
      std::vector<double> z = scores(params, features[batch[b]]);
      for (size_t r = 0; r < z.size(); ++r) {
        if (!std::isfinite(z[r])) {
          throw std::runtime_error(
              "train: non-finite score at step " + std::to_string(step) +
              "; lower the learning rate");
        }
        dz[b][r] = sigmoid(z[r]) - targets[batch[b]][r];
      }
    }
    const double scale = config.learning_rate / config.batch_size;
    for (size_t b = 0; b < batch.size(); ++b) {
      const FeatureVector& fv = features[batch[b]];
      for (size_t r = 0; r < taxonomy.size(); ++r) {
        double* row = params.weights.data() + r * params.dim;
        for (const auto& [index, count] : fv.entries) {
          row[index] -= scale * dz[b][r] * count;
        }
        params.bias[r] -= scale * dz[b][r];
      }
    }
  }

  double total = 0.0;
  for (size_t i = 0; i < features.size(); ++i) {
    total += loss(params, features[i], targets[i]);
  }
  TrainResult result;
  result.final_loss = total / static_cast<double>(features.size());
  if (!std::isfinite(result.final_loss)) {
    throw std::runtime_error("train: non-finite final loss; lower the learning rate");
  }
  result.params = std::move(params);
  return result;
}

void save_model(const std::string& path, const ModelParams& params, uint64_t seed,
                long steps) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  nlohmann::json header = {{"format", "crowdrel-model"},
                           {"dim", params.dim},
                           {"relations", params.relations},
                           {"seed", seed},
                           {"steps", steps}};
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(params.weights.data()),
            static_cast<std::streamsize>(params.weights.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(params.bias.data()),
            static_cast<std::streamsize>(params.bias.size() * sizeof(double)));
  if (!out) throw DataError("write failed for " + path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw DataError(path + ": missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": malformed model header: " + e.what());
  }
  if (header.value("format", "") != "crowdrel-model") {
    throw DataError(path + ": not a model file");
  }
  LoadedModel loaded;
  loaded.params.dim = header.at("dim").get<uint32_t>();
  loaded.params.relations = header.at("relations").get<std::vector<std::string>>();
  loaded.seed = header.at("seed").get<uint64_t>();
  loaded.steps = header.at("steps").get<long>();
  size_t n_weights = loaded.params.relations.size() *
                     static_cast<size_t>(loaded.params.dim);
  loaded.params.weights.resize(n_weights);
  loaded.params.bias.resize(loaded.params.relations.size());
  in.read(reinterpret_cast<char*>(loaded.params.weights.data()),
          static_cast<std::streamsize>(n_weights * sizeof(double)));
  in.read(reinterpret_cast<char*>(loaded.params.bias.data()),
          static_cast<std::streamsize>(loaded.params.bias.size() * sizeof(double)));
  if (!in) throw DataError(path + ": truncated model file");
  return loaded;
}

PredictionSet predict_all(const ModelParams& params,
                          std::span<const Sentence> sentences) {
  PredictionSet predictions;
  predictions.relations = params.relations;
  predictions.rows.reserve(sentences.size());
  for (const auto& s : sentences) {
    predictions.rows.emplace_back(s.sentence_id, predict(params, s));
  }
  return predictions;
}

void save_predictions(const std::string& path, const PredictionSet& predictions) {
  std::vector<std::string> lines;
  lines.reserve(predictions.rows.size() + 1);
  nlohmann::json header = {{"record", "header"},
                           {"relations", predictions.relations}};
  lines.push_back(header.dump());
  for (const auto& [sentence_id, confidence] : predictions.rows) {
    nlohmann::json record = {{"sentence_id", sentence_id},
                             {"confidence", confidence}};
    lines.push_back(record.dump());
  }
  io::write_lines(path, lines);
}

PredictionSet load_predictions(const std::string& path) {
  PredictionSet predictions;
  bool have_header = false;
  io::for_each_jsonl_record(path, [&](size_t line, const nlohmann::json& record) {
    if (!have_header) {
      if (record.value("record", "") != "header") {
        throw DataError(path + ":" + std::to_string(line) + ": expected header");
      }
      predictions.relations =
          record.at("relations").get<std::vector<std::string>>();
      have_header = true;
      return;
    }
    auto confidence = record.at("confidence").get<std::vector<double>>();
    if (confidence.size() != predictions.relations.size()) {
      throw DataError(path + ":" + std::to_string(line) +
                      ": confidence length mismatch");
    }
    predictions.rows.emplace_back(record.at("sentence_id").get<std::string>(),
                                  std::move(confidence));
  });
  if (!have_header) throw DataError(path + ": missing header record");
  return predictions;
}

}  // namespace crowdrel
