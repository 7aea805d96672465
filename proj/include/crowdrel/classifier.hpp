#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crowdrel/corpus.hpp"

namespace crowdrel {

// Sparse hashed bag of tokens: (bucket index, count), sorted by index.
struct FeatureVector {
  std::vector<std::pair<uint32_t, int>> entries;

  bool operator==(const FeatureVector&) const = default;
};

// Lowercase unigrams of the sentence text plus positional marker tokens for
// each occurrence of term1/term2, hashed into `dim` buckets. Deterministic.
FeatureVector featurize(const Sentence& sentence, uint32_t dim);

struct ModelParams {
  uint32_t dim = 0;
  std::vector<std::string> relations;
  std::vector<double> weights;  // relations.size() x dim, row-major
  std::vector<double> bias;     // one per relation

  size_t relation_count() const { return relations.size(); }
  double weight(size_t relation, uint32_t feature) const {
    return weights[relation * dim + feature];
  }

  static ModelParams zeros(std::vector<std::string> relations, uint32_t dim);

  bool operator==(const ModelParams&) const = default;
};

// Linear scores z_r = W_r . x + b_r.
std::vector<double> scores(const ModelParams& params, const FeatureVector& features);

// Componentwise sigmoid of the scores; always in (0,1).
std::vector<double> predict_features(const ModelParams& params,
                                     const FeatureVector& features);
std::vector<double> predict(const ModelParams& params, const Sentence& sentence);

// Sigmoid cross-entropy summed over relations, computed in the softplus form
// so saturated scores never feed log(0).
double loss(const ModelParams& params, const FeatureVector& features,
            std::span<const double> targets);

struct Gradient {
  std::vector<double> weights;  // dense, same shape as ModelParams::weights
  std::vector<double> bias;
};

Gradient gradient(const ModelParams& params, const FeatureVector& features,
                  std::span<const double> targets);

struct TrainConfig {
  long steps = 20000;
  int batch_size = 32;
  double learning_rate = 0.1;
  uint64_t seed = 0;
  uint32_t dim = 1u << 18;
};

struct TrainResult {
  ModelParams params;
  double final_loss = 0.0;  // mean per-sentence loss over the training set
};

// Mini-batch gradient descent from all-zero weights. Batches are drawn from a
// generator seeded by config.seed, so equal seeds give bit-identical params.
// Throws on non-finite scores or weights (learning-rate divergence).
TrainResult train(std::span<const Sentence> sentences,
                  const RelationTaxonomy& taxonomy, const DsLabelSet& labels,
                  const TrainConfig& config);

void save_model(const std::string& path, const ModelParams& params, uint64_t seed,
                long steps);

struct LoadedModel {
  ModelParams params;
  uint64_t seed = 0;
  long steps = 0;
};

LoadedModel load_model(const std::string& path);

// Per-sentence confidence vectors, in input sentence order.
struct PredictionSet {
  std::vector<std::string> relations;
  std::vector<std::pair<std::string, std::vector<double>>> rows;
};

PredictionSet predict_all(const ModelParams& params,
                          std::span<const Sentence> sentences);

void save_predictions(const std::string& path, const PredictionSet& predictions);
PredictionSet load_predictions(const std::string& path);

}  // namespace crowdrel
