#include <doctest.h>

#include <cmath>
#include <random>

#include "crowdrel/classifier.hpp"
#include "crowdrel/evaluation.hpp"
#include "helpers.hpp"

using namespace crowdrel;
using testutil::sentence;

namespace {

ModelParams random_params(std::mt19937_64& rng, std::vector<std::string> relations,
                          uint32_t dim) {
  ModelParams params = ModelParams::zeros(std::move(relations), dim);
  auto uniform = [&] { return (rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  for (auto& w : params.weights) w = uniform();
  for (auto& b : params.bias) b = uniform();
  return params;
}

FeatureVector random_features(std::mt19937_64& rng, uint32_t dim) {
  FeatureVector fv;
  for (uint32_t f = 0; f < dim; ++f) {
    if (rng() % 2 == 0) fv.entries.push_back({f, 1 + static_cast<int>(rng() % 3)});
  }
  return fv;
}

std::vector<double> random_targets(std::mt19937_64& rng, size_t n) {
  std::vector<double> t(n);
  for (auto& v : t) v = (rng() >> 11) * 0x1.0p-53;
  return t;
}

// Central finite differences over every parameter coordinate.
Gradient numeric_gradient(const ModelParams& params, const FeatureVector& features,
                          std::span<const double> targets, double step) {
  Gradient grad;
  grad.weights.assign(params.weights.size(), 0.0);
  grad.bias.assign(params.bias.size(), 0.0);
  ModelParams probe = params;
  for (size_t k = 0; k < probe.weights.size(); ++k) {
    double saved = probe.weights[k];
    probe.weights[k] = saved + step;
    double up = loss(probe, features, targets);
    probe.weights[k] = saved - step;
    double down = loss(probe, features, targets);
    probe.weights[k] = saved;
    grad.weights[k] = (up - down) / (2.0 * step);
  }
  for (size_t k = 0; k < probe.bias.size(); ++k) {
    double saved = probe.bias[k];
    probe.bias[k] = saved + step;
    double up = loss(probe, features, targets);
    probe.bias[k] = saved - step;
    double down = loss(probe, features, targets);
    probe.bias[k] = saved;
    grad.bias[k] = (up - down) / (2.0 * step);
  }
  return grad;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

}  // namespace

TEST_CASE("featurize is deterministic and position-sensitive") {
  Sentence s = sentence("s1", "Rome welcomed Paris", "Rome", "Paris");
  FeatureVector a = featurize(s, 1u << 16);
  FeatureVector b = featurize(s, 1u << 16);
  CHECK(a == b);
  CHECK(!a.entries.empty());

  // Same unigram bag, swapped term roles: marker positions differ.
  Sentence swapped = sentence("s1", "Rome welcomed Paris", "Paris", "Rome");
  CHECK(featurize(swapped, 1u << 16) != a);

  // Same term strings at different positions also differ.
  Sentence moved = sentence("s2", "Paris welcomed Rome", "Rome", "Paris");
  CHECK(featurize(moved, 1u << 16) != a);
}

TEST_CASE("featurize: text with no tokens gives the empty vector") {
  Sentence s = sentence("s1", "!!! --- ???", "x", "y");
  CHECK(featurize(s, 1024).entries.empty());
}

TEST_CASE("featurize marks multi-word term occurrences") {
  Sentence with_term = sentence("s1", "the new york office opened", "new york", "x");
  Sentence without = sentence("s1", "the york new office opened", "new york", "x");
  // Same unigram bag; only the contiguous occurrence produces a marker.
  FeatureVector a = featurize(with_term, 1u << 16);
  FeatureVector b = featurize(without, 1u << 16);
  CHECK(a != b);
  int total_a = 0, total_b = 0;
  for (const auto& [index, count] : a.entries) total_a += count;
  for (const auto& [index, count] : b.entries) total_b += count;
  CHECK(total_a == total_b + 1);  // the term1 marker
}

TEST_CASE("featurize counts repeated tokens") {
  Sentence s = sentence("s1", "go go go", "go", "go");
  FeatureVector fv = featurize(s, 1u << 16);
  int total = 0;
  for (const auto& [index, count] : fv.entries) total += count;
  // 3 unigrams + 3 term1 markers + 3 term2 markers.
  CHECK(total == 9);
}

TEST_CASE("loss closed-form values") {
  ModelParams params = ModelParams::zeros({"r"}, 8);
  FeatureVector empty;

  // z = 0, t = 0.5 -> log 2.
  std::vector<double> half = {0.5};
  CHECK(loss(params, empty, half) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // t = 1 with strongly positive score: loss below 1e-8 at z = 20.
  params.bias[0] = 20.0;
  std::vector<double> one = {1.0};
  CHECK(loss(params, empty, one) < 1e-8);
  CHECK(loss(params, empty, one) > 0.0);

  // Monotone decrease toward the saturation limit.
  double previous = 1e9;
  for (double z : {0.0, 5.0, 10.0, 20.0, 40.0}) {
    params.bias[0] = z;
    double value = loss(params, empty, one);
    CHECK(value < previous);
    previous = value;
  }
}

TEST_CASE("loss is non-negative and rejects bad targets") {
  std::mt19937_64 rng(17);
  ModelParams params = random_params(rng, {"a", "b"}, 6);
  FeatureVector fv = random_features(rng, 6);
  std::vector<double> targets = random_targets(rng, 2);
  CHECK(loss(params, fv, targets) >= 0.0);
  std::vector<double> bad = {0.5, 1.5};
  CHECK_THROWS_AS(loss(params, fv, bad), std::invalid_argument);
  std::vector<double> short_targets = {0.5};
  CHECK_THROWS_AS(loss(params, fv, short_targets), std::invalid_argument);
}

TEST_CASE("gradient vanishes at t = sigmoid(z)") {
  std::mt19937_64 rng(23);
  ModelParams params = random_params(rng, {"a", "b", "c"}, 5);
  FeatureVector fv = random_features(rng, 5);
  std::vector<double> z = scores(params, fv);
  std::vector<double> targets(z.size());
  for (size_t r = 0; r < z.size(); ++r) targets[r] = 1.0 / (1.0 + std::exp(-z[r]));
  Gradient grad = gradient(params, fv, targets);
  for (double g : grad.weights) CHECK(std::abs(g) < 1e-12);
  for (double g : grad.bias) CHECK(std::abs(g) < 1e-12);
}

TEST_CASE("gradient is linear in feature counts") {
  std::mt19937_64 rng(29);
  ModelParams params = random_params(rng, {"a"}, 4);
  FeatureVector fv;
  fv.entries = {{1, 1}, {3, 2}};
  std::vector<double> targets = {0.3};

  std::vector<double> z = scores(params, fv);
  double dz = 1.0 / (1.0 + std::exp(-z[0])) - targets[0];
  Gradient grad = gradient(params, fv, targets);
  CHECK(grad.weights[1] == doctest::Approx(dz * 1).epsilon(1e-12));
  CHECK(grad.weights[3] == doctest::Approx(dz * 2).epsilon(1e-12));
  CHECK(grad.bias[0] == doctest::Approx(dz).epsilon(1e-12));
}

TEST_CASE("gradient matches central finite differences") {
  std::mt19937_64 rng(31337);
  for (int iteration = 0; iteration < 25; ++iteration) {
    uint32_t dim = 2 + static_cast<uint32_t>(rng() % 9);       // <= 10
    size_t n_rel = 1 + static_cast<size_t>(rng() % 4);         // <= 4
    std::vector<std::string> relations;
    for (size_t r = 0; r < n_rel; ++r) relations.push_back("r" + std::to_string(r));
    ModelParams params = random_params(rng, relations, dim);
    FeatureVector fv = random_features(rng, dim);
    std::vector<double> targets = random_targets(rng, n_rel);

    Gradient analytic = gradient(params, fv, targets);
    Gradient numeric = numeric_gradient(params, fv, targets, 1e-5);
    for (size_t k = 0; k < analytic.weights.size(); ++k) {
      CHECK(relative_error(analytic.weights[k], numeric.weights[k]) < 1e-6);
    }
    for (size_t k = 0; k < analytic.bias.size(); ++k) {
      CHECK(relative_error(analytic.bias[k], numeric.bias[k]) < 1e-6);
    }
  }
}

TEST_CASE("predict: zero params give 0.5 and outputs stay in (0,1)") {
  ModelParams params = ModelParams::zeros({"a", "b"}, 64);
  Sentence s = sentence("s1", "one two three", "one", "three");
  std::vector<double> confidence = predict(params, s);
  CHECK(confidence == std::vector<double>{0.5, 0.5});

  std::mt19937_64 rng(41);
  for (int iteration = 0; iteration < 20; ++iteration) {
    ModelParams noisy = random_params(rng, {"a", "b"}, 64);
    for (double c : predict(noisy, s)) {
      CHECK(c > 0.0);
      CHECK(c < 1.0);
    }
  }
}

TEST_CASE("prediction for a relation depends only on its own row") {
  std::mt19937_64 rng(43);
  ModelParams params = random_params(rng, {"a", "b"}, 32);
  Sentence s = sentence("s1", "alpha beta gamma", "alpha", "gamma");
  double before = predict(params, s)[0];

  for (uint32_t f = 0; f < params.dim; ++f) params.weights[1 * params.dim + f] += 3.0;
  params.bias[1] -= 2.0;
  CHECK(predict(params, s)[0] == before);
}

TEST_CASE("increasing a bias strictly increases that confidence") {
  std::mt19937_64 rng(47);
  Sentence s = sentence("s1", "alpha beta", "alpha", "beta");
  for (int iteration = 0; iteration < 30; ++iteration) {
    ModelParams params = random_params(rng, {"a", "b"}, 16);
    double before = predict(params, s)[1];
    params.bias[1] += 0.25;
    CHECK(predict(params, s)[1] > before);
  }
}

TEST_CASE("train: zero steps returns the all-zero initialization") {
  RelationTaxonomy taxonomy({"a"});
  std::vector<Sentence> sentences = {sentence("s1", "x y", "x", "y")};
  DsLabelSet labels;
  labels.set("s1", "a", 1.0);
  TrainConfig config;
  config.steps = 0;
  config.dim = 128;
  TrainResult result = train(sentences, taxonomy, labels, config);
  CHECK(result.params == ModelParams::zeros({"a"}, 128));
}

TEST_CASE("train: separable two-relation set reaches micro F1 = 1") {
  RelationTaxonomy taxonomy({"a", "b"});
  std::vector<Sentence> sentences;
  DsLabelSet labels;
  std::mt19937_64 rng(4242);
  for (int s = 0; s < 40; ++s) {
    std::string sid = "s" + std::to_string(s);
    bool is_a = s % 2 == 0;
    std::string text = is_a ? "alpha cue one" : "beta cue two";
    sentences.push_back(sentence(sid, text, "cue", "cue"));
    labels.set(sid, is_a ? "a" : "b", 1.0);
  }

  TrainConfig config;
  config.steps = 2000;
  config.batch_size = 8;
  config.learning_rate = 0.5;
  config.dim = 1u << 12;
  config.seed = 1;

  // Loss over the whole set decreases as training progresses.
  std::vector<double> checkpoints;
  for (long steps : {0L, 200L, 600L, 2000L}) {
    TrainConfig partial = config;
    partial.steps = steps;
    checkpoints.push_back(train(sentences, taxonomy, labels, partial).final_loss);
  }
  for (size_t k = 1; k < checkpoints.size(); ++k) {
    CHECK(checkpoints[k] < checkpoints[k - 1] + 1e-9);
  }

  TrainResult result = train(sentences, taxonomy, labels, config);
  PredictionSet predictions = predict_all(result.params, sentences);

  // Truth aggregates built directly from the labels.
  std::vector<SentenceAggregate> truth;
  for (const auto& s : sentences) {
    SentenceAggregate agg;
    agg.sentence_id = s.sentence_id;
    agg.worker_count = 1;
    agg.sentence_vector.assign(3, 0);
    agg.srs = {labels.get(s.sentence_id, "a"), labels.get(s.sentence_id, "b")};
    truth.push_back(std::move(agg));
  }
  EvalReport report = evaluate(predictions, AggregateSet({"a", "b"}, truth), 0.5, 0.5);
  CHECK(report.micro.f1 == 1.0);
}

TEST_CASE("train: same seed gives bit-identical params") {
  std::mt19937_64 rng(51);
  AnnotationCorpus corpus = testutil::random_corpus(rng, 10, 3, 4);
  DsLabelSet labels;
  for (const auto& s : corpus.sentences) {
    labels.set(s.sentence_id, corpus.taxonomy.relations()[0], 1.0);
  }
  TrainConfig config;
  config.steps = 50;
  config.dim = 256;
  config.seed = 99;
  TrainResult first = train(corpus.sentences, corpus.taxonomy, labels, config);
  TrainResult second = train(corpus.sentences, corpus.taxonomy, labels, config);
  CHECK(first.params == second.params);
  CHECK(first.final_loss == second.final_loss);
}

TEST_CASE("train aborts with a diagnostic when the scores diverge") {
  RelationTaxonomy taxonomy({"a"});
  std::vector<Sentence> sentences = {sentence("s1", "x x x", "x", "x")};
  DsLabelSet labels;  // target 0 everywhere, so the error never vanishes
  TrainConfig config;
  config.steps = 10;
  config.batch_size = 1;
  config.learning_rate = 1e308;  // one update overflows the shared weight
  config.dim = 64;
  CHECK_THROWS_WITH_AS(train(sentences, taxonomy, labels, config),
                       doctest::Contains("learning rate"), std::runtime_error);
}

TEST_CASE("model file round-trips bit-exactly") {
  std::mt19937_64 rng(53);
  ModelParams params = random_params(rng, {"a", "b", "c"}, 512);
  testutil::TempDir dir;
  save_model(dir.path("model.bin"), params, 1234, 777);
  LoadedModel loaded = load_model(dir.path("model.bin"));
  CHECK(loaded.params == params);
  CHECK(loaded.seed == 1234);
  CHECK(loaded.steps == 777);
}

TEST_CASE("predictions file round-trips") {
  std::mt19937_64 rng(59);
  ModelParams params = random_params(rng, {"a", "b"}, 128);
  std::vector<Sentence> sentences = {sentence("s1", "u v w", "u", "w"),
                                     sentence("s2", "p q r", "p", "r")};
  PredictionSet predictions = predict_all(params, sentences);
  testutil::TempDir dir;
  save_predictions(dir.path("pred.jsonl"), predictions);
  PredictionSet loaded = load_predictions(dir.path("pred.jsonl"));
  CHECK(loaded.relations == predictions.relations);
  CHECK(loaded.rows == predictions.rows);
}

TEST_CASE("end-to-end determinism: featurize, train, predict") {
  std::mt19937_64 rng(61);
  AnnotationCorpus corpus = testutil::random_corpus(rng, 12, 3, 5);
  DsLabelSet labels;
  for (const auto& s : corpus.sentences) {
    labels.set(s.sentence_id, corpus.taxonomy.relations()[0], 1.0);
  }
  TrainConfig config;
  config.steps = 40;
  config.dim = 512;
  config.seed = 7;
  PredictionSet a = predict_all(
      train(corpus.sentences, corpus.taxonomy, labels, config).params,
      corpus.sentences);
  PredictionSet b = predict_all(
      train(corpus.sentences, corpus.taxonomy, labels, config).params,
      corpus.sentences);
  CHECK(a.rows == b.rows);
}
