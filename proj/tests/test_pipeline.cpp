#include <doctest.h>

#include <cmath>

#include "crowdrel/pipeline.hpp"
#include "crowdrel/presets.hpp"
#include "helpers.hpp"

using namespace crowdrel;

namespace {

PipelineConfig small_synthetic_pipeline(uint64_t seed) {
  PipelineConfig config;
  SynthConfig synth;
  synth.seed = seed;
  synth.num_sentences = 300;
  synth.num_workers_per_sentence = 9;
  synth.relations = {"a", "b", "c"};
  synth.base_rates = {{"a", 0.35}, {"b", 0.05}, {"c", 0.25}};
  synth.rules = {{"a", "b", 1.0}};
  synth.worker_reliability = 0.92;
  synth.causality_drop = 0.8;
  synth.fp_injection = {{"c", 0.5}};
  config.synth = synth;
  config.merge_spec.causal_pairs = {{"a", "b"}};
  config.fp_relations = {"c"};
  config.train.steps = 400;
  config.train.batch_size = 16;
  config.train.learning_rate = 0.5;
  config.train.dim = 1u << 14;
  config.train.seed = seed;
  return config;
}

}  // namespace

TEST_CASE("pipeline produces the four strategies in order with sane metrics") {
  PipelineResult result = run_pipeline(small_synthetic_pipeline(5));
  REQUIRE(result.strategies.size() == 4);
  CHECK(result.strategies[0].strategy == "ds");
  CHECK(result.strategies[1].strategy == "merged");
  CHECK(result.strategies[2].strategy == "rcp");
  CHECK(result.strategies[3].strategy == "fp");
  CHECK(result.train_count + result.test_count == 300);
  CHECK(result.test_count == 60);  // default 0.2 split
  for (const auto& outcome : result.strategies) {
    const Metrics& m = outcome.report.micro;
    CHECK(m.precision >= 0.0);
    CHECK(m.precision <= 1.0);
    CHECK(m.recall >= 0.0);
    CHECK(m.recall <= 1.0);
    CHECK(std::isfinite(outcome.final_train_loss));
    CHECK(outcome.report.relations == std::vector<std::string>{"a", "b", "c"});
  }
  // Baseline pass-through keeps the strategy tag.
  CHECK(result.strategies[0].labels.strategy == "ds");
}

TEST_CASE("pipeline is deterministic for a fixed seed") {
  PipelineResult a = run_pipeline(small_synthetic_pipeline(11));
  PipelineResult b = run_pipeline(small_synthetic_pipeline(11));
  REQUIRE(a.strategies.size() == b.strategies.size());
  for (size_t k = 0; k < a.strategies.size(); ++k) {
    CHECK(a.strategies[k].report.micro == b.strategies[k].report.micro);
    CHECK(a.strategies[k].final_train_loss == b.strategies[k].final_train_loss);
    CHECK(a.strategies[k].labels.labels == b.strategies[k].labels.labels);
  }
  CHECK(comparison_to_json(a) == comparison_to_json(b));
  CHECK(format_comparison_table(a) == format_comparison_table(b));
}

TEST_CASE("pipeline accepts preloaded corpora") {
  SynthOutput synth = generate(*small_synthetic_pipeline(3).synth);
  PipelineConfig config = small_synthetic_pipeline(3);
  config.synth.reset();
  config.corpus = synth.corpus;
  config.ds_labels = synth.ds_labels;
  PipelineResult from_files = run_pipeline(config);
  PipelineResult from_synth = run_pipeline(small_synthetic_pipeline(3));
  for (size_t k = 0; k < from_files.strategies.size(); ++k) {
    CHECK(from_files.strategies[k].report.micro ==
          from_synth.strategies[k].report.micro);
  }
}

TEST_CASE("pipeline defaults the fp strategy to every relation with a rate") {
  PipelineConfig config = small_synthetic_pipeline(9);
  config.fp_relations.clear();
  PipelineResult result = run_pipeline(config);
  const auto& fp_params = result.strategies[3].labels.parameters.at("fp_rates");
  for (const auto& [relation, entry] : result.fp_report.relations) {
    CHECK(fp_params.contains(relation) == entry.rate.has_value());
  }
}

TEST_CASE("pipeline rejects bad split fractions and foreign merge specs") {
  PipelineConfig config = small_synthetic_pipeline(1);
  config.test_fraction = 0.0;
  CHECK_THROWS_AS(run_pipeline(config), std::invalid_argument);

  config = small_synthetic_pipeline(1);
  config.merge_spec.causal_pairs = {{"a", "zzz"}};
  CHECK_THROWS_AS(run_pipeline(config), DataError);
}

TEST_CASE("presets are well-formed") {
  RelationTaxonomy taxonomy = preset_relations_taxonomy();
  CHECK(taxonomy.size() == 16);
  CHECK(taxonomy.contains("origin"));
  CHECK(taxonomy.contains("place_of_death"));
  CHECK_NOTHROW(validate_merge_spec(preset_merge_spec(), taxonomy));

  SynthConfig synth = preset_synthetic_config(7);
  RelationTaxonomy synth_taxonomy(synth.relations);
  for (const auto& rel : preset_fp_relations()) CHECK(synth_taxonomy.contains(rel));
  CHECK_NOTHROW(validate_merge_spec(preset_merge_spec(), synth_taxonomy));
  SynthOutput out = generate(preset_synthetic_config(7));
  CHECK(out.corpus.sentences.size() == 3000);
  CHECK_NOTHROW(validate_corpus(out.corpus));
}
