// crowdrel: aggregate crowdsourced relation judgments, measure distant
// supervision label quality, enhance training labels, and compare the
// resulting classifiers.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crowdrel/analysis.hpp"
#include "crowdrel/classifier.hpp"
#include "crowdrel/enhancement.hpp"
#include "crowdrel/evaluation.hpp"
#include "crowdrel/io.hpp"
#include "crowdrel/pipeline.hpp"
#include "crowdrel/presets.hpp"
#include "crowdrel/synth.hpp"

namespace fs = std::filesystem;
using namespace crowdrel;

namespace {

// Removes everything written so far unless the run commits, so a failed
// subcommand leaves no partial outputs behind.
class OutputGuard {
 public:
  ~OutputGuard() {
    if (committed_) return;
    for (const auto& path : paths_) {
      std::error_code ec;
      fs::remove(path, ec);
    }
  }

  std::string track(const std::string& path) {
    paths_.push_back(path);
    paths_.push_back(path + ".manifest.json");
    return path;
  }

  std::string track_plain(const std::string& path) {
    paths_.push_back(path);
    return path;
  }

  void commit() { committed_ = true; }

 private:
  std::vector<std::string> paths_;
  bool committed_ = false;
};

struct CommonOpts {
  std::string sentences;
  std::string judgments;
  std::string ds_labels;
  std::string taxonomy;
  std::string preset;
  std::string out;
  double threshold = 0.5;
  double spam_threshold = 0.5;
};

RelationTaxonomy resolve_taxonomy(const CommonOpts& opts) {
  if (!opts.taxonomy.empty()) return load_taxonomy(opts.taxonomy);
  if (opts.preset == "paper-relations") return preset_relations_taxonomy();
  if (!opts.preset.empty()) {
    throw DataError("unknown preset '" + opts.preset + "' (expected paper-relations)");
  }
  throw DataError("no taxonomy: pass --taxonomy FILE or --preset paper-relations");
}

// Corpus loading + spam filtering shared by the analysis subcommands.
AnnotationCorpus load_filtered(const CommonOpts& opts, WorkerQualityReport* report) {
  RelationTaxonomy taxonomy = resolve_taxonomy(opts);
  std::vector<std::string> warnings;
  AnnotationCorpus corpus =
      load_corpus(opts.sentences, opts.judgments, taxonomy, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  auto [filtered, worker_report] = filter_spam(corpus, opts.spam_threshold);
  if (report != nullptr) *report = worker_report;
  if (filtered.sentences.empty()) {
    throw DataError("spam filtering removed every sentence");
  }
  return filtered;
}

std::string sibling_path(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  return (p.parent_path() / (p.stem().string() + suffix + p.extension().string()))
      .string();
}

std::vector<std::string> split_csv(const std::string& value) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : value) {
    if (c == ',') {
      if (!current.empty()) parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) parts.push_back(current);
  return parts;
}

int cmd_aggregate(const CommonOpts& opts) {
  OutputGuard guard;
  WorkerQualityReport report;
  AnnotationCorpus filtered = load_filtered(opts, &report);
  AggregateSet aggregates = aggregate_corpus(filtered);

  nlohmann::json params = {{"spam_threshold", opts.spam_threshold},
                           {"srs_denominator", "post_spam_removal"}};
  save_aggregates(guard.track(opts.out), aggregates);
  io::write_manifest(opts.out, "aggregate", params, {opts.sentences, opts.judgments});
  std::string workers_path = sibling_path(opts.out, "_workers");
  save_worker_report(guard.track(workers_path), report);
  io::write_manifest(workers_path, "aggregate", params,
                     {opts.sentences, opts.judgments});
  guard.commit();
  std::cerr << "aggregated " << aggregates.sentences().size() << " sentences, "
            << report.workers.size() << " workers\n";
  return 0;
}

int cmd_fp_rate(const CommonOpts& opts) {
  OutputGuard guard;
  AnnotationCorpus filtered = load_filtered(opts, nullptr);
  AggregateSet aggregates = aggregate_corpus(filtered);
  DsLabelSet ds = load_ds_labels_raw(opts.ds_labels, &filtered.taxonomy);

  // Labels for sentences dropped by spam filtering cannot be assessed.
  DsLabelSet covered;
  for (const auto& [key, score] : ds.entries()) {
    if (aggregates.find(key.first) != nullptr) {
      covered.set(key.first, key.second, score);
    }
  }
  FpReport report = fp_rate(covered, aggregates, opts.threshold);
  save_fp_report(guard.track(opts.out), report);
  io::write_manifest(opts.out, "fp-rate",
                     {{"threshold", opts.threshold},
                      {"spam_threshold", opts.spam_threshold}},
                     {opts.sentences, opts.judgments, opts.ds_labels});
  guard.commit();
  return 0;
}

int cmd_rcp(const CommonOpts& opts, const std::string& mode) {
  OutputGuard guard;
  AnnotationCorpus filtered = load_filtered(opts, nullptr);
  RcpMatrix matrix;
  if (mode == "macro") {
    matrix = rcp_matrix_macro(aggregate_corpus(filtered), opts.threshold);
  } else if (mode == "micro") {
    matrix = rcp_matrix_micro(filtered);
  } else {
    throw DataError("unknown mode '" + mode + "' (expected macro or micro)");
  }
  save_rcp_matrix(guard.track(opts.out), matrix);
  io::write_manifest(opts.out, "rcp",
                     {{"mode", mode},
                      {"threshold", opts.threshold},
                      {"spam_threshold", opts.spam_threshold}},
                     {opts.sentences, opts.judgments});
  guard.commit();
  return 0;
}

int cmd_enhance(const CommonOpts& opts, const std::string& strategy,
                const std::string& merge_spec_path, const std::string& rcp_path,
                const std::string& fp_report_path, const std::string& fp_relations) {
  OutputGuard guard;
  std::vector<std::string> inputs = {opts.ds_labels};

  EnhancedLabels enhanced;
  if (strategy == "ds") {
    enhanced = enhance_ds(load_ds_labels_raw(opts.ds_labels));
  } else if (strategy == "merged") {
    RelationTaxonomy taxonomy = resolve_taxonomy(opts);
    MergeSpec spec;
    if (!merge_spec_path.empty()) {
      spec = load_merge_spec(merge_spec_path);
      inputs.push_back(merge_spec_path);
    } else if (opts.preset == "paper-relations") {
      spec = preset_merge_spec();
    } else {
      throw DataError("merged strategy needs --merge-spec");
    }
    validate_merge_spec(spec, taxonomy);
    enhanced = enhance_merged(load_ds_labels_raw(opts.ds_labels, &taxonomy), spec);
  } else if (strategy == "rcp") {
    if (rcp_path.empty()) throw DataError("rcp strategy needs --rcp-matrix");
    RcpMatrix matrix = load_rcp_matrix(rcp_path);
    inputs.push_back(rcp_path);
    enhanced = enhance_rcp(load_ds_labels_raw(opts.ds_labels), matrix);
  } else if (strategy == "fp") {
    if (fp_report_path.empty()) throw DataError("fp strategy needs --fp-report");
    FpReport report = load_fp_report(fp_report_path);
    inputs.push_back(fp_report_path);
    std::vector<std::string> selected = split_csv(fp_relations);
    if (selected.empty()) {
      for (const auto& [relation, entry] : report.relations) {
        if (entry.rate) selected.push_back(relation);
      }
    }
    enhanced = enhance_fp(load_ds_labels_raw(opts.ds_labels), report,
                          std::set<std::string>(selected.begin(), selected.end()));
  } else {
    throw DataError("unknown strategy '" + strategy +
                    "' (expected ds, merged, rcp or fp)");
  }

  save_ds_labels(guard.track(opts.out), enhanced.labels);
  io::write_manifest(opts.out, "enhance",
                     {{"strategy", enhanced.strategy},
                      {"strategy_parameters", enhanced.parameters}},
                     inputs);
  guard.commit();
  return 0;
}

int cmd_train(const CommonOpts& opts, const TrainConfig& config) {
  OutputGuard guard;
  RelationTaxonomy taxonomy = resolve_taxonomy(opts);
  std::vector<Sentence> sentences = load_sentences(opts.sentences);
  DsLabelSet labels = load_ds_labels_raw(opts.ds_labels, &taxonomy);

  TrainResult result = train(sentences, taxonomy, labels, config);
  save_model(guard.track(opts.out), result.params, config.seed, config.steps);
  io::write_manifest(opts.out, "train",
                     {{"steps", config.steps},
                      {"batch_size", config.batch_size},
                      {"learning_rate", config.learning_rate},
                      {"seed", config.seed},
                      {"dim", config.dim}},
                     {opts.sentences, opts.ds_labels});
  guard.commit();
  std::cerr << "final training loss " << result.final_loss << "\n";
  return 0;
}

int cmd_predict(const CommonOpts& opts, const std::string& model_path) {
  OutputGuard guard;
  LoadedModel model = load_model(model_path);
  std::vector<Sentence> sentences = load_sentences(opts.sentences);
  PredictionSet predictions = predict_all(model.params, sentences);
  save_predictions(guard.track(opts.out), predictions);
  io::write_manifest(opts.out, "predict", nlohmann::json::object(),
                     {model_path, opts.sentences});
  guard.commit();
  return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& predictions_path,
             double truth_threshold) {
  OutputGuard guard;
  AnnotationCorpus filtered = load_filtered(opts, nullptr);
  AggregateSet aggregates = aggregate_corpus(filtered);
  PredictionSet predictions = load_predictions(predictions_path);
  EvalReport report = evaluate(predictions, aggregates, opts.threshold,
                               truth_threshold);
  save_eval_report(guard.track(opts.out), report);
  io::write_manifest(opts.out, "eval",
                     {{"pred_threshold", opts.threshold},
                      {"truth_threshold", truth_threshold},
                      {"spam_threshold", opts.spam_threshold}},
                     {predictions_path, opts.sentences, opts.judgments});
  guard.commit();
  std::cout << format_eval_table(report);
  return 0;
}

int cmd_synth(const CommonOpts& opts, const std::string& config_path,
              uint64_t seed, bool seed_given) {
  OutputGuard guard;
  SynthConfig config;
  if (!config_path.empty()) {
    config = load_synth_config(config_path);
    if (seed_given) config.seed = seed;
  } else if (opts.preset == "paper-synthetic") {
    config = preset_synthetic_config(seed);
  } else {
    throw DataError("synth needs --synth-config FILE or --preset paper-synthetic");
  }

  SynthOutput output = generate(config);
  fs::create_directories(opts.out);
  fs::path dir(opts.out);
  save_sentences(guard.track_plain((dir / "sentences.jsonl").string()),
                 output.corpus.sentences);
  save_judgments(guard.track_plain((dir / "judgments.jsonl").string()),
                 output.corpus.judgments);
  save_ds_labels(guard.track_plain((dir / "ds_labels.jsonl").string()),
                 output.ds_labels);
  save_ds_labels(guard.track_plain((dir / "true_labels.jsonl").string()),
                 output.true_labels);
  save_taxonomy(guard.track_plain((dir / "taxonomy.json").string()),
                output.corpus.taxonomy);
  io::write_manifest((dir / "synth").string(), "synth",
                     {{"config", synth_config_to_json(config)},
                      {"spam_workers", output.spam_workers}},
                     {});
  guard.track_plain((dir / "synth.manifest.json").string());
  guard.commit();
  std::cerr << "generated " << output.corpus.sentences.size() << " sentences, "
            << output.corpus.judgments.size() << " judgments\n";
  return 0;
}

int cmd_pipeline(const CommonOpts& opts, const std::string& merge_spec_path,
                 const std::string& fp_relations, uint64_t seed,
                 const TrainConfig& train_config, double test_fraction) {
  OutputGuard guard;
  PipelineConfig config;
  config.threshold = opts.threshold;
  config.spam_threshold = opts.spam_threshold;
  config.test_fraction = test_fraction;
  config.train = train_config;
  config.train.seed = seed;

  std::vector<std::string> inputs;
  if (opts.preset == "paper-synthetic") {
    config.synth = preset_synthetic_config(seed);
    config.merge_spec = preset_merge_spec();
    config.fp_relations = preset_fp_relations();
  } else if (!opts.preset.empty() && opts.preset != "paper-relations") {
    throw DataError("unknown preset '" + opts.preset + "'");
  } else {
    RelationTaxonomy taxonomy = resolve_taxonomy(opts);
    std::vector<std::string> warnings;
    config.corpus = load_corpus(opts.sentences, opts.judgments, taxonomy, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    config.ds_labels = load_ds_labels_raw(opts.ds_labels, &taxonomy);
    inputs = {opts.sentences, opts.judgments, opts.ds_labels};
    if (opts.preset == "paper-relations") {
      config.merge_spec = preset_merge_spec();
      config.fp_relations = preset_fp_relations();
    }
  }
  if (!merge_spec_path.empty()) {
    config.merge_spec = load_merge_spec(merge_spec_path);
    inputs.push_back(merge_spec_path);
  }
  if (!fp_relations.empty()) config.fp_relations = split_csv(fp_relations);

  PipelineResult result = run_pipeline(config);

  fs::create_directories(opts.out);
  fs::path dir(opts.out);
  std::string table = format_comparison_table(result);
  io::write_text(guard.track_plain((dir / "comparison.txt").string()), table);
  io::write_text(guard.track_plain((dir / "comparison.json").string()),
                 comparison_to_json(result).dump(2) + "\n");
  save_fp_report(guard.track_plain((dir / "fp_report.jsonl").string()),
                 result.fp_report);
  save_rcp_matrix(guard.track_plain((dir / "rcp_matrix.json").string()),
                  result.rcp_matrix);
  save_worker_report(guard.track_plain((dir / "workers.jsonl").string()),
                     result.worker_report);
  for (const auto& outcome : result.strategies) {
    save_ds_labels(
        guard.track_plain((dir / ("labels_" + outcome.strategy + ".jsonl")).string()),
        outcome.labels.labels);
    save_eval_report(
        guard.track_plain((dir / ("eval_" + outcome.strategy + ".json")).string()),
        outcome.report);
  }
  nlohmann::json params = {{"threshold", opts.threshold},
                           {"spam_threshold", opts.spam_threshold},
                           {"test_fraction", test_fraction},
                           {"seed", seed},
                           {"steps", train_config.steps},
                           {"batch_size", train_config.batch_size},
                           {"learning_rate", train_config.learning_rate},
                           {"dim", train_config.dim}};
  if (config.synth) params["synth"] = synth_config_to_json(*config.synth);
  io::write_manifest((dir / "pipeline").string(), "pipeline", params, inputs);
  guard.track_plain((dir / "pipeline.manifest.json").string());
  guard.commit();
  std::cout << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowd-informed relation label toolkit"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  CommonOpts opts;
  TrainConfig train_config;
  std::string mode = "macro";
  std::string strategy;
  std::string merge_spec_path;
  std::string rcp_path;
  std::string fp_report_path;
  std::string fp_relations;
  std::string model_path;
  std::string predictions_path;
  std::string synth_config_path;
  uint64_t seed = 0;
  double truth_threshold = 0.5;
  double test_fraction = 0.2;

  auto add_common = [&](CLI::App* cmd, bool needs_corpus) {
    if (needs_corpus) {
      cmd->add_option("--sentences", opts.sentences, "sentences JSONL file");
      cmd->add_option("--judgments", opts.judgments, "judgments JSONL file");
    }
    cmd->add_option("--taxonomy", opts.taxonomy, "taxonomy JSON file");
    cmd->add_option("--preset", opts.preset, "named preset");
    cmd->add_option("--out", opts.out, "output path")->required();
    return cmd;
  };

  auto* aggregate = add_common(app.add_subcommand("aggregate",
                                                  "corpus -> aggregates + worker report"),
                               true);
  aggregate->add_option("--spam-threshold", opts.spam_threshold,
                        "worker quality cutoff (0 disables filtering)");

  auto* fp = add_common(app.add_subcommand("fp-rate",
                                           "per-relation DS false-positive rates"),
                        true);
  fp->add_option("--ds-labels", opts.ds_labels, "DS labels JSONL file")->required();
  fp->add_option("--threshold", opts.threshold, "crowd truth threshold");
  fp->add_option("--spam-threshold", opts.spam_threshold, "worker quality cutoff");

  auto* rcp_cmd = add_common(app.add_subcommand("rcp", "relation causal power matrix"),
                             true);
  rcp_cmd->add_option("--mode", mode, "macro or micro");
  rcp_cmd->add_option("--threshold", opts.threshold, "macro presence threshold");
  rcp_cmd->add_option("--spam-threshold", opts.spam_threshold, "worker quality cutoff");

  auto* enhance = add_common(app.add_subcommand("enhance", "transform DS labels"),
                             false);
  enhance->add_option("--strategy", strategy, "ds, merged, rcp or fp")->required();
  enhance->add_option("--ds-labels", opts.ds_labels, "DS labels JSONL file")
      ->required();
  enhance->add_option("--merge-spec", merge_spec_path, "merge spec JSON file");
  enhance->add_option("--rcp-matrix", rcp_path, "RCP matrix JSON file");
  enhance->add_option("--fp-report", fp_report_path, "FP report JSONL file");
  enhance->add_option("--fp-relations", fp_relations,
                      "comma-separated relations for the fp strategy");

  auto* train_cmd = add_common(app.add_subcommand("train", "train the classifier"),
                               false);
  train_cmd->add_option("--sentences", opts.sentences, "sentences JSONL file")
      ->required();
  train_cmd->add_option("--ds-labels", opts.ds_labels, "training labels JSONL file")
      ->required();
  train_cmd->add_option("--steps", train_config.steps, "gradient steps");
  train_cmd->add_option("--batch-size", train_config.batch_size, "batch size");
  train_cmd->add_option("--learning-rate", train_config.learning_rate,
                        "learning rate");
  train_cmd->add_option("--seed", train_config.seed, "random seed");
  train_cmd->add_option("--dim", train_config.dim, "feature hash dimension");

  auto* predict_cmd = add_common(app.add_subcommand("predict",
                                                    "per-sentence confidences"),
                                 false);
  predict_cmd->add_option("--model", model_path, "model file")->required();
  predict_cmd->add_option("--sentences", opts.sentences, "sentences JSONL file")
      ->required();

  auto* eval_cmd = add_common(app.add_subcommand("eval",
                                                 "precision/recall/F1 against crowd truth"),
                              true);
  eval_cmd->add_option("--predictions", predictions_path, "predictions JSONL file")
      ->required();
  eval_cmd->add_option("--threshold", opts.threshold, "prediction threshold");
  eval_cmd->add_option("--truth-threshold", truth_threshold, "crowd truth threshold");
  eval_cmd->add_option("--spam-threshold", opts.spam_threshold, "worker quality cutoff");

  auto* synth_cmd = add_common(app.add_subcommand("synth", "generate a synthetic corpus"),
                               false);
  synth_cmd->add_option("--synth-config", synth_config_path, "generator JSON config");
  synth_cmd->add_option("--seed", seed, "random seed");

  auto* pipeline_cmd = add_common(app.add_subcommand("pipeline",
                                                     "strategy comparison end to end"),
                                  true);
  pipeline_cmd->add_option("--ds-labels", opts.ds_labels, "DS labels JSONL file");
  pipeline_cmd->add_option("--merge-spec", merge_spec_path, "merge spec JSON file");
  pipeline_cmd->add_option("--fp-relations", fp_relations,
                           "comma-separated relations for the fp strategy");
  pipeline_cmd->add_option("--threshold", opts.threshold, "decision threshold");
  pipeline_cmd->add_option("--spam-threshold", opts.spam_threshold,
                           "worker quality cutoff");
  pipeline_cmd->add_option("--seed", seed, "random seed");
  pipeline_cmd->add_option("--steps", train_config.steps, "gradient steps");
  pipeline_cmd->add_option("--batch-size", train_config.batch_size, "batch size");
  pipeline_cmd->add_option("--learning-rate", train_config.learning_rate,
                           "learning rate");
  pipeline_cmd->add_option("--dim", train_config.dim, "feature hash dimension");

  CLI11_PARSE(app, argc, argv);

  try {
    if (aggregate->parsed()) return cmd_aggregate(opts);
    if (fp->parsed()) return cmd_fp_rate(opts);
    if (rcp_cmd->parsed()) return cmd_rcp(opts, mode);
    if (enhance->parsed()) {
      return cmd_enhance(opts, strategy, merge_spec_path, rcp_path, fp_report_path,
                         fp_relations);
    }
    if (train_cmd->parsed()) return cmd_train(opts, train_config);
    if (predict_cmd->parsed()) return cmd_predict(opts, model_path);
    if (eval_cmd->parsed()) return cmd_eval(opts, predictions_path, truth_threshold);
    if (synth_cmd->parsed()) {
      return cmd_synth(opts, synth_config_path, seed,
                       synth_cmd->count("--seed") > 0);
    }
    if (pipeline_cmd->parsed()) {
      return cmd_pipeline(opts, merge_spec_path, fp_relations, seed, train_config,
                          test_fraction);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
