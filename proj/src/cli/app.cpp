#include "storynet/cli.hpp"

#include <cstdlib>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "storynet/conllu.hpp"
#include "storynet/corpus.hpp"
#include "storynet/csv.hpp"
#include "storynet/emotions.hpp"
#include "storynet/explain.hpp"
#include "storynet/manifest.hpp"
#include "storynet/pipeline.hpp"

#ifndef STORYNET_DEFAULT_DATA_DIR
#define STORYNET_DEFAULT_DATA_DIR "data"
#endif

namespace storynet {

namespace {

using cli::fs::path;

// TOML config files, plus manifest.json files: each recorded command's
// "config" object becomes that subcommand's section.
class ManifestOrToml : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    input >> std::ws;
    if (input.peek() != '{') return CLI::ConfigTOML::from_config(input);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(input);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config JSON: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    if (!j.contains("commands") || !j["commands"].is_object()) return items;
    for (const auto& [cmd, entry] : j["commands"].items()) {
      if (!entry.contains("config") || !entry["config"].is_object()) continue;
      for (const auto& [key, value] : entry["config"].items()) {
        CLI::ConfigItem item;
        item.parents = {cmd};
        item.name = key;
        item.inputs = {value.is_string() ? value.get<std::string>() : value.dump()};
        items.push_back(std::move(item));
      }
    }
    return items;
  }
};

path default_resource(const char* file) {
  const char* env = std::getenv("STORYNET_DATA_DIR");
  return path(env && *env ? env : STORYNET_DEFAULT_DATA_DIR) / file;
}

void add_corpus_options(CLI::App* sub, path& corpus, std::string& format, int& required, bool corpus_required) {
  auto* opt = sub->add_option("--corpus", corpus, "Story corpus (CSV or JSON)");
  if (corpus_required) opt->required();
  sub->add_option("--format", format, "Corpus format")->check(CLI::IsMember({"auto", "csv", "json"}));
  sub->add_option("--required-raters", required, "Keep stories with at least this many raters (0 keeps all)")
      ->check(CLI::NonNegativeNumber);
}

void add_model_options(CLI::App* sub, cli::ModelOptions& m) {
  sub->add_option("--features", m.features, "Feature matrix CSV (scaled)")->required();
  add_corpus_options(sub, m.corpus, m.format, m.required_raters, true);
  sub->add_option("--scheme", m.scheme, "Rating-to-class binning")
      ->check(CLI::IsMember({"human-scale", "compressed-top"}));
  sub->add_option("--label-mode", m.label_mode, "One row per rating (stacked) or per story (mean)")
      ->check(CLI::IsMember({"stacked", "mean"}));
  sub->add_option("--model", m.model, "Classifier")
      ->check(CLI::IsMember({"gbt", "xgboost", "decision-tree", "tree", "random-forest", "forest"}));
  sub->add_option("--rounds", m.rounds, "Boosting rounds")->check(CLI::PositiveNumber);
  sub->add_option("--max-depth", m.max_depth, "Boosted tree depth")->check(CLI::PositiveNumber);
  sub->add_option("--learning-rate", m.learning_rate, "Shrinkage")->check(CLI::Range(1e-6, 1.0));
  sub->add_option("--lambda", m.lambda, "L2 leaf regularisation")->check(CLI::NonNegativeNumber);
  sub->add_option("--min-child-weight", m.min_child_weight, "Minimum hessian per leaf")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--tree-max-depth", m.tree_max_depth, "Decision tree depth")->check(CLI::PositiveNumber);
  sub->add_option("--min-samples-leaf", m.min_samples_leaf, "CART minimum leaf size")->check(CLI::PositiveNumber);
  sub->add_option("--forest-trees", m.forest_trees, "Random forest size")->check(CLI::PositiveNumber);
  sub->add_option("--forest-max-depth", m.forest_max_depth, "Random forest tree depth")->check(CLI::PositiveNumber);
  sub->add_option("--max-features", m.max_features, "Features per split (0 all, -1 sqrt)")->check(CLI::Range(-1, 1000));
  sub->add_option("--seed", m.seed, "Model seed");
}

void add_endpoint_options(CLI::App* sub, cli::EndpointOptions& e) {
  sub->add_option("--endpoint", e.endpoint, "Chat-completions URL");
  sub->add_option("--llm-model", e.model_name, "Model name sent in requests");
  sub->add_option("--temperature", e.temperature, "Sampling temperature (omitted when unset)");
  sub->add_option("--api-key-env", e.api_key_env, "Environment variable holding the API key");
  sub->add_option("--max-retries", e.max_retries, "Retries per request")->check(CLI::NonNegativeNumber);
  sub->add_option("--timeout", e.timeout, "Request timeout in seconds")->check(CLI::PositiveNumber);
  sub->add_option("--max-in-flight", e.max_in_flight, "Concurrent requests")->check(CLI::PositiveNumber);
  sub->add_option("--backoff", e.backoff, "Initial retry backoff in seconds")->check(CLI::NonNegativeNumber);
  sub->add_option("--llm-seed", e.seed, "Seed for prompt order");
}

nlohmann::json recorded_config(const CLI::App* sub) {
  nlohmann::json cfg = nlohmann::json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || opt->get_lnames().empty()) continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      value = res.empty() ? "true" : res.back();
    } else {
      value = opt->get_default_str();
    }
    if (!value.empty()) cfg[name] = value;
  }
  return cfg;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Story creativity toolkit: semantic/emotional networks, classifiers and explanations",
               "storynet"};
  app.set_version_flag("--version", std::string("storynet ") + STORYNET_VERSION);
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<ManifestOrToml>());
  app.set_config("--config", "", "TOML file with [command] sections, or a manifest.json to replay");
  path out = "storynet-out";
  app.add_option("-o,--out", out, "Output directory");

  std::string command;
  std::function<cli::CommandResult()> action;
  auto bind = [&](CLI::App* sub, std::function<cli::CommandResult()> fn) {
    sub->callback([&command, &action, sub, fn] {
      command = sub->get_name();
      action = fn;
    });
  };

  cli::IngestOptions ingest;
  auto* s_ingest = app.add_subcommand("ingest", "Validate a corpus and drop incompletely rated stories");
  add_corpus_options(s_ingest, ingest.corpus, ingest.format, ingest.required_raters, true);
  bind(s_ingest, [&] { return cli::run_ingest(ingest, out); });

  cli::FeaturizeOptions feat;
  feat.lexicon = default_resource("emolex_en.tsv");
  feat.antonyms = default_resource("antonyms_en.tsv");
  feat.stoplist = default_resource("stoplist_en.txt");
  auto* s_feat = app.add_subcommand("featurize", "Build TFMNs and the 13 network/emotion features");
  add_corpus_options(s_feat, feat.corpus, feat.format, feat.required_raters, true);
  s_feat->add_option("--conllu-dir", feat.conllu_dir, "Directory of <story_id>.conllu parses")->required();
  s_feat->add_option("--lexicon", feat.lexicon, "Emotion lexicon TSV");
  s_feat->add_option("--antonyms", feat.antonyms, "Antonym TSV");
  s_feat->add_option("--stoplist", feat.stoplist, "Stop-word list");
  s_feat->add_option("--max-tree-distance", feat.max_tree_distance, "Syntactic distance threshold")
      ->check(CLI::PositiveNumber);
  s_feat->add_option("--null-model", feat.null_model, "Emotion z-score null")
      ->check(CLI::IsMember({"analytic", "monte-carlo"}));
  s_feat->add_option("--mc-samples", feat.mc_samples, "Monte Carlo resamples")->check(CLI::Range(100, 10000000));
  s_feat->add_option("--null-size", feat.null_size, "Null draw count")
      ->check(CLI::IsMember({"lexicon-tokens", "content-tokens"}));
  s_feat->add_option("--component-mode", feat.component_mode, "ASPL/diameter scope")
      ->check(CLI::IsMember({"largest", "mean"}));
  s_feat->add_option("--degree-mode", feat.degree_mode, "Degree centrality normalisation")
      ->check(CLI::IsMember({"normalized", "raw"}));
  s_feat->add_option("--pagerank-mode", feat.pagerank_mode, "PageRank aggregation")
      ->check(CLI::IsMember({"mean", "max", "std"}));
  s_feat->add_option("--damping", feat.damping, "PageRank damping")->check(CLI::Range(0.0, 1.0));
  s_feat->add_option("--pagerank-tol", feat.pagerank_tol, "PageRank L1 tolerance")->check(CLI::PositiveNumber);
  s_feat->add_option("--pagerank-max-iter", feat.pagerank_max_iter, "PageRank iteration cap")
      ->check(CLI::PositiveNumber);
  s_feat->add_option("--seed", feat.seed, "Run seed");
  s_feat->add_option("--scaling-params", feat.scaling_params, "Apply these min/max params instead of fitting");
  s_feat->add_option("--export-networks", feat.export_networks, "Write per-story edge and node tables");
  s_feat->add_option("-j,--jobs", feat.jobs, "Worker threads")->check(CLI::PositiveNumber);
  bind(s_feat, [&] { return cli::run_featurize(feat, out); });

  cli::CompareOptions cmp;
  auto* s_cmp = app.add_subcommand("compare", "Mann-Whitney comparison of two feature matrices");
  s_cmp->add_option("--a", cmp.a, "First feature matrix (raw)")->required();
  s_cmp->add_option("--b", cmp.b, "Second feature matrix (raw)")->required();
  s_cmp->add_option("--label-a", cmp.label_a, "Label of the first group");
  s_cmp->add_option("--label-b", cmp.label_b, "Label of the second group");
  s_cmp->add_option("--scaling", cmp.scaling, "Scaling before testing")->check(CLI::IsMember({"pooled", "none"}));
  s_cmp->add_option("--corpus-a", cmp.corpus_a, "Corpus of group a, adds a story-length row");
  s_cmp->add_option("--corpus-b", cmp.corpus_b, "Corpus of group b");
  bind(s_cmp, [&] { return cli::run_compare(cmp, out); });

  cli::TrainOptions train;
  auto* s_train = app.add_subcommand("train", "Fit a classifier on the full dataset");
  add_model_options(s_train, train.model);
  s_train->add_option("--name", train.name, "Model file stem under models/");
  bind(s_train, [&] { return cli::run_train(train, out); });

  cli::EvaluateOptions eval;
  auto* s_eval = app.add_subcommand("evaluate", "Stratified k-fold cross-validation");
  add_model_options(s_eval, eval.model);
  s_eval->add_option("--folds", eval.folds, "Number of folds")->check(CLI::Range(2, 1000));
  s_eval->add_option("--cv-seed", eval.cv_seed, "Fold assignment seed");
  s_eval->add_option("--title", eval.title, "Report title");
  bind(s_eval, [&] { return cli::run_evaluate(eval, out); });

  cli::ExplainOptions expl;
  auto* s_expl = app.add_subcommand("explain", "TreeSHAP attributions of a boosted model");
  s_expl->add_option("--model", expl.model, "Model JSON written by train")->required();
  s_expl->add_option("--features", expl.features, "Feature matrix CSV")->required();
  s_expl->add_option("--scope", expl.scope, "Explain the full matrix or out-of-fold rows")
      ->check(CLI::IsMember({"full", "per-fold"}));
  add_corpus_options(s_expl, expl.corpus, expl.format, expl.required_raters, false);
  s_expl->add_option("--scheme", expl.scheme, "Rating-to-class binning (per-fold)")
      ->check(CLI::IsMember({"human-scale", "compressed-top"}));
  s_expl->add_option("--label-mode", expl.label_mode, "Row layout (per-fold)")->check(CLI::IsMember({"stacked", "mean"}));
  s_expl->add_option("--folds", expl.folds, "Folds (per-fold)")->check(CLI::Range(2, 1000));
  s_expl->add_option("--cv-seed", expl.cv_seed, "Fold seed (per-fold)");
  bind(s_expl, [&] {
    if (expl.scope == "per-fold" && expl.corpus.empty()) throw InputError("--scope per-fold needs --corpus");
    return cli::run_explain(expl, out);
  });

  cli::RateOptions rate;
  auto* s_rate = app.add_subcommand("rate", "Rate stories with LLM judges");
  s_rate->add_option("--corpus", rate.corpus, "Story corpus (CSV or JSON)")->required();
  s_rate->add_option("--format", rate.format, "Corpus format")->check(CLI::IsMember({"auto", "csv", "json"}));
  add_endpoint_options(s_rate, rate.endpoint);
  s_rate->add_option("--judges", rate.judges, "Independent judges per story")->check(CLI::PositiveNumber);
  s_rate->add_flag("--keep-existing-ratings", rate.keep_existing, "Append to existing ratings");
  bind(s_rate, [&] { return cli::run_rate(rate, out); });

  cli::GenerateOptions gen;
  auto* s_gen = app.add_subcommand("generate", "Generate stories from three-word prompts");
  s_gen->add_option("--prompts", gen.prompts, "CSV with prompt1,prompt2,prompt3")->required();
  s_gen->add_option("--participants", gen.participants, "Simulated participants")->check(CLI::PositiveNumber);
  add_endpoint_options(s_gen, gen.endpoint);
  bind(s_gen, [&] { return cli::run_generate(gen, out); });

  cli::DistributionOptions dist;
  auto* s_dist = app.add_subcommand("distributions", "Rating and class distributions per rater");
  add_corpus_options(s_dist, dist.corpus, dist.format, dist.required_raters, true);
  s_dist->add_option("--scheme", dist.scheme, "Rating-to-class binning")
      ->check(CLI::IsMember({"human-scale", "compressed-top"}));
  bind(s_dist, [&] { return cli::run_distributions(dist, out); });

  cli::ReportOptions rep;
  auto* s_rep = app.add_subcommand("report", "Stitch existing artifacts into reports/report.md");
  s_rep->add_option("--title", rep.title, "Report heading");
  bind(s_rep, [&] { return cli::run_report(rep, out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunRecord run;
    run.command = command;
    run.config = recorded_config(app.get_subcommand(command));
    run.started_at = utc_timestamp();
    cli::CommandResult result = action();
    run.finished_at = utc_timestamp();
    run.inputs = std::move(result.inputs);
    run.outputs = std::move(result.outputs);
    run.details = std::move(result.details);
    record_run(out, run);
    std::cout << command << ": wrote " << run.outputs.size() << " artifacts under " << out.string() << "\n";
    return 0;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const CorpusError& e) {
    std::cerr << "corpus error: " << e.what() << "\n";
  } catch (const ConlluError& e) {
    std::cerr << "CoNLL-U error: " << e.what() << "\n";
  } catch (const LexiconError& e) {
    std::cerr << "lexicon error: " << e.what() << "\n";
  } catch (const SchemeError& e) {
    std::cerr << "rating scheme error: " << e.what() << "\n";
  } catch (const csv::CsvError& e) {
    std::cerr << "CSV error: " << e.what() << "\n";
  } catch (const explain::ExplainError& e) {
    std::cerr << "explain error: " << e.what() << "\n";
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "JSON error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace storynet
