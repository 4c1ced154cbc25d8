#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace storynet::cli {

namespace fs = std::filesystem;

struct IngestOptions {
  fs::path corpus;
  std::string format = "auto";
  int required_raters = 4;
};

struct FeaturizeOptions {
  fs::path corpus;
  std::string format = "auto";
  fs::path conllu_dir;
  fs::path lexicon;
  fs::path antonyms;
  fs::path stoplist;
  int required_raters = 0;
  int max_tree_distance = 3;
  std::string null_model = "analytic";
  int mc_samples = 10000;
  std::string null_size = "lexicon-tokens";
  std::string component_mode = "largest";
  std::string degree_mode = "normalized";
  std::string pagerank_mode = "mean";
  double damping = 0.85;
  double pagerank_tol = 1e-10;
  int pagerank_max_iter = 1000;
  std::uint64_t seed = 0;
  fs::path scaling_params;  // apply instead of fitting when set
  bool export_networks = true;
  int jobs = 1;
};

struct CompareOptions {
  fs::path a;
  fs::path b;
  std::string label_a = "human";
  std::string label_b = "llm";
  std::string scaling = "pooled";
  fs::path corpus_a;
  fs::path corpus_b;
};

struct ModelOptions {
  fs::path features;
  fs::path corpus;
  std::string format = "auto";
  std::string scheme = "human-scale";
  std::string label_mode = "stacked";
  int required_raters = 4;
  std::string model = "gbt";
  int rounds = 100;
  int max_depth = 6;
  double learning_rate = 0.3;
  double lambda = 1.0;
  double min_child_weight = 1.0;
  int tree_max_depth = 8;
  int min_samples_leaf = 1;
  int forest_trees = 100;
  int forest_max_depth = 16;
  int max_features = -1;
  std::uint64_t seed = 0;
};

struct TrainOptions {
  ModelOptions model;
  std::string name = "model";
};

struct EvaluateOptions {
  ModelOptions model;
  int folds = 4;
  std::uint64_t cv_seed = 0;
  std::string title;
};

struct ExplainOptions {
  fs::path model;
  fs::path features;
  std::string scope = "full";
  fs::path corpus;
  std::string format = "auto";
  std::string scheme = "human-scale";
  std::string label_mode = "stacked";
  int required_raters = 4;
  int folds = 4;
  std::uint64_t cv_seed = 0;
};

struct EndpointOptions {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model_name = "gpt-3.5-turbo";
  std::string temperature;  // empty = endpoint default
  std::string api_key_env = "OPENAI_API_KEY";
  int max_retries = 3;
  double timeout = 60;
  int max_in_flight = 4;
  double backoff = 1.0;
  std::uint64_t seed = 0;
};

struct RateOptions {
  fs::path corpus;
  std::string format = "auto";
  EndpointOptions endpoint;
  int judges = 4;
  bool keep_existing = false;
};

struct GenerateOptions {
  fs::path prompts;
  int participants = 153;
  EndpointOptions endpoint;
};

struct DistributionOptions {
  fs::path corpus;
  std::string format = "auto";
  std::string scheme = "human-scale";
  int required_raters = 0;
};

struct ReportOptions {
  std::string title = "Reproduction report";
};

// Each command writes under `out` and returns details for the manifest.
struct CommandResult {
  std::vector<std::string> outputs;
  std::map<std::string, fs::path> inputs;
  nlohmann::json details = nlohmann::json::object();
};

CommandResult run_ingest(const IngestOptions& o, const fs::path& out);
CommandResult run_featurize(const FeaturizeOptions& o, const fs::path& out);
CommandResult run_compare(const CompareOptions& o, const fs::path& out);
CommandResult run_train(const TrainOptions& o, const fs::path& out);
CommandResult run_evaluate(const EvaluateOptions& o, const fs::path& out);
CommandResult run_explain(const ExplainOptions& o, const fs::path& out);
CommandResult run_rate(const RateOptions& o, const fs::path& out);
CommandResult run_generate(const GenerateOptions& o, const fs::path& out);
CommandResult run_distributions(const DistributionOptions& o, const fs::path& out);
CommandResult run_report(const ReportOptions& o, const fs::path& out);

}  // namespace storynet::cli
