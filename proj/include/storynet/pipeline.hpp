#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "storynet/conllu.hpp"
#include "storynet/corpus.hpp"
#include "storynet/emotions.hpp"
#include "storynet/netfeat.hpp"
#include "storynet/tfmn.hpp"

namespace storynet {

// Missing files, mismatched headers and similar problems with user input.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Resources {
  StopList stoplist;
  AntonymLexicon antonyms;
  EmotionLexicon emotions;
  ValenceLexicon valence;

  static Resources load(const std::filesystem::path& emotion_lexicon, const std::filesystem::path& antonyms,
                        const std::filesystem::path& stoplist);
};

struct FeaturizeOptions {
  int max_tree_distance = kDefaultMaxTreeDistance;
  NullModelConfig null_model;
  NullSize null_size = NullSize::LexiconTokens;
  NetworkOptions network;
  std::uint64_t seed = 0;  // run seed; per-story Monte Carlo seeds derive from it

  nlohmann::json to_json() const;
};

struct StoryDiagnostics {
  int sentences = 0;
  int content_tokens = 0;
  int negated = 0;
  int unresolved_negations = 0;
  std::vector<std::string> unresolved_lemmas;
};

struct StoryAnalysis {
  Tfmn network;
  EmotionProfile profile;
  FeatureVector features;
  StoryDiagnostics diagnostics;
};

StoryAnalysis analyze_story(const Story& story, const ParsedStory& parsed, const Resources& resources,
                            const FeaturizeOptions& options);

// Story ids without a `<id>.conllu` file in `dir`.
std::vector<std::string> missing_parses(const Corpus& corpus, const std::filesystem::path& dir);

// CSV with header `story_id` followed by the feature names.
void write_feature_matrix(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix read_feature_matrix(std::istream& in, const std::string& source = "<input>");
FeatureMatrix read_feature_matrix(const std::filesystem::path& path);

// Throws InputError unless the names equal the 13 standard feature names.
void require_standard_features(const std::vector<std::string>& names, const std::string& source);

nlohmann::json scaling_to_json(const ScalingParams& p, const std::vector<std::string>& names);
ScalingParams scaling_from_json(const nlohmann::json& j);

enum class LabelMode { Stacked, MeanRating };
std::string_view to_string(LabelMode m);
LabelMode parse_label_mode(std::string_view s);

struct Dataset {
  std::vector<std::string> row_ids;    // story_id, or story_id/rater_id when stacked
  std::vector<std::string> story_ids;  // per row
  Eigen::MatrixXd X;
  std::vector<int> y;
  std::vector<std::string> feature_names;
};

// Joins features with corpus ratings. Stacked: one row per (story, rating).
// MeanRating: one row per story, label from the mean score rounded half up.
// Stories without ratings are skipped; ratings without features raise InputError.
Dataset build_dataset(const FeatureMatrix& features, const Corpus& corpus, RatingScheme scheme, LabelMode mode);

struct ColumnSummary {
  std::string name;
  double count = 0, mean = 0, std = 0, min = 0, q25 = 0, q50 = 0, q75 = 0, max = 0;
};

// Describe-style summary (sample std, linear-interpolated quartiles).
std::vector<ColumnSummary> summarize_columns(const Eigen::MatrixXd& values, const std::vector<std::string>& names);
std::string render_summary_markdown(const std::vector<ColumnSummary>& rows, const std::string& title);

struct ComparisonRow {
  std::string feature;
  double mean_a = 0, mean_b = 0, sem_a = 0, sem_b = 0;
  double u = 0, p = 1;
  bool degenerate = false;
};

// Per-column Mann-Whitney U of a versus b.
std::vector<ComparisonRow> compare_columns(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                           const std::vector<std::string>& names);
std::string render_comparison_markdown(const std::vector<ComparisonRow>& rows, const std::string& label_a,
                                       const std::string& label_b);
void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);

// Fixed-precision decimal without locale dependence.
std::string fixed(double v, int digits);

}  // namespace storynet
