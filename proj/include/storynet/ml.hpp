#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace storynet::ml {

inline constexpr int kClasses = 3;

using ClassProbs = Eigen::Vector3d;
// A feature row: accepts rows of column-major matrices as well as vectors.
using RowRef = Eigen::Ref<const Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

class TrainingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Binary tree node. Internal nodes route x[feature] < threshold to `left`.
// Leaves carry `value`; `cover` is the training hessian mass (boosted trees)
// or sample count (CART) that reached the node.
struct TreeNode {
  int feature = -1;
  double threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0;
  double cover = 0;

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int leaf_index(const RowRef& x) const;
  double predict(const RowRef& x) const { return nodes[leaf_index(x)].value; }
  int depth() const;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual ClassProbs predict_proba(const RowRef& x) const = 0;
  virtual nlohmann::json to_json() const = 0;

  int predict(const RowRef& x) const;
  Eigen::MatrixXd predict_proba_rows(const Eigen::MatrixXd& X) const;
};

struct GbtParams {
  int rounds = 100;
  int max_depth = 6;
  double learning_rate = 0.3;
  double lambda_l2 = 1.0;
  double min_child_weight = 1.0;
  std::uint64_t seed = 0;
};

// Softmax gradient-boosted trees: one regression tree per class per round.
class GbtModel final : public Classifier {
 public:
  GbtParams params;
  double base_score = 0.5;
  std::vector<std::string> feature_names;
  std::vector<std::array<RegressionTree, kClasses>> trees;  // [round][class]
  std::vector<double> train_log_loss;                       // after each round

  // base_score + learning_rate * sum of leaf values, per class.
  ClassProbs margin(const RowRef& x) const;
  ClassProbs predict_proba(const RowRef& x) const override;
  nlohmann::json to_json() const override;
  static GbtModel from_json(const nlohmann::json& j);
};

GbtModel train_gbt(const Eigen::MatrixXd& X, std::span<const int> y, const GbtParams& params,
                   std::vector<std::string> feature_names = {});

ClassProbs softmax(const ClassProbs& margins);

// Mean multiclass cross-entropy of the given probability rows.
double log_loss(const Eigen::MatrixXd& probs, std::span<const int> y);

struct TreeParams {
  int max_depth = 8;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  int max_features = 0;  // features tried per split; 0 = all
  std::uint64_t seed = 0;
};

struct ForestParams {
  int trees = 100;
  TreeParams tree{.max_depth = 16, .min_samples_split = 2, .min_samples_leaf = 1, .max_features = -1, .seed = 0};
  std::uint64_t seed = 0;  // max_features -1 selects floor(sqrt(features))
};

// CART classifier with Gini impurity. Leaf `value` is unused; class
// distributions are stored per leaf.
class DecisionTree final : public Classifier {
 public:
  TreeParams params;
  RegressionTree tree;
  std::vector<ClassProbs> leaf_probs;  // indexed by node id, meaningful at leaves

  ClassProbs predict_proba(const RowRef& x) const override;
  nlohmann::json to_json() const override;
  static DecisionTree from_json(const nlohmann::json& j);
};

// Bagged CARTs; probability = fraction of trees voting for each class.
class RandomForest final : public Classifier {
 public:
  ForestParams params;
  std::vector<DecisionTree> trees;

  ClassProbs predict_proba(const RowRef& x) const override;
  nlohmann::json to_json() const override;
  static RandomForest from_json(const nlohmann::json& j);
};

DecisionTree train_decision_tree(const Eigen::MatrixXd& X, std::span<const int> y, const TreeParams& params);
RandomForest train_random_forest(const Eigen::MatrixXd& X, std::span<const int> y, const ForestParams& params);

enum class ModelKind { Gbt, DecisionTree, RandomForest };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

struct ModelSpec {
  ModelKind kind = ModelKind::Gbt;
  GbtParams gbt;
  TreeParams tree;
  ForestParams forest;
};

std::unique_ptr<Classifier> train_model(const ModelSpec& spec, const Eigen::MatrixXd& X, std::span<const int> y,
                                        std::vector<std::string> feature_names = {});

std::unique_ptr<Classifier> model_from_json(const nlohmann::json& j);

// Checks shapes, label range, finiteness and (optionally) class presence.
void validate_training_data(const Eigen::MatrixXd& X, std::span<const int> y, bool require_all_classes,
                            std::size_t min_rows);

using ConfusionMatrix = Eigen::Matrix<long long, kClasses, kClasses>;

// Rows = true class, columns = predicted class.
ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred);

// Per-class one-vs-rest ROC AUC; NaN for a class with no positives or no negatives.
std::array<double, kClasses> roc_auc_ovr(std::span<const int> y_true, const Eigen::MatrixXd& probs);

// Stratified assignment: each class's shuffled members are dealt round-robin.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> y, int k, std::uint64_t seed);

struct MeanStd {
  double mean = 0;
  double std = 0;  // sample standard deviation across folds
};

struct ClassMetrics {
  MeanStd precision, recall, f1;
  long long support = 0;
};

struct AverageMetrics {
  double precision = 0, recall = 0, f1 = 0;
};

struct CvReport {
  int folds = 0;
  std::uint64_t seed = 0;
  std::array<ClassMetrics, kClasses> per_class;
  MeanStd accuracy;
  MeanStd roc_auc_macro;
  MeanStd roc_auc_weighted;
  AverageMetrics macro_avg;
  AverageMetrics weighted_avg;
  ConfusionMatrix confusion = ConfusionMatrix::Zero();
  std::vector<double> fold_accuracy;
  Eigen::MatrixXd oof_probs;  // out-of-fold probabilities, rows aligned with y
};

CvReport cross_validate(const ModelSpec& spec, const Eigen::MatrixXd& X, std::span<const int> y, int k,
                        std::uint64_t seed);

// Markdown table with "mean ± std" cells, laid out like a classification report.
std::string render_classification_report(const CvReport& report, std::string_view title);

}  // namespace storynet::ml
