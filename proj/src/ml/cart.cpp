#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "storynet/ml.hpp"

namespace storynet::ml {

namespace {

using Counts = std::array<double, kClasses>;

double gini(const Counts& c, double total) {
  if (total <= 0) return 0;
  double s = 1.0;
  for (double v : c) s -= (v / total) * (v / total);
  return s;
}

struct Builder {
  const Eigen::MatrixXd& X;
  std::span<const int> y;
  const TreeParams& p;
  int features_per_split;
  std::mt19937_64 rng;
  DecisionTree out;

  int build(std::vector<int>& rows, int depth) {
    const int id = static_cast<int>(out.tree.nodes.size());
    out.tree.nodes.emplace_back();
    out.leaf_probs.emplace_back(ClassProbs::Zero());

    Counts counts{};
    for (int r : rows) counts[y[r]] += 1.0;
    const double n = static_cast<double>(rows.size());
    out.tree.nodes[id].cover = n;
    for (int c = 0; c < kClasses; ++c) out.leaf_probs[id](c) = counts[c] / n;

    const double parent_impurity = gini(counts, n);
    if (depth >= p.max_depth || static_cast<int>(rows.size()) < p.min_samples_split || parent_impurity <= 0)
      return id;

    std::vector<int> features(static_cast<std::size_t>(X.cols()));
    std::iota(features.begin(), features.end(), 0);
    if (features_per_split < static_cast<int>(features.size())) {
      std::shuffle(features.begin(), features.end(), rng);
      features.resize(static_cast<std::size_t>(features_per_split));
      std::sort(features.begin(), features.end());
    }

    double best_score = parent_impurity * n;  // weighted child impurity must beat this
    int best_feature = -1;
    double best_threshold = 0;
    std::vector<int> sorted = rows;
    for (int f : features) {
      std::stable_sort(sorted.begin(), sorted.end(), [&](int a, int b) { return X(a, f) < X(b, f); });
      Counts left{};
      for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        left[y[sorted[k]]] += 1.0;
        const double lo = X(sorted[k], f), hi = X(sorted[k + 1], f);
        if (!(hi > lo)) continue;
        const double nl = static_cast<double>(k + 1), nr = n - nl;
        if (nl < p.min_samples_leaf || nr < p.min_samples_leaf) continue;
        Counts right;
        for (int c = 0; c < kClasses; ++c) right[c] = counts[c] - left[c];
        const double s = gini(left, nl) * nl + gini(right, nr) * nr;
        if (s < best_score - 1e-12) {
          best_score = s;
          best_feature = f;
          best_threshold = lo + (hi - lo) / 2.0;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<int> lrows, rrows;
    for (int r : rows) (X(r, best_feature) < best_threshold ? lrows : rrows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = build(lrows, depth + 1);
    const int r = build(rrows, depth + 1);
    TreeNode& node = out.tree.nodes[id];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }
};

int resolve_max_features(int requested, Eigen::Index cols) {
  const int c = static_cast<int>(cols);
  if (requested == 0) return c;
  if (requested < 0) return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(c)))));
  return std::min(requested, c);
}

DecisionTree fit_tree(const Eigen::MatrixXd& X, std::span<const int> y, std::vector<int> rows, const TreeParams& p) {
  if (p.max_depth < 0 || p.min_samples_split < 2 || p.min_samples_leaf < 1)
    throw TrainingError("invalid decision tree parameters");
  Builder b{X, y, p, resolve_max_features(p.max_features, X.cols()), std::mt19937_64(p.seed), {}};
  b.out.params = p;
  b.build(rows, 0);
  return std::move(b.out);
}

nlohmann::json tree_params_json(const TreeParams& p) {
  return {{"max_depth", p.max_depth},
          {"min_samples_split", p.min_samples_split},
          {"min_samples_leaf", p.min_samples_leaf},
          {"max_features", p.max_features},
          {"seed", p.seed}};
}

TreeParams tree_params_from(const nlohmann::json& j) {
  TreeParams p;
  p.max_depth = j.at("max_depth").get<int>();
  p.min_samples_split = j.at("min_samples_split").get<int>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  p.max_features = j.at("max_features").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

}  // namespace

DecisionTree train_decision_tree(const Eigen::MatrixXd& X, std::span<const int> y, const TreeParams& params) {
  validate_training_data(X, y, false, 2);
  std::vector<int> rows(y.size());
  std::iota(rows.begin(), rows.end(), 0);
  return fit_tree(X, y, std::move(rows), params);
}

RandomForest train_random_forest(const Eigen::MatrixXd& X, std::span<const int> y, const ForestParams& params) {
  validate_training_data(X, y, false, 2);
  if (params.trees < 1) throw TrainingError("a forest needs at least one tree");
  RandomForest forest;
  forest.params = params;
  std::mt19937_64 rng(params.seed);
  const int n = static_cast<int>(y.size());
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int t = 0; t < params.trees; ++t) {
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (int& r : rows) r = pick(rng);
    TreeParams tp = params.tree;
    tp.seed = rng();
    forest.trees.push_back(fit_tree(X, y, std::move(rows), tp));
  }
  return forest;
}

ClassProbs DecisionTree::predict_proba(const RowRef& x) const { return leaf_probs[tree.leaf_index(x)]; }

ClassProbs RandomForest::predict_proba(const RowRef& x) const {
  ClassProbs votes = ClassProbs::Zero();
  for (const DecisionTree& t : trees) votes(t.predict(x)) += 1.0;
  return votes / static_cast<double>(trees.size());
}

nlohmann::json DecisionTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    const TreeNode& n = tree.nodes[k];
    nlohmann::json j = {{"cover", n.cover}};
    if (n.is_leaf()) {
      j["probs"] = {leaf_probs[k](0), leaf_probs[k](1), leaf_probs[k](2)};
    } else {
      j["feature"] = n.feature;
      j["threshold"] = n.threshold;
      j["left"] = n.left;
      j["right"] = n.right;
    }
    nodes.push_back(std::move(j));
  }
  return {{"format_version", 1}, {"kind", "decision-tree"}, {"params", tree_params_json(params)}, {"nodes", nodes}};
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "decision-tree") throw std::runtime_error("model JSON is not a decision tree");
  DecisionTree t;
  t.params = tree_params_from(j.at("params"));
  for (const auto& nj : j.at("nodes")) {
    TreeNode n;
    n.cover = nj.at("cover").get<double>();
    ClassProbs probs = ClassProbs::Zero();
    if (nj.contains("probs")) {
      const auto v = nj.at("probs").get<std::vector<double>>();
      if (v.size() != kClasses) throw std::runtime_error("leaf needs one probability per class");
      probs << v[0], v[1], v[2];
    } else {
      n.feature = nj.at("feature").get<int>();
      n.threshold = nj.at("threshold").get<double>();
      n.left = nj.at("left").get<int>();
      n.right = nj.at("right").get<int>();
    }
    t.tree.nodes.push_back(n);
    t.leaf_probs.push_back(probs);
  }
  if (t.tree.nodes.empty()) throw std::runtime_error("empty tree");
  const int size = static_cast<int>(t.tree.nodes.size());
  for (const TreeNode& n : t.tree.nodes)
    if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size))
      throw std::runtime_error("tree node child index out of range");
  return t;
}

nlohmann::json RandomForest::to_json() const {
  nlohmann::json ts = nlohmann::json::array();
  for (const auto& t : trees) ts.push_back(t.to_json());
  return {{"format_version", 1},
          {"kind", "random-forest"},
          {"params", {{"trees", params.trees}, {"seed", params.seed}, {"tree", tree_params_json(params.tree)}}},
          {"trees", ts}};
}

RandomForest RandomForest::from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "random-forest") throw std::runtime_error("model JSON is not a random forest");
  RandomForest f;
  const auto& p = j.at("params");
  f.params.trees = p.at("trees").get<int>();
  f.params.seed = p.at("seed").get<std::uint64_t>();
  f.params.tree = tree_params_from(p.at("tree"));
  for (const auto& t : j.at("trees")) f.trees.push_back(DecisionTree::from_json(t));
  if (f.trees.empty()) throw std::runtime_error("forest without trees");
  return f;
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Gbt: return "gbt";
    case ModelKind::DecisionTree: return "decision-tree";
    case ModelKind::RandomForest: break;
  }
  return "random-forest";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "gbt" || s == "xgboost") return ModelKind::Gbt;
  if (s == "decision-tree" || s == "tree") return ModelKind::DecisionTree;
  if (s == "random-forest" || s == "forest") return ModelKind::RandomForest;
  throw std::invalid_argument("unknown model kind '" + std::string(s) + "'");
}

std::unique_ptr<Classifier> train_model(const ModelSpec& spec, const Eigen::MatrixXd& X, std::span<const int> y,
                                        std::vector<std::string> feature_names) {
  switch (spec.kind) {
    case ModelKind::Gbt: return std::make_unique<GbtModel>(train_gbt(X, y, spec.gbt, std::move(feature_names)));
    case ModelKind::DecisionTree: return std::make_unique<DecisionTree>(train_decision_tree(X, y, spec.tree));
    case ModelKind::RandomForest: break;
  }
  return std::make_unique<RandomForest>(train_random_forest(X, y, spec.forest));
}

std::unique_ptr<Classifier> model_from_json(const nlohmann::json& j) {
  const std::string kind = j.value("kind", "");
  if (kind == "gbt") return std::make_unique<GbtModel>(GbtModel::from_json(j));
  if (kind == "decision-tree") return std::make_unique<DecisionTree>(DecisionTree::from_json(j));
  if (kind == "random-forest") return std::make_unique<RandomForest>(RandomForest::from_json(j));
  throw std::runtime_error("unknown model kind '" + kind + "' in model JSON");
}

}  // namespace storynet::ml
