#include <algorithm>
#include <cmath>
#include <numeric>

#include "storynet/ml.hpp"

namespace storynet::ml {

namespace {

struct SplitCandidate {
  double gain = 0;
  int feature = -1;
  double threshold = 0;
  double left_grad = 0, left_hess = 0;
};

struct NodeStats {
  int node = -1;  // index into tree.nodes
  int depth = 0;
  double grad = 0;
  double hess = 0;
};

double leaf_weight(double g, double h, double lambda) { return -g / (h + lambda); }

double score(double g, double h, double lambda) { return g * g / (h + lambda); }

// Per-feature instance order, computed once and reused for every tree.
std::vector<std::vector<int>> presort(const Eigen::MatrixXd& X) {
  std::vector<std::vector<int>> order(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index f = 0; f < X.cols(); ++f) {
    auto& o = order[static_cast<std::size_t>(f)];
    o.resize(static_cast<std::size_t>(X.rows()));
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return X(a, f) < X(b, f); });
  }
  return order;
}

// Exact greedy level-wise growth on fixed gradient statistics. On return,
// `position[i]` holds the leaf each instance fell into.
RegressionTree grow_tree(const Eigen::MatrixXd& X, const std::vector<std::vector<int>>& order,
                         const std::vector<double>& grad, const std::vector<double>& hess, const GbtParams& p,
                         std::vector<int>& position) {
  const int n = static_cast<int>(X.rows());
  RegressionTree tree;
  tree.nodes.emplace_back();
  position.assign(static_cast<std::size_t>(n), 0);

  NodeStats root{0, 0, 0, 0};
  for (int i = 0; i < n; ++i) {
    root.grad += grad[i];
    root.hess += hess[i];
  }
  std::vector<NodeStats> frontier = {root};

  while (!frontier.empty()) {
    // Map node id -> slot in the frontier.
    std::vector<int> slot(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < frontier.size(); ++s) slot[frontier[s].node] = static_cast<int>(s);

    std::vector<SplitCandidate> best(frontier.size());
    const bool can_split = frontier.front().depth < p.max_depth;
    if (can_split) {
      std::vector<double> gl(frontier.size()), hl(frontier.size()), last(frontier.size());
      std::vector<char> seen(frontier.size());
      for (std::size_t f = 0; f < order.size(); ++f) {
        std::fill(gl.begin(), gl.end(), 0.0);
        std::fill(hl.begin(), hl.end(), 0.0);
        std::fill(seen.begin(), seen.end(), 0);
        for (int i : order[f]) {
          const int pos = position[i];
          if (pos < 0) continue;
          const int s = slot[pos];
          if (s < 0) continue;
          const double v = X(i, static_cast<Eigen::Index>(f));
          if (seen[s] && v > last[s]) {
            const NodeStats& node = frontier[s];
            const double hr = node.hess - hl[s];
            if (hl[s] >= p.min_child_weight && hr >= p.min_child_weight) {
              const double gr = node.grad - gl[s];
              const double gain = 0.5 * (score(gl[s], hl[s], p.lambda_l2) + score(gr, hr, p.lambda_l2) -
                                         score(node.grad, node.hess, p.lambda_l2));
              if (gain > best[s].gain) {
                best[s] = {gain, static_cast<int>(f), last[s] + (v - last[s]) / 2.0, gl[s], hl[s]};
              }
            }
          }
          gl[s] += grad[i];
          hl[s] += hess[i];
          last[s] = v;
          seen[s] = 1;
        }
      }
    }

    std::vector<NodeStats> next;
    for (std::size_t s = 0; s < frontier.size(); ++s) {
      const NodeStats& ns = frontier[s];
      TreeNode& node = tree.nodes[ns.node];
      node.cover = ns.hess;
      if (best[s].feature < 0) {
        node.value = leaf_weight(ns.grad, ns.hess, p.lambda_l2);
        continue;
      }
      const int left = static_cast<int>(tree.nodes.size());
      const int right = left + 1;
      node.feature = best[s].feature;
      node.threshold = best[s].threshold;
      node.left = left;
      node.right = right;
      const NodeStats lstats{left, ns.depth + 1, best[s].left_grad, best[s].left_hess};
      const NodeStats rstats{right, ns.depth + 1, ns.grad - best[s].left_grad, ns.hess - best[s].left_hess};
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      next.push_back(lstats);
      next.push_back(rstats);
    }

    // Route instances of split nodes to their children.
    for (int i = 0; i < n; ++i) {
      const int pos = position[i];
      const TreeNode& node = tree.nodes[pos];
      if (node.is_leaf()) continue;
      position[i] = X(i, node.feature) < node.threshold ? node.left : node.right;
    }
    frontier = std::move(next);
  }

  // Exact additivity of covers: recompute internal covers bottom-up.
  for (int k = static_cast<int>(tree.nodes.size()) - 1; k >= 0; --k) {
    TreeNode& node = tree.nodes[k];
    if (!node.is_leaf()) node.cover = tree.nodes[node.left].cover + tree.nodes[node.right].cover;
  }
  return tree;
}

nlohmann::json tree_to_json(const RegressionTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const TreeNode& n : tree.nodes) {
    if (n.is_leaf())
      nodes.push_back({{"leaf", n.value}, {"cover", n.cover}});
    else
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"cover", n.cover}});
  }
  return nodes;
}

RegressionTree tree_from_json(const nlohmann::json& nodes) {
  RegressionTree tree;
  for (const auto& j : nodes) {
    TreeNode n;
    if (!j.contains("cover")) throw std::runtime_error("tree node without cover statistics");
    n.cover = j.at("cover").get<double>();
    if (j.contains("leaf")) {
      n.value = j.at("leaf").get<double>();
    } else {
      n.feature = j.at("feature").get<int>();
      n.threshold = j.at("threshold").get<double>();
      n.left = j.at("left").get<int>();
      n.right = j.at("right").get<int>();
    }
    tree.nodes.push_back(n);
  }
  const int size = static_cast<int>(tree.nodes.size());
  for (const TreeNode& n : tree.nodes)
    if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size))
      throw std::runtime_error("tree node child index out of range");
  if (tree.nodes.empty()) throw std::runtime_error("empty tree");
  return tree;
}

}  // namespace

int RegressionTree::leaf_index(const RowRef& x) const {
  int k = 0;
  while (!nodes[k].is_leaf()) k = x(nodes[k].feature) < nodes[k].threshold ? nodes[k].left : nodes[k].right;
  return k;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    deepest = std::max(deepest, d[k]);
    if (!nodes[k].is_leaf()) d[nodes[k].left] = d[nodes[k].right] = d[k] + 1;
  }
  return deepest;
}

int Classifier::predict(const RowRef& x) const {
  ClassProbs p = predict_proba(x);
  Eigen::Index best = 0;
  p.maxCoeff(&best);
  return static_cast<int>(best);
}

Eigen::MatrixXd Classifier::predict_proba_rows(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd out(X.rows(), kClasses);
  for (Eigen::Index i = 0; i < X.rows(); ++i) out.row(i) = predict_proba(X.row(i)).transpose();
  return out;
}

ClassProbs softmax(const ClassProbs& margins) {
  const ClassProbs e = (margins.array() - margins.maxCoeff()).exp();
  return e / e.sum();
}

double log_loss(const Eigen::MatrixXd& probs, std::span<const int> y) {
  double total = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    total -= std::log(std::max(probs(static_cast<Eigen::Index>(i), y[i]), 1e-300));
  return total / static_cast<double>(y.size());
}

ClassProbs GbtModel::margin(const RowRef& x) const {
  ClassProbs m = ClassProbs::Constant(base_score);
  for (const auto& round : trees)
    for (int c = 0; c < kClasses; ++c) m(c) += params.learning_rate * round[c].predict(x);
  return m;
}

ClassProbs GbtModel::predict_proba(const RowRef& x) const { return softmax(margin(x)); }

void validate_training_data(const Eigen::MatrixXd& X, std::span<const int> y, bool require_all_classes,
                            std::size_t min_rows) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) throw TrainingError("feature rows and labels differ in length");
  if (y.size() < min_rows)
    throw TrainingError("need at least " + std::to_string(min_rows) + " rows, got " + std::to_string(y.size()));
  std::array<bool, kClasses> present{};
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] >= kClasses)
      throw TrainingError("label " + std::to_string(y[i]) + " at row " + std::to_string(i) + " outside {0,1,2}");
    present[y[i]] = true;
  }
  if (require_all_classes)
    for (int c = 0; c < kClasses; ++c)
      if (!present[c]) throw TrainingError("class " + std::to_string(c) + " absent from labels");
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      if (!std::isfinite(X(i, j)))
        throw TrainingError("non-finite feature at row " + std::to_string(i) + ", column " + std::to_string(j));
}

GbtModel train_gbt(const Eigen::MatrixXd& X, std::span<const int> y, const GbtParams& params,
                   std::vector<std::string> feature_names) {
  validate_training_data(X, y, true, 10);
  if (params.rounds < 0 || params.max_depth < 0 || params.learning_rate <= 0 || params.lambda_l2 < 0)
    throw TrainingError("invalid boosting parameters");
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != X.cols())
    throw TrainingError("feature_names length does not match the feature matrix");

  GbtModel model;
  model.params = params;
  model.feature_names = std::move(feature_names);
  const int n = static_cast<int>(X.rows());
  const auto order = presort(X);

  Eigen::MatrixXd margins = Eigen::MatrixXd::Constant(n, kClasses, model.base_score);
  std::vector<double> grad(static_cast<std::size_t>(n)), hess(static_cast<std::size_t>(n));
  std::vector<int> position;

  for (int round = 0; round < params.rounds; ++round) {
    Eigen::MatrixXd probs(n, kClasses);
    for (int i = 0; i < n; ++i) probs.row(i) = softmax(margins.row(i).transpose()).transpose();

    std::array<RegressionTree, kClasses> round_trees;
    for (int c = 0; c < kClasses; ++c) {
      for (int i = 0; i < n; ++i) {
        const double pr = probs(i, c);
        grad[i] = pr - (y[i] == c ? 1.0 : 0.0);
        hess[i] = std::max(2.0 * pr * (1.0 - pr), 1e-16);
      }
      round_trees[c] = grow_tree(X, order, grad, hess, params, position);
      for (int i = 0; i < n; ++i) margins(i, c) += params.learning_rate * round_trees[c].nodes[position[i]].value;
    }
    model.trees.push_back(std::move(round_trees));

    Eigen::MatrixXd after(n, kClasses);
    for (int i = 0; i < n; ++i) after.row(i) = softmax(margins.row(i).transpose()).transpose();
    model.train_log_loss.push_back(log_loss(after, y));
  }
  return model;
}

nlohmann::json GbtModel::to_json() const {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& round : trees) {
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& t : round) per_class.push_back(tree_to_json(t));
    rounds.push_back(per_class);
  }
  return {{"format_version", 1},
          {"kind", "gbt"},
          {"class_count", kClasses},
          {"base_score", base_score},
          {"params",
           {{"rounds", params.rounds},
            {"max_depth", params.max_depth},
            {"learning_rate", params.learning_rate},
            {"lambda_l2", params.lambda_l2},
            {"min_child_weight", params.min_child_weight},
            {"seed", params.seed}}},
          {"feature_names", feature_names},
          {"train_log_loss", train_log_loss},
          {"trees", rounds}};
}

GbtModel GbtModel::from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "gbt") throw std::runtime_error("model JSON is not a gradient-boosted model");
  if (j.value("format_version", 0) != 1) throw std::runtime_error("unsupported model format_version");
  GbtModel m;
  m.base_score = j.at("base_score").get<double>();
  const auto& p = j.at("params");
  m.params.rounds = p.at("rounds").get<int>();
  m.params.max_depth = p.at("max_depth").get<int>();
  m.params.learning_rate = p.at("learning_rate").get<double>();
  m.params.lambda_l2 = p.at("lambda_l2").get<double>();
  m.params.min_child_weight = p.at("min_child_weight").get<double>();
  m.params.seed = p.at("seed").get<std::uint64_t>();
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  if (j.contains("train_log_loss")) m.train_log_loss = j.at("train_log_loss").get<std::vector<double>>();
  for (const auto& round : j.at("trees")) {
    if (round.size() != kClasses) throw std::runtime_error("each boosting round needs one tree per class");
    std::array<RegressionTree, kClasses> r;
    for (int c = 0; c < kClasses; ++c) r[c] = tree_from_json(round[c]);
    m.trees.push_back(std::move(r));
  }
  return m;
}

}  // namespace storynet::ml
