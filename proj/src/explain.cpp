#include "storynet/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "storynet/csv.hpp"

namespace storynet::explain {

namespace {

struct PathElement {
  int feature = -1;
  double zero_fraction = 0;
  double one_fraction = 0;
  double pweight = 0;
};

void extend_path(PathElement* path, int depth, double zero_fraction, double one_fraction, int feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].pweight += one_fraction * path[i].pweight * (i + 1) / static_cast<double>(depth + 1);
    path[i].pweight = zero_fraction * path[i].pweight * (depth - i) / static_cast<double>(depth + 1);
  }
}

void unwind_path(PathElement* path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next_one_portion = path[depth].pweight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0) {
      const double tmp = path[i].pweight;
      path[i].pweight = next_one_portion * (depth + 1) / ((i + 1) * one);
      next_one_portion = tmp - path[i].pweight * zero * (depth - i) / static_cast<double>(depth + 1);
    } else {
      path[i].pweight = path[i].pweight * (depth + 1) / (zero * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

// Total permutation weight if element `index` were removed from the path.
double unwound_sum(const PathElement* path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next_one_portion = path[depth].pweight;
  double total = 0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0) {
      const double tmp = next_one_portion * (depth + 1) / ((i + 1) * one);
      total += tmp;
      next_one_portion = path[i].pweight - tmp * zero * ((depth - i) / static_cast<double>(depth + 1));
    } else if (zero != 0) {
      total += (path[i].pweight / zero) / ((depth - i) / static_cast<double>(depth + 1));
    }
  }
  return total;
}

struct Walker {
  const ml::RegressionTree& tree;
  const ml::RowRef& x;
  std::span<double> phi;
  double scale;

  void recurse(int node, PathElement* parent_path, int depth, double zero_fraction, double one_fraction,
               int feature) {
    PathElement* path = parent_path + depth;
    if (depth > 0) std::copy(parent_path, parent_path + depth, path);
    extend_path(path, depth, zero_fraction, one_fraction, feature);
    const ml::TreeNode& n = tree.nodes[node];

    if (n.is_leaf()) {
      for (int i = 1; i <= depth; ++i) {
        const double w = unwound_sum(path, depth, i);
        const PathElement& el = path[i];
        phi[el.feature] += scale * w * (el.one_fraction - el.zero_fraction) * n.value;
      }
      return;
    }

    const int hot = x(n.feature) < n.threshold ? n.left : n.right;
    const int cold = hot == n.left ? n.right : n.left;
    double incoming_zero = 1, incoming_one = 1;
    int k = 1;
    for (; k <= depth; ++k)
      if (path[k].feature == n.feature) break;
    if (k <= depth) {
      incoming_zero = path[k].zero_fraction;
      incoming_one = path[k].one_fraction;
      unwind_path(path, depth, k);
      --depth;
    }
    const double cover = n.cover;
    recurse(hot, path, depth + 1, incoming_zero * tree.nodes[hot].cover / cover, incoming_one, n.feature);
    recurse(cold, path, depth + 1, incoming_zero * tree.nodes[cold].cover / cover, 0, n.feature);
  }
};

void require_covers(const ml::RegressionTree& tree) {
  if (tree.nodes.empty()) throw ExplainError("empty tree");
  for (const auto& n : tree.nodes)
    if (!(n.cover > 0))
      throw ExplainError("tree lacks cover statistics; retrain the model with this toolkit");
}

std::vector<int> rank_desc(const Eigen::VectorXd& v) {
  std::vector<int> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v(a) > v(b); });
  return idx;
}

}  // namespace

double expected_value(const ml::RegressionTree& tree) {
  require_covers(tree);
  const double root = tree.nodes[0].cover;
  double total = 0;
  for (const auto& n : tree.nodes)
    if (n.is_leaf()) total += n.cover / root * n.value;
  return total;
}

void tree_shap(const ml::RegressionTree& tree, const ml::RowRef& x, std::span<double> phi, double scale) {
  require_covers(tree);
  const int depth = tree.depth();
  std::vector<PathElement> buffer(static_cast<std::size_t>((depth + 2) * (depth + 3) / 2));
  Walker w{tree, x, phi, scale};
  w.recurse(0, buffer.data(), 0, 1, 1, -1);
}

Eigen::Vector3d base_values(const ml::GbtModel& model) {
  Eigen::Vector3d b = Eigen::Vector3d::Constant(model.base_score);
  for (const auto& round : model.trees)
    for (int c = 0; c < ml::kClasses; ++c) b(c) += model.params.learning_rate * expected_value(round[c]);
  return b;
}

SampleShap tree_shap(const ml::GbtModel& model, const ml::RowRef& x) {
  SampleShap out;
  out.base_values = base_values(model);
  for (int c = 0; c < ml::kClasses; ++c) {
    out.values[c] = Eigen::VectorXd::Zero(x.size());
    std::span<double> phi(out.values[c].data(), static_cast<std::size_t>(x.size()));
    for (const auto& round : model.trees) tree_shap(round[c], x, phi, model.params.learning_rate);
  }
  return out;
}

ShapMatrix shap_matrix(const ml::GbtModel& model, const Eigen::MatrixXd& X) {
  ShapMatrix m;
  m.base_values = base_values(model);
  for (int c = 0; c < ml::kClasses; ++c) m.values[c] = Eigen::MatrixXd::Zero(X.rows(), X.cols());
  std::vector<double> phi(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (int c = 0; c < ml::kClasses; ++c) {
      std::fill(phi.begin(), phi.end(), 0.0);
      for (const auto& round : model.trees) tree_shap(round[c], X.row(i), phi, model.params.learning_rate);
      for (Eigen::Index j = 0; j < X.cols(); ++j) m.values[c](i, j) = phi[static_cast<std::size_t>(j)];
    }
  return m;
}

ImportanceSummary mean_abs_shap(const ShapMatrix& shap) {
  if (shap.samples() == 0) throw ExplainError("importance needs at least one sample");
  ImportanceSummary s;
  s.mean_abs.resize(ml::kClasses, shap.features());
  for (int c = 0; c < ml::kClasses; ++c) {
    s.mean_abs.row(c) = shap.values[c].cwiseAbs().colwise().mean();
    s.class_rank[c] = rank_desc(s.mean_abs.row(c).transpose());
  }
  s.global_rank = rank_desc(s.mean_abs.colwise().sum().transpose());
  return s;
}

ImportanceSummary mean_abs_shap(const ml::GbtModel& model, const Eigen::MatrixXd& X) {
  return mean_abs_shap(shap_matrix(model, X));
}

std::string_view to_string(Tercile t) {
  switch (t) {
    case Tercile::Weak: return "weak";
    case Tercile::Moderate: return "moderate";
    case Tercile::Strong: break;
  }
  return "strong";
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ExplainError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<BeeswarmRow> beeswarm_export(const Eigen::MatrixXd& X, const ShapMatrix& shap, int class_index) {
  if (class_index < 0 || class_index >= ml::kClasses) throw ExplainError("class index outside {0,1,2}");
  const Eigen::MatrixXd& values = shap.values[class_index];
  if (values.rows() != X.rows() || values.cols() != X.cols())
    throw ExplainError("SHAP matrix and feature matrix shapes differ");
  std::vector<BeeswarmRow> rows;
  rows.reserve(static_cast<std::size_t>(X.size()));
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    std::vector<double> col(X.col(j).data(), X.col(j).data() + X.rows());
    const double q1 = percentile(col, 100.0 / 3.0);
    const double q2 = percentile(col, 200.0 / 3.0);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double v = X(i, j);
      const Tercile t = v <= q1 ? Tercile::Weak : (v <= q2 ? Tercile::Moderate : Tercile::Strong);
      rows.push_back({static_cast<int>(j), i, values(i, j), v, t});
    }
  }
  return rows;
}

void write_shap_csv(std::ostream& out, const ShapMatrix& shap, const Eigen::MatrixXd& X,
                    std::span<const std::string> sample_ids, std::span<const std::string> feature_names) {
  if (static_cast<Eigen::Index>(sample_ids.size()) != shap.samples() ||
      static_cast<Eigen::Index>(feature_names.size()) != shap.features())
    throw ExplainError("sample ids or feature names do not match the SHAP matrix");
  csv::write_row(out, {"sample_id", "class", "feature", "shap_value", "feature_value"});
  for (Eigen::Index i = 0; i < shap.samples(); ++i)
    for (int c = 0; c < ml::kClasses; ++c)
      for (Eigen::Index j = 0; j < shap.features(); ++j)
        csv::write_row(out, {sample_ids[static_cast<std::size_t>(i)], std::to_string(c),
                             feature_names[static_cast<std::size_t>(j)], csv::format_double(shap.values[c](i, j)),
                             csv::format_double(X(i, j))});
}

void write_importance_csv(std::ostream& out, const ImportanceSummary& imp,
                          std::span<const std::string> feature_names) {
  csv::write_row(out, {"class", "feature", "mean_abs_shap", "rank"});
  for (int c = 0; c < ml::kClasses; ++c) {
    const auto& order = imp.class_rank[c];
    for (std::size_t r = 0; r < order.size(); ++r)
      csv::write_row(out, {std::to_string(c), feature_names[static_cast<std::size_t>(order[r])],
                           csv::format_double(imp.mean_abs(c, order[r])), std::to_string(r + 1)});
  }
}

}  // namespace storynet::explain
