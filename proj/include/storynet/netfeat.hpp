#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "storynet/corpus.hpp"
#include "storynet/emotions.hpp"
#include "storynet/tfmn.hpp"

namespace storynet {

inline constexpr std::size_t kFeatureCount = 13;
inline constexpr std::size_t kNetworkFeatureCount = 5;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "ASPL", "Clustering_coefficient", "Degree_centrality", "Diameter", "PageRank_centrality",
    "Anger", "Anticipation", "Disgust", "Fear", "Joy", "Sadness", "Surprise", "Trust"};

using FeatureRow = Eigen::Matrix<double, 1, Eigen::Dynamic>;

// Undirected simple graph on vertices 0..n-1 with sorted adjacency lists.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n) : adj_(n) {}
  Graph(std::size_t n, const std::vector<std::pair<int, int>>& edges);

  std::size_t size() const { return adj_.size(); }
  std::size_t edge_count() const;
  const std::vector<int>& neighbors(int v) const { return adj_[v]; }
  std::size_t degree(int v) const { return adj_[v].size(); }
  bool has_edge(int a, int b) const;

 private:
  std::vector<std::vector<int>> adj_;
};

// Vertices are numbered in the TFMN's sorted lemma order.
Graph to_graph(const Tfmn& tfmn);

// Connected components, each sorted ascending, listed by smallest vertex.
std::vector<std::vector<int>> connected_components(const Graph& g);

// Largest component; ties go to the lexicographically smallest vertex set.
std::vector<int> largest_component(const Graph& g);

enum class ComponentMode { Largest, MeanOverComponents };
enum class DegreeMode { Normalized, Raw };
enum class PageRankMode { Mean, Max, Std };

std::string_view to_string(ComponentMode m);
ComponentMode parse_component_mode(std::string_view s);
std::string_view to_string(DegreeMode m);
DegreeMode parse_degree_mode(std::string_view s);
std::string_view to_string(PageRankMode m);
PageRankMode parse_pagerank_mode(std::string_view s);

double aspl(const Graph& g, ComponentMode mode = ComponentMode::Largest);
double diameter(const Graph& g, ComponentMode mode = ComponentMode::Largest);
double mean_clustering(const Graph& g);
double mean_degree_centrality(const Graph& g, DegreeMode mode = DegreeMode::Normalized);

struct PageRankParams {
  double damping = 0.85;
  double tol = 1e-10;
  int max_iter = 1000;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Power iteration; isolated vertices spread their mass uniformly.
Eigen::VectorXd pagerank(const Graph& g, const PageRankParams& params = {});

double pagerank_feature(const Eigen::VectorXd& ranks, PageRankMode mode = PageRankMode::Mean);

struct NetworkOptions {
  ComponentMode component_mode = ComponentMode::Largest;
  DegreeMode degree_mode = DegreeMode::Normalized;
  PageRankMode pagerank_mode = PageRankMode::Mean;
  PageRankParams pagerank;
};

struct NetworkFeatures {
  double aspl = 0;
  double diameter = 0;
  double clustering = 0;
  double degree_centrality = 0;
  double pagerank_centrality = 0;
};

NetworkFeatures network_features(const Graph& g, const NetworkOptions& options = {});

struct FeatureVector {
  std::string story_id;
  Eigen::Matrix<double, kFeatureCount, 1> values = Eigen::Matrix<double, kFeatureCount, 1>::Zero();
};

// Raw 13-vector in kFeatureNames order.
FeatureVector featurize(const Story& story, const Tfmn& tfmn, const EmotionProfile& profile,
                        const NetworkOptions& options = {});

struct FeatureMatrix {
  std::vector<std::string> story_ids;
  Eigen::MatrixXd values;  // stories x features
  std::vector<std::string> feature_names;
};

// Per-column (min, max).
struct ScalingParams {
  Eigen::RowVectorXd min;
  Eigen::RowVectorXd max;
};

template <typename Derived>
ScalingParams fit_minmax(const Eigen::MatrixBase<Derived>& x) {
  return {x.colwise().minCoeff(), x.colwise().maxCoeff()};
}

// (x - min) / (max - min) per column; constant columns map to 0.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> apply_minmax(
    const Eigen::MatrixBase<Derived>& x, const ScalingParams& params) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Scalar lo = params.min(j), range = params.max(j) - params.min(j);
    if (range == Scalar(0))
      out.col(j).setZero();
    else
      out.col(j) = (x.col(j).array() - lo) / range;
  }
  return out;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> invert_minmax(
    const Eigen::MatrixBase<Derived>& scaled, const ScalingParams& params) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(scaled.rows(), scaled.cols());
  for (Eigen::Index j = 0; j < scaled.cols(); ++j)
    out.col(j) = scaled.col(j).array() * (params.max(j) - params.min(j)) + params.min(j);
  return out;
}

// Fits on `x` unless params are supplied.
template <typename Derived>
std::pair<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>, ScalingParams> minmax_scale(
    const Eigen::MatrixBase<Derived>& x, const std::optional<ScalingParams>& params = std::nullopt) {
  if (x.rows() < 1) throw std::invalid_argument("minmax_scale needs at least one row");
  ScalingParams p = params ? *params : fit_minmax(x);
  return {apply_minmax(x, p), std::move(p)};
}

}  // namespace storynet
