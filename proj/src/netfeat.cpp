#include "storynet/netfeat.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

namespace storynet {

namespace {

// BFS hop counts from `source`; -1 for unreachable vertices.
std::vector<int> bfs(const Graph& g, int source) {
  std::vector<int> dist(g.size(), -1);
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w : g.neighbors(v))
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        q.push(w);
      }
  }
  return dist;
}

struct PathStats {
  double mean = 0;
  int longest = 0;
};

PathStats component_paths(const Graph& g, const std::vector<int>& component) {
  PathStats s;
  const std::size_t k = component.size();
  if (k < 2) return s;
  double total = 0;
  for (int v : component) {
    const auto dist = bfs(g, v);
    for (int w : component) {
      total += dist[w];
      s.longest = std::max(s.longest, dist[w]);
    }
  }
  s.mean = total / static_cast<double>(k * (k - 1));
  return s;
}

template <typename Metric>
double over_components(const Graph& g, ComponentMode mode, Metric metric) {
  if (mode == ComponentMode::Largest) return metric(component_paths(g, largest_component(g)));
  double sum = 0;
  int counted = 0;
  for (const auto& c : connected_components(g)) {
    if (c.size() < 2) continue;
    sum += metric(component_paths(g, c));
    ++counted;
  }
  return counted ? sum / counted : 0.0;
}

}  // namespace

Graph::Graph(std::size_t n, const std::vector<std::pair<int, int>>& edges) : adj_(n) {
  for (auto [a, b] : edges) {
    if (a == b) continue;
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }
  for (auto& list : adj_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

std::size_t Graph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& list : adj_) twice += list.size();
  return twice / 2;
}

bool Graph::has_edge(int a, int b) const { return std::binary_search(adj_[a].begin(), adj_[a].end(), b); }

Graph to_graph(const Tfmn& tfmn) {
  std::map<std::string, int> index;
  for (const auto& [lemma, _] : tfmn.nodes()) index.emplace(lemma, static_cast<int>(index.size()));
  std::vector<std::pair<int, int>> edges;
  edges.reserve(tfmn.edge_count());
  for (const auto& [a, b] : tfmn.edges()) edges.emplace_back(index.at(a), index.at(b));
  return Graph(index.size(), edges);
}

std::vector<std::vector<int>> connected_components(const Graph& g) {
  std::vector<std::vector<int>> out;
  std::vector<char> seen(g.size(), 0);
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (seen[s]) continue;
    std::vector<int> comp;
    std::vector<int> stack = {static_cast<int>(s)};
    seen[s] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (int w : g.neighbors(v))
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

std::vector<int> largest_component(const Graph& g) {
  std::vector<int> best;
  for (auto& c : connected_components(g))
    if (c.size() > best.size() || (c.size() == best.size() && c < best)) best = std::move(c);
  return best;
}

std::string_view to_string(ComponentMode m) { return m == ComponentMode::Largest ? "largest" : "mean"; }

ComponentMode parse_component_mode(std::string_view s) {
  if (s == "largest" || s == "lcc") return ComponentMode::Largest;
  if (s == "mean") return ComponentMode::MeanOverComponents;
  throw std::invalid_argument("unknown component mode '" + std::string(s) + "'");
}

std::string_view to_string(DegreeMode m) { return m == DegreeMode::Normalized ? "normalized" : "raw"; }

DegreeMode parse_degree_mode(std::string_view s) {
  if (s == "normalized") return DegreeMode::Normalized;
  if (s == "raw") return DegreeMode::Raw;
  throw std::invalid_argument("unknown degree mode '" + std::string(s) + "'");
}

std::string_view to_string(PageRankMode m) {
  switch (m) {
    case PageRankMode::Mean: return "mean";
    case PageRankMode::Max: return "max";
    case PageRankMode::Std: break;
  }
  return "std";
}

PageRankMode parse_pagerank_mode(std::string_view s) {
  if (s == "mean") return PageRankMode::Mean;
  if (s == "max") return PageRankMode::Max;
  if (s == "std") return PageRankMode::Std;
  throw std::invalid_argument("unknown pagerank mode '" + std::string(s) + "'");
}

double aspl(const Graph& g, ComponentMode mode) {
  return over_components(g, mode, [](const PathStats& s) { return s.mean; });
}

double diameter(const Graph& g, ComponentMode mode) {
  return over_components(g, mode, [](const PathStats& s) { return static_cast<double>(s.longest); });
}

double mean_clustering(const Graph& g) {
  if (g.size() == 0) return 0.0;
  double total = 0;
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto& nb = g.neighbors(static_cast<int>(v));
    const std::size_t d = nb.size();
    if (d < 2) continue;
    std::size_t triangles = 0;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a + 1; b < d; ++b) triangles += g.has_edge(nb[a], nb[b]);
    total += 2.0 * static_cast<double>(triangles) / static_cast<double>(d * (d - 1));
  }
  return total / static_cast<double>(g.size());
}

double mean_degree_centrality(const Graph& g, DegreeMode mode) {
  const std::size_t n = g.size();
  if (n == 0) return 0.0;
  const double mean_degree = 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(n);
  if (mode == DegreeMode::Raw) return mean_degree;
  return n < 2 ? 0.0 : mean_degree / static_cast<double>(n - 1);
}

Eigen::VectorXd pagerank(const Graph& g, const PageRankParams& params) {
  if (!(params.damping > 0.0 && params.damping < 1.0))
    throw std::invalid_argument("pagerank damping must lie in (0, 1)");
  const Eigen::Index n = static_cast<Eigen::Index>(g.size());
  if (n == 0) return {};

  const double d = params.damping;
  const double teleport = (1.0 - d) / static_cast<double>(n);
  Eigen::VectorXd rank = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::VectorXd next(n);
  double residual = 0;
  for (int iter = 0; iter < params.max_iter; ++iter) {
    double dangling = 0;
    for (Eigen::Index v = 0; v < n; ++v)
      if (g.degree(static_cast<int>(v)) == 0) dangling += rank(v);
    const double base = teleport + d * dangling / static_cast<double>(n);
    for (Eigen::Index v = 0; v < n; ++v) {
      double inflow = 0;
      for (int u : g.neighbors(static_cast<int>(v))) inflow += rank(u) / static_cast<double>(g.degree(u));
      next(v) = base + d * inflow;
    }
    residual = (next - rank).lpNorm<1>();
    rank.swap(next);
    if (residual < params.tol) return rank / rank.sum();
  }
  throw ConvergenceError("pagerank did not converge in " + std::to_string(params.max_iter) +
                             " iterations (L1 residual " + std::to_string(residual) + ")",
                         residual);
}

double pagerank_feature(const Eigen::VectorXd& ranks, PageRankMode mode) {
  if (ranks.size() == 0) throw std::invalid_argument("pagerank_feature needs a non-empty vector");
  switch (mode) {
    case PageRankMode::Mean: return ranks.mean();
    case PageRankMode::Max: return ranks.maxCoeff();
    case PageRankMode::Std: break;
  }
  return std::sqrt((ranks.array() - ranks.mean()).square().mean());
}

NetworkFeatures network_features(const Graph& g, const NetworkOptions& options) {
  NetworkFeatures f;
  if (g.size() == 0) return f;
  f.aspl = aspl(g, options.component_mode);
  f.diameter = diameter(g, options.component_mode);
  f.clustering = mean_clustering(g);
  f.degree_centrality = mean_degree_centrality(g, options.degree_mode);
  f.pagerank_centrality = pagerank_feature(pagerank(g, options.pagerank), options.pagerank_mode);
  return f;
}

FeatureVector featurize(const Story& story, const Tfmn& tfmn, const EmotionProfile& profile,
                        const NetworkOptions& options) {
  FeatureVector out;
  out.story_id = story.id;
  const NetworkFeatures net = network_features(to_graph(tfmn), options);
  out.values(0) = net.aspl;
  out.values(1) = net.clustering;
  out.values(2) = net.degree_centrality;
  out.values(3) = net.diameter;
  out.values(4) = net.pagerank_centrality;
  for (std::size_t k = 0; k < kEmotionCount; ++k) out.values(kNetworkFeatureCount + k) = profile.z[k];
  return out;
}

}  // namespace storynet
