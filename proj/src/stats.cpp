#include "storynet/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace storynet::stats {

namespace {

void require_paired(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw StatsError("paired samples must have equal length");
  if (x.size() < 3) throw StatsError("correlation needs at least 3 pairs");
}

bool has_ties(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) != s.end();
}

double correlation(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw StatsError("correlation undefined: a sample has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double t_test_p(double r, std::size_t n) {
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n) - 2.0;
  const double t = r * std::sqrt(df / (1.0 - r * r));
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

// Number of arrangements giving each U in [0, m*n] when sampling m of m+n
// distinct ranks.
std::vector<double> u_distribution(std::size_t m, std::size_t n) {
  // table[j][u] = ways with (i, j) sizes; iterate i from 0..m.
  std::vector<std::vector<double>> prev(n + 1), cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j].assign(1, 1.0);  // i = 0: only U = 0
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0].assign(1, 1.0);  // j = 0: only U = 0
    for (std::size_t j = 1; j <= n; ++j) {
      cur[j].assign(i * j + 1, 0.0);
      // f(i,j,u) = f(i-1,j,u-j) + f(i,j-1,u)
      for (std::size_t u = 0; u < prev[j].size(); ++u) cur[j][u + j] += prev[j][u];
      for (std::size_t u = 0; u < cur[j - 1].size(); ++u) cur[j][u] += cur[j - 1][u];
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

long long choose2(long long t) { return t * (t - 1) / 2; }

}  // namespace

std::string_view to_string(PMethod m) {
  switch (m) {
    case PMethod::Exact: return "exact";
    case PMethod::NormalApprox: return "normal_approx";
    case PMethod::TDistribution: break;
  }
  return "t_distribution";
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b, MannWhitneyMethod method) {
  if (a.empty() || b.empty()) throw StatsError("mann_whitney_u needs non-empty samples");
  const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  const double rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(n1), 0.0);

  TestResult res;
  res.n1 = n1;
  res.n2 = n2;
  res.statistic = rank_sum_a - static_cast<double>(n1 * (n1 + 1)) / 2.0;
  const double mu = static_cast<double>(n1 * n2) / 2.0;

  // Tie correction term: sum of t^3 - t over groups of equal values.
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0;
  bool ties = false;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    if (t > 1) ties = true;
    tie_term += t * t * t - t;
    i = j + 1;
  }

  if (method == MannWhitneyMethod::Exact && ties) throw StatsError("exact Mann-Whitney p requires tie-free samples");
  const bool exact = method == MannWhitneyMethod::Exact ||
                     (method == MannWhitneyMethod::Auto && !ties && n <= kExactMannWhitneyMax);
  if (exact) {
    const auto counts = u_distribution(n1, n2);
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const auto u = static_cast<std::size_t>(std::llround(res.statistic));
    const double lower = std::accumulate(counts.begin(), counts.begin() + static_cast<long>(u) + 1, 0.0);
    const double upper = std::accumulate(counts.begin() + static_cast<long>(u), counts.end(), 0.0);
    res.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / total);
    res.method = PMethod::Exact;
    return res;
  }

  const double nn = static_cast<double>(n);
  const double var = static_cast<double>(n1 * n2) / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
  res.method = PMethod::NormalApprox;
  if (!(var > 0)) {
    res.statistic = mu;
    res.p_value = 1.0;
    res.degenerate = true;
    return res;
  }
  const double z = std::max(0.0, std::abs(res.statistic - mu) - 0.5) / std::sqrt(var);
  res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return res;
}

TestResult pearson(std::span<const double> x, std::span<const double> y) {
  require_paired(x, y);
  TestResult res;
  res.n1 = res.n2 = x.size();
  res.statistic = correlation(x, y);
  res.p_value = t_test_p(res.statistic, x.size());
  res.method = PMethod::TDistribution;
  return res;
}

TestResult spearman(std::span<const double> x, std::span<const double> y) {
  require_paired(x, y);
  const auto rx = midranks(x), ry = midranks(y);
  TestResult res;
  res.n1 = res.n2 = x.size();
  res.statistic = correlation(rx, ry);
  const std::size_t n = x.size();
  if (n <= kExactSpearmanMax && !has_ties(x) && !has_ties(y)) {
    // rho = 1 - 6D/(n^3 - n) with D the sum of squared rank differences.
    std::vector<long long> px(n), py(n);
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = std::llround(rx[i]);
      py[i] = std::llround(ry[i]);
    }
    auto sum_d2 = [&](const std::vector<long long>& perm) {
      long long d = 0;
      for (std::size_t i = 0; i < n; ++i) d += (px[i] - perm[i]) * (px[i] - perm[i]);
      return d;
    };
    const long long scale = static_cast<long long>(n * n * n - n);
    const long long observed = std::llabs(scale - 6 * sum_d2(py));
    std::vector<long long> perm(n);
    std::iota(perm.begin(), perm.end(), 1);
    long long extreme = 0, total = 0;
    do {
      ++total;
      if (std::llabs(scale - 6 * sum_d2(perm)) >= observed) ++extreme;
    } while (std::next_permutation(perm.begin(), perm.end()));
    res.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    res.method = PMethod::Exact;
  } else {
    res.p_value = t_test_p(res.statistic, n);
    res.method = PMethod::TDistribution;
  }
  return res;
}

PairCounts count_pairs(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (y.size() != n) throw StatsError("paired samples must have equal length");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });

  long long tied_x = 0, tied_xy = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i, k = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    tied_x += choose2(static_cast<long long>(j - i + 1));
    while (k <= j) {
      std::size_t m = k;
      while (m + 1 <= j && y[order[m + 1]] == y[order[k]]) ++m;
      tied_xy += choose2(static_cast<long long>(m - k + 1));
      k = m + 1;
    }
    i = j + 1;
  }

  // Bottom-up merge sort on y counting strict inversions.
  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  long long inversions = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n), hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (ys[j] < ys[i]) {
          inversions += static_cast<long long>(mid - i);
          buf[k++] = ys[j++];
        } else {
          buf[k++] = ys[i++];
        }
      }
      while (i < mid) buf[k++] = ys[i++];
      while (j < hi) buf[k++] = ys[j++];
    }
    std::swap(ys, buf);
  }

  long long tied_y = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && ys[j + 1] == ys[i]) ++j;
    tied_y += choose2(static_cast<long long>(j - i + 1));
    i = j + 1;
  }

  const long long total = choose2(static_cast<long long>(n));
  PairCounts c;
  c.ties_xy = tied_xy;
  c.ties_x = tied_x - tied_xy;
  c.ties_y = tied_y - tied_xy;
  c.discordant = inversions;
  c.concordant = total - tied_x - tied_y + tied_xy - inversions;
  return c;
}

TestResult kendall_tau(std::span<const double> x, std::span<const double> y) {
  require_paired(x, y);
  const std::size_t n = x.size();
  const PairCounts c = count_pairs(x, y);
  const double total = static_cast<double>(choose2(static_cast<long long>(n)));
  const double tx = static_cast<double>(c.ties_x + c.ties_xy), ty = static_cast<double>(c.ties_y + c.ties_xy);
  if (tx == total || ty == total) throw StatsError("kendall_tau undefined: a sample has zero variance");

  TestResult res;
  res.n1 = res.n2 = n;
  const double s = static_cast<double>(c.concordant - c.discordant);
  res.statistic = s / std::sqrt((total - tx) * (total - ty));

  // Tie-group sums for the variance of S.
  auto tie_sums = [](std::span<const double> v) {
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    double pairs = 0, cubic = 0, spread = 0;
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      pairs += t * (t - 1) / 2;
      cubic += t * (t - 1) * (t - 2);
      spread += t * (t - 1) * (2 * t + 5);
      i = j + 1;
    }
    return std::array<double, 3>{pairs, cubic, spread};
  };
  const auto [xpairs, xcubic, xspread] = tie_sums(x);
  const auto [ypairs, ycubic, yspread] = tie_sums(y);
  const double nn = static_cast<double>(n);
  const double m = nn * (nn - 1);
  const double var = (m * (2 * nn + 5) - xspread - yspread) / 18.0 + (2 * xpairs * ypairs) / m +
                     xcubic * ycubic / (9 * m * (nn - 2));
  res.p_value = std::min(1.0, std::erfc(std::abs(s) / std::sqrt(var) / std::sqrt(2.0)));
  res.method = PMethod::NormalApprox;
  return res;
}

std::string_view significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

}  // namespace storynet::stats
