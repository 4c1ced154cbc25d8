#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles/oracles.hpp"
#include "storynet/stats.hpp"

using namespace storynet::stats;
using V = std::vector<double>;

TEST_CASE("midranks") {
  CHECK(midranks(V{3, 1, 2}) == V{3, 1, 2});
  CHECK(midranks(V{1, 2, 2, 3}) == V{1, 2.5, 2.5, 4});
  CHECK(midranks(V{5, 5, 5}) == V{2, 2, 2});
}

TEST_CASE("mann-whitney hand values") {
  const auto r = mann_whitney_u(V{1, 2, 3}, V{4, 5, 6});
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.method == PMethod::Exact);
  const auto flipped = mann_whitney_u(V{4, 5, 6}, V{1, 2, 3});
  CHECK(flipped.statistic == 9.0);
  CHECK(flipped.p_value == doctest::Approx(0.1).epsilon(1e-12));

  const auto tied = mann_whitney_u(V{1, 2, 2}, V{2, 3, 4});
  CHECK(tied.method == PMethod::NormalApprox);
  const auto flat = mann_whitney_u(V{2, 2}, V{2, 2, 2});
  CHECK(flat.degenerate);
  CHECK(flat.p_value == 1.0);
  CHECK_THROWS_AS(mann_whitney_u(V{}, V{1}), StatsError);
}

TEST_CASE("mann-whitney matches exact enumeration and symmetry") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n1 = 1 + rng() % 8, n2 = 1 + rng() % 8;
    V a(n1), b(n2);
    for (auto& v : a) v = u(rng);
    for (auto& v : b) v = u(rng) + 0.3;
    const auto ab = mann_whitney_u(a, b), ba = mann_whitney_u(b, a);
    CHECK(ab.statistic + ba.statistic == doctest::Approx(static_cast<double>(n1 * n2)));
    CHECK(ab.statistic == oracle::mann_whitney_u(a, b));
    CHECK(ab.method == PMethod::Exact);
    CHECK(ab.p_value == doctest::Approx(oracle::mann_whitney_exact_p(a, b)).epsilon(1e-12));
    CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
    CHECK(ab.p_value > 0.0);
    CHECK(ab.p_value <= 1.0);
    // Strictly increasing transforms leave the test unchanged.
    V ea(a), eb(b);
    for (auto& v : ea) v = std::exp(3 * v);
    for (auto& v : eb) v = std::exp(3 * v);
    const auto t = mann_whitney_u(ea, eb);
    CHECK(t.statistic == ab.statistic);
    CHECK(t.p_value == ab.p_value);
  }
}

TEST_CASE("exact and normal approximations agree at 8 + 8") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  double worst = 0;
  for (int trial = 0; trial < 40; ++trial) {
    V a(8), b(8);
    for (auto& v : a) v = nd(rng);
    for (auto& v : b) v = nd(rng) + 0.5;
    const double exact = mann_whitney_u(a, b).p_value;
    const auto normal = mann_whitney_u(a, b, MannWhitneyMethod::Normal);
    CHECK(normal.method == PMethod::NormalApprox);
    const double u = oracle::mann_whitney_u(a, b);
    const double z = (std::abs(u - 32) - 0.5) / std::sqrt(8.0 * 8 * 17 / 12);
    CHECK(normal.p_value == doctest::Approx(std::erfc(std::max(0.0, z) / std::sqrt(2.0))).epsilon(1e-12));
    const double approx = normal.p_value;
    worst = std::max(worst, std::abs(exact - approx));
  }
  CHECK(worst < 0.02);
}

TEST_CASE("large samples use the normal approximation") {
  V a(20), b(20);
  std::iota(a.begin(), a.end(), 0.0);
  std::iota(b.begin(), b.end(), 10.0);
  const auto r = mann_whitney_u(a, b);
  CHECK(r.method == PMethod::NormalApprox);
  CHECK(r.statistic == oracle::mann_whitney_u(a, b));
  CHECK(r.p_value < 0.01);
  const auto forced = mann_whitney_u(V{1, 5, 9}, V{2, 3, 4, 6, 7, 8, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19},
                                     MannWhitneyMethod::Exact);
  CHECK(forced.method == PMethod::Exact);
  CHECK(forced.p_value == doctest::Approx(oracle::mann_whitney_exact_p(V{1, 5, 9}, V{2, 3, 4, 6, 7, 8, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19})));
  CHECK_THROWS_AS(mann_whitney_u(V{1, 2}, V{2, 3}, MannWhitneyMethod::Exact), StatsError);
}

TEST_CASE("pearson") {
  const auto r = pearson(V{1, 2, 3, 4}, V{2, 4, 6, 8});
  CHECK(r.statistic == doctest::Approx(1.0));
  CHECK(r.p_value == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r.method == PMethod::TDistribution);
  const auto s = pearson(V{1, 2, 3, 4, 5}, V{2, 1, 4, 3, 5});
  CHECK(s.statistic == doctest::Approx(0.8));
  CHECK_THROWS_AS(pearson(V{1, 1, 1}, V{1, 2, 3}), StatsError);
  CHECK_THROWS_AS(pearson(V{1, 2}, V{1, 2, 3}), StatsError);
}

TEST_CASE("spearman permutation p") {
  const V x{1, 2, 3, 4, 5, 6};
  const V y{2, 1, 4, 3, 6, 5};
  const auto r = spearman(x, y);
  CHECK(r.statistic == doctest::Approx(1.0 - 6.0 * 6 / (6 * 35)));
  CHECK(r.method == PMethod::Exact);
  CHECK(r.p_value == doctest::Approx(oracle::spearman_permutation_p(x, y)).epsilon(1e-12));
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng() % 6;
    V a(n), b(n);
    std::iota(a.begin(), a.end(), 0.0);
    std::iota(b.begin(), b.end(), 0.0);
    std::shuffle(b.begin(), b.end(), rng);
    CHECK(spearman(a, b).p_value == doctest::Approx(oracle::spearman_permutation_p(a, b)).epsilon(1e-12));
  }
  V big(12), rev(12);
  std::iota(big.begin(), big.end(), 0.0);
  std::reverse_copy(big.begin(), big.end(), rev.begin());
  const auto far = spearman(big, rev);
  CHECK(far.statistic == doctest::Approx(-1.0));
  CHECK(far.method == PMethod::TDistribution);
}

TEST_CASE("kendall pair counts against brute force") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 30;
    V x(n), y(n);
    for (auto& v : x) v = static_cast<double>(rng() % 5);
    for (auto& v : y) v = static_cast<double>(rng() % 5);
    const auto c = count_pairs(x, y);
    const auto o = oracle::count_pairs(x, y);
    CHECK(c.concordant == o.concordant);
    CHECK(c.discordant == o.discordant);
    CHECK(c.ties_x == o.ties_x);
    CHECK(c.ties_y == o.ties_y);
    CHECK(c.ties_xy == o.ties_xy);
    CHECK(c.concordant + c.discordant + c.ties_x + c.ties_y + c.ties_xy ==
          static_cast<long long>(n * (n - 1) / 2));
    const bool x_flat = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
    const bool y_flat = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    if (n >= 3 && !x_flat && !y_flat) {
      const auto k = kendall_tau(x, y);
      CHECK(k.statistic == doctest::Approx(oracle::kendall_tau_b(x, y)).epsilon(1e-12));
      CHECK(std::abs(k.statistic) <= 1.0 + 1e-12);
      CHECK(k.p_value >= 0.0);
      CHECK(k.p_value <= 1.0);
    }
  }
}

TEST_CASE("kendall hand value") {
  const auto k = kendall_tau(V{1, 2, 3, 4}, V{1, 3, 2, 4});
  CHECK(k.statistic == doctest::Approx(4.0 / 6.0));
  CHECK_THROWS_AS(kendall_tau(V{1, 1, 1}, V{1, 2, 3}), StatsError);
}

TEST_CASE("stars and summaries") {
  CHECK(significance_stars(0.0005) == "***");
  CHECK(significance_stars(0.005) == "**");
  CHECK(significance_stars(0.049) == "*");
  CHECK(significance_stars(0.05) == "");
  CHECK(mean(V{1, 2, 3}) == 2.0);
  CHECK(sample_std(V{1, 2, 3}) == doctest::Approx(1.0));
  CHECK(sample_std(V{4}) == 0.0);
  CHECK(to_string(PMethod::Exact) != to_string(PMethod::NormalApprox));
}
