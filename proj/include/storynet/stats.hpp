#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace storynet::stats {

enum class PMethod { Exact, NormalApprox, TDistribution };

std::string_view to_string(PMethod m);

struct TestResult {
  double statistic = 0;
  double p_value = 1;  // two-sided
  PMethod method = PMethod::NormalApprox;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  bool degenerate = false;
};

class StatsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Average ranks (1-based) with ties sharing their midrank.
std::vector<double> midranks(std::span<const double> values);

// Largest total sample size for which the exact null distribution is used.
inline constexpr std::size_t kExactMannWhitneyMax = 16;
// Largest n for which Spearman's p is obtained by full permutation.
inline constexpr std::size_t kExactSpearmanMax = 9;

enum class MannWhitneyMethod { Auto, Exact, Normal };

// U of the first sample; two-sided p. Auto is exact when |a|+|b| <= 16 with
// no ties, otherwise normal approximation with tie and continuity
// corrections. Forcing Exact on tied data throws.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                          MannWhitneyMethod method = MannWhitneyMethod::Auto);

// Sample correlation; two-sided p from Student's t with n-2 df.
TestResult pearson(std::span<const double> x, std::span<const double> y);

// Pearson on midranks. Tie-free samples with n <= 9 get an exact
// permutation p-value.
TestResult spearman(std::span<const double> x, std::span<const double> y);

// Kendall's tau-b; two-sided p from the tie-corrected normal approximation.
TestResult kendall_tau(std::span<const double> x, std::span<const double> y);

struct PairCounts {
  long long concordant = 0;
  long long discordant = 0;
  long long ties_x = 0;   // tied in x only
  long long ties_y = 0;   // tied in y only
  long long ties_xy = 0;  // tied in both
};

// O(n log n) pair classification (merge-sort inversion counting).
PairCounts count_pairs(std::span<const double> x, std::span<const double> y);

// "***" below 0.001, "**" below 0.01, "*" below 0.05, else "".
std::string_view significance_stars(double p);

double mean(std::span<const double> v);
// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
double sample_std(std::span<const double> v);

}  // namespace storynet::stats
