#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "storynet/ml.hpp"
#include "storynet/stats.hpp"

namespace storynet::ml {

namespace {

void check_labels(std::span<const int> y) {
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] < 0 || y[i] >= kClasses)
      throw std::invalid_argument("label " + std::to_string(y[i]) + " at position " + std::to_string(i) +
                                  " outside {0,1,2}");
}

// Binary ROC AUC via the Mann-Whitney identity with midranks for ties.
double binary_auc(std::span<const double> scores, const std::vector<char>& positive) {
  double npos = 0, nneg = 0;
  for (char p : positive) (p ? npos : nneg) += 1;
  if (npos == 0 || nneg == 0) return std::numeric_limits<double>::quiet_NaN();
  const auto ranks = stats::midranks(scores);
  double rank_sum = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (positive[i]) rank_sum += ranks[i];
  return (rank_sum - npos * (npos + 1) / 2.0) / (npos * nneg);
}

MeanStd summarize(const std::vector<double>& v) {
  return {stats::mean(v), stats::sample_std(v)};
}

double safe_div(double a, double b) { return b > 0 ? a / b : 0.0; }

std::string cell(const MeanStd& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f", m.mean, m.std);
  return buf;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("label vectors differ in length");
  check_labels(y_true);
  check_labels(y_pred);
  ConfusionMatrix m = ConfusionMatrix::Zero();
  for (std::size_t i = 0; i < y_true.size(); ++i) ++m(y_true[i], y_pred[i]);
  return m;
}

std::array<double, kClasses> roc_auc_ovr(std::span<const int> y_true, const Eigen::MatrixXd& probs) {
  if (static_cast<std::size_t>(probs.rows()) != y_true.size() || probs.cols() != kClasses)
    throw std::invalid_argument("probability matrix shape does not match labels");
  check_labels(y_true);
  std::array<double, kClasses> out{};
  std::vector<double> scores(y_true.size());
  std::vector<char> positive(y_true.size());
  for (int c = 0; c < kClasses; ++c) {
    for (std::size_t i = 0; i < y_true.size(); ++i) {
      scores[i] = probs(static_cast<Eigen::Index>(i), c);
      positive[i] = y_true[i] == c;
    }
    out[c] = binary_auc(scores, positive);
  }
  return out;
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> y, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("cross-validation needs k >= 2");
  check_labels(y);
  std::array<std::vector<std::size_t>, kClasses> members;
  for (std::size_t i = 0; i < y.size(); ++i) members[y[i]].push_back(i);
  for (int c = 0; c < kClasses; ++c)
    if (!members[c].empty() && static_cast<int>(members[c].size()) < k)
      throw std::invalid_argument("class " + std::to_string(c) + " has " + std::to_string(members[c].size()) +
                                  " members, fewer than k = " + std::to_string(k) + "; use a smaller k");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  // Continue the deal across classes so fold sizes stay within one of each other.
  std::size_t next = 0;
  for (auto& m : members) {
    std::shuffle(m.begin(), m.end(), rng);
    for (std::size_t idx : m) folds[next++ % static_cast<std::size_t>(k)].push_back(idx);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

CvReport cross_validate(const ModelSpec& spec, const Eigen::MatrixXd& X, std::span<const int> y, int k,
                        std::uint64_t seed) {
  validate_training_data(X, y, spec.kind == ModelKind::Gbt, 2);
  const auto folds = stratified_folds(y, k, seed);
  const std::size_t n = y.size();

  CvReport r;
  r.folds = k;
  r.seed = seed;
  r.oof_probs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), kClasses);

  std::array<std::vector<double>, kClasses> prec, rec, f1;
  std::vector<double> acc, auc_macro, auc_weighted;
  std::array<long long, kClasses> support{};
  for (int label : y) ++support[label];

  for (int f = 0; f < k; ++f) {
    const auto& test = folds[static_cast<std::size_t>(f)];
    std::vector<char> in_test(n, 0);
    for (std::size_t i : test) in_test[i] = 1;
    std::vector<Eigen::Index> train_rows;
    std::vector<int> y_train;
    for (std::size_t i = 0; i < n; ++i)
      if (!in_test[i]) {
        train_rows.push_back(static_cast<Eigen::Index>(i));
        y_train.push_back(y[i]);
      }
    const Eigen::MatrixXd X_train = X(train_rows, Eigen::all);

    ModelSpec fold_spec = spec;
    fold_spec.gbt.seed = spec.gbt.seed + static_cast<std::uint64_t>(f);
    fold_spec.tree.seed = spec.tree.seed + static_cast<std::uint64_t>(f);
    fold_spec.forest.seed = spec.forest.seed + static_cast<std::uint64_t>(f);
    const auto model = train_model(fold_spec, X_train, y_train);

    std::vector<int> y_test, y_pred;
    Eigen::MatrixXd probs(static_cast<Eigen::Index>(test.size()), kClasses);
    for (std::size_t t = 0; t < test.size(); ++t) {
      const std::size_t i = test[t];
      const ClassProbs p = model->predict_proba(X.row(static_cast<Eigen::Index>(i)));
      probs.row(static_cast<Eigen::Index>(t)) = p.transpose();
      r.oof_probs.row(static_cast<Eigen::Index>(i)) = p.transpose();
      Eigen::Index best = 0;
      p.maxCoeff(&best);
      y_test.push_back(y[i]);
      y_pred.push_back(static_cast<int>(best));
    }
    const ConfusionMatrix cm = confusion_matrix(y_test, y_pred);
    r.confusion += cm;
    acc.push_back(static_cast<double>(cm.trace()) / static_cast<double>(test.size()));

    for (int c = 0; c < kClasses; ++c) {
      const double tp = static_cast<double>(cm(c, c));
      const double predicted = static_cast<double>(cm.col(c).sum());
      const double actual = static_cast<double>(cm.row(c).sum());
      const double p = safe_div(tp, predicted), rc = safe_div(tp, actual);
      prec[c].push_back(p);
      rec[c].push_back(rc);
      f1[c].push_back(safe_div(2 * p * rc, p + rc));
    }

    const auto aucs = roc_auc_ovr(y_test, probs);
    double macro = 0, weighted = 0, wsum = 0;
    int defined = 0;
    for (int c = 0; c < kClasses; ++c) {
      if (std::isnan(aucs[c])) continue;
      const double w = static_cast<double>(cm.row(c).sum());
      macro += aucs[c];
      weighted += w * aucs[c];
      wsum += w;
      ++defined;
    }
    auc_macro.push_back(defined ? macro / defined : std::numeric_limits<double>::quiet_NaN());
    auc_weighted.push_back(wsum > 0 ? weighted / wsum : std::numeric_limits<double>::quiet_NaN());
  }

  r.fold_accuracy = acc;
  r.accuracy = summarize(acc);
  r.roc_auc_macro = summarize(auc_macro);
  r.roc_auc_weighted = summarize(auc_weighted);
  const double total = static_cast<double>(n);
  for (int c = 0; c < kClasses; ++c) {
    ClassMetrics& m = r.per_class[c];
    m.precision = summarize(prec[c]);
    m.recall = summarize(rec[c]);
    m.f1 = summarize(f1[c]);
    m.support = support[c];
    r.macro_avg.precision += m.precision.mean / kClasses;
    r.macro_avg.recall += m.recall.mean / kClasses;
    r.macro_avg.f1 += m.f1.mean / kClasses;
    const double w = static_cast<double>(support[c]) / total;
    r.weighted_avg.precision += w * m.precision.mean;
    r.weighted_avg.recall += w * m.recall.mean;
    r.weighted_avg.f1 += w * m.f1.mean;
  }
  return r;
}

std::string render_classification_report(const CvReport& r, std::string_view title) {
  std::ostringstream out;
  out << "### " << title << "\n\n";
  out << "Cross-validated (" << r.folds << "-fold, stratified, seed " << r.seed
      << ") classification report; ± is the sample standard deviation across folds.\n\n";
  out << "| class | precision | recall | f1-score | support |\n";
  out << "|---|---|---|---|---|\n";
  long long total = 0;
  for (int c = 0; c < kClasses; ++c) {
    const ClassMetrics& m = r.per_class[c];
    out << "| " << c << " | " << cell(m.precision) << " | " << cell(m.recall) << " | " << cell(m.f1) << " | "
        << m.support << " |\n";
    total += m.support;
  }
  out << "| accuracy | | | " << cell(r.accuracy) << " | " << total << " |\n";
  out << "| macro avg | " << fixed2(r.macro_avg.precision) << " | " << fixed2(r.macro_avg.recall) << " | "
      << fixed2(r.macro_avg.f1) << " | " << total << " |\n";
  out << "| weighted avg | " << fixed2(r.weighted_avg.precision) << " | " << fixed2(r.weighted_avg.recall) << " | "
      << fixed2(r.weighted_avg.f1) << " | " << total << " |\n";
  out << "| roc_auc (macro OvR) | | | " << cell(r.roc_auc_macro) << " | " << total << " |\n";
  out << "| roc_auc (weighted OvR) | | | " << cell(r.roc_auc_weighted) << " | " << total << " |\n";
  return out.str();
}

}  // namespace storynet::ml
