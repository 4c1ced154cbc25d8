#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "storynet/csv.hpp"
#include "storynet/ml.hpp"
#include "support.hpp"

using namespace storynet::ml;

namespace {

struct Data {
  Eigen::MatrixXd X;
  std::vector<int> y;
};

Data load_blobs(const std::string& name) {
  std::ifstream in(testing::fixture("ml/" + name));
  const auto rows = storynet::csv::read_all(in);
  Data d;
  d.X.resize(static_cast<Eigen::Index>(rows.size() - 1), 4);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    for (int c = 0; c < 4; ++c) d.X(static_cast<Eigen::Index>(r - 1), c) = std::stod(rows[r][c]);
    d.y.push_back(std::stoi(rows[r][4]));
  }
  return d;
}

ModelSpec gbt_spec(int rounds = 50) {
  ModelSpec s;
  s.gbt.rounds = rounds;
  s.gbt.max_depth = 3;
  return s;
}

}  // namespace

TEST_CASE("blobs are learnable and shuffled labels are not") {
  const auto blobs = load_blobs("blobs.csv");
  REQUIRE(blobs.X.rows() == 300);
  for (auto kind : {ModelKind::Gbt, ModelKind::DecisionTree, ModelKind::RandomForest}) {
    auto spec = gbt_spec();
    spec.kind = kind;
    spec.forest.trees = 30;
    const auto cv = cross_validate(spec, blobs.X, blobs.y, 4, 0);
    CAPTURE(to_string(kind));
    CHECK(cv.accuracy.mean >= 0.95);
    CHECK(cv.confusion.sum() == 300);
    CHECK(cv.oof_probs.rows() == 300);
    CHECK((cv.oof_probs.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
  }
  const auto shuffled = load_blobs("blobs_shuffled.csv");
  const auto cv = cross_validate(gbt_spec(), shuffled.X, shuffled.y, 4, 0);
  CHECK(cv.accuracy.mean >= 0.23);
  CHECK(cv.accuracy.mean <= 0.43);
}

TEST_CASE("training log-loss does not increase") {
  const auto blobs = load_blobs("blobs.csv");
  GbtParams p;
  p.rounds = 40;
  p.max_depth = 3;
  const auto m = train_gbt(blobs.X, blobs.y, p);
  REQUIRE(m.train_log_loss.size() == 40);
  for (std::size_t i = 1; i < m.train_log_loss.size(); ++i)
    CHECK(m.train_log_loss[i] <= m.train_log_loss[i - 1] + 1e-12);
  CHECK(m.train_log_loss.back() == doctest::Approx(log_loss(m.predict_proba_rows(blobs.X), blobs.y)).epsilon(1e-9));
}

TEST_CASE("training is deterministic and serialisation round-trips") {
  const auto blobs = load_blobs("blobs.csv");
  for (auto kind : {ModelKind::Gbt, ModelKind::DecisionTree, ModelKind::RandomForest}) {
    auto spec = gbt_spec(20);
    spec.kind = kind;
    spec.forest.trees = 10;
    spec.forest.seed = 3;
    const auto a = train_model(spec, blobs.X, blobs.y)->to_json().dump();
    const auto b = train_model(spec, blobs.X, blobs.y)->to_json().dump();
    CHECK(a == b);
    const auto reloaded = model_from_json(nlohmann::json::parse(a));
    CHECK(reloaded->to_json().dump() == a);
    const auto original = train_model(spec, blobs.X, blobs.y);
    CHECK((reloaded->predict_proba_rows(blobs.X) - original->predict_proba_rows(blobs.X)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("zero rounds predict uniform probabilities") {
  const auto blobs = load_blobs("blobs.csv");
  GbtParams p;
  p.rounds = 0;
  const auto m = train_gbt(blobs.X, blobs.y, p);
  const auto probs = m.predict_proba_rows(blobs.X);
  CHECK((probs.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("shallow trees recover thresholds") {
  Eigen::MatrixXd X(60, 2);
  std::vector<int> y(60);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 60; ++i) {
    X(i, 0) = u(rng);
    X(i, 1) = i / 60.0;
    y[i] = i < 20 ? 0 : i < 40 ? 1 : 2;
  }
  GbtParams p;
  p.rounds = 1;
  p.max_depth = 1;
  const auto m = train_gbt(X, y, p);
  const auto& low = m.trees[0][0].nodes[0];
  CHECK(low.feature == 1);
  CHECK(low.threshold > 19 / 60.0);
  CHECK(low.threshold <= 20 / 60.0);
  const auto& high = m.trees[0][2].nodes[0];
  CHECK(high.feature == 1);
  CHECK(high.threshold > 39 / 60.0);
  CHECK(high.threshold <= 40 / 60.0);
  TreeParams tp;
  tp.max_depth = 2;
  const auto tree = train_decision_tree(X, y, tp);
  CHECK(tree.tree.nodes[0].feature == 1);
  CHECK(tree.tree.depth() == 2);
  for (int i = 0; i < 60; ++i) CHECK(tree.predict(X.row(i)) == y[i]);
}

TEST_CASE("depth limits are respected") {
  const auto blobs = load_blobs("blobs_shuffled.csv");
  GbtParams p;
  p.rounds = 5;
  p.max_depth = 2;
  const auto m = train_gbt(blobs.X, blobs.y, p);
  for (const auto& round : m.trees)
    for (const auto& t : round) CHECK(t.depth() <= 2);
  TreeParams tp;
  tp.max_depth = 4;
  CHECK(train_decision_tree(blobs.X, blobs.y, tp).tree.depth() <= 4);
}

TEST_CASE("stratified folds") {
  std::vector<int> y;
  for (int i = 0; i < 30; ++i) y.push_back(i < 18 ? 0 : i < 27 ? 1 : 2);
  const auto folds = stratified_folds(y, 3, 42);
  REQUIRE(folds.size() == 3);
  std::set<std::size_t> seen;
  for (const auto& f : folds) {
    int counts[3] = {0, 0, 0};
    for (auto i : f) {
      CHECK(seen.insert(i).second);
      ++counts[y[i]];
    }
    CHECK(counts[0] == 6);
    CHECK(counts[1] == 3);
    CHECK(counts[2] == 1);
  }
  CHECK(seen.size() == 30);
  CHECK(stratified_folds(y, 3, 42) == folds);
  CHECK(stratified_folds(y, 3, 43) != folds);
  CHECK_THROWS(stratified_folds(y, 1, 0));
}

TEST_CASE("confusion matrix and auc") {
  const std::vector<int> t{0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2};
  const std::vector<int> p{0, 0, 1, 2, 1, 1, 1, 0, 2, 2, 0, 2};
  const auto cm = confusion_matrix(t, p);
  ConfusionMatrix expect;
  expect << 2, 1, 1, 1, 3, 0, 1, 0, 3;
  CHECK(cm == expect);
  CHECK(cm.sum() == 12);

  Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(12, 3);
  for (int i = 0; i < 12; ++i) probs(i, t[i]) = 1.0;
  const auto auc = roc_auc_ovr(t, probs);
  for (double a : auc) CHECK(a == 1.0);
  const std::vector<int> only0(12, 0);
  CHECK(std::isnan(roc_auc_ovr(only0, probs)[1]));
}

TEST_CASE("invalid training data") {
  Eigen::MatrixXd X(3, 2);
  X << 1, 2, 3, 4, 5, 6;
  CHECK_THROWS_AS(validate_training_data(X, std::vector<int>{0, 1}, false, 1), TrainingError);
  CHECK_THROWS_AS(validate_training_data(X, std::vector<int>{0, 1, 3}, false, 1), TrainingError);
  CHECK_THROWS_AS(validate_training_data(X, std::vector<int>{0, 1, 1}, true, 1), TrainingError);
  X(0, 0) = std::nan("");
  CHECK_THROWS_AS(validate_training_data(X, std::vector<int>{0, 1, 2}, false, 1), TrainingError);
  CHECK(parse_model_kind("random-forest") == ModelKind::RandomForest);
  CHECK_THROWS(parse_model_kind("svm"));
}

TEST_CASE("classification report renders") {
  const auto blobs = load_blobs("blobs.csv");
  const auto cv = cross_validate(gbt_spec(10), blobs.X, blobs.y, 4, 0);
  const auto md = render_classification_report(cv, "Blobs");
  CHECK(md.find("Blobs") != std::string::npos);
  CHECK(md.find("±") != std::string::npos);
  CHECK(cv.fold_accuracy.size() == 4);
}
