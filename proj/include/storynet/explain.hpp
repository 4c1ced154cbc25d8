#pragma once

#include <array>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "storynet/ml.hpp"

namespace storynet::explain {

class ExplainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cover-weighted expected output of a single tree.
double expected_value(const ml::RegressionTree& tree);

// Path-dependent TreeSHAP for one tree; adds scale * phi_j into `phi`.
void tree_shap(const ml::RegressionTree& tree, const ml::RowRef& x, std::span<double> phi, double scale = 1.0);

struct ShapMatrix {
  std::array<Eigen::MatrixXd, ml::kClasses> values;  // per class: samples x features
  Eigen::Vector3d base_values = Eigen::Vector3d::Zero();

  Eigen::Index samples() const { return values[0].rows(); }
  Eigen::Index features() const { return values[0].cols(); }
};

struct SampleShap {
  std::array<Eigen::VectorXd, ml::kClasses> values;
  Eigen::Vector3d base_values;
};

// Attributions on the margin scale for one row.
SampleShap tree_shap(const ml::GbtModel& model, const ml::RowRef& x);

// Base values plus attributions for every row of X.
ShapMatrix shap_matrix(const ml::GbtModel& model, const Eigen::MatrixXd& X);

// Margin per class = base_score + lr * sum of expected leaf values.
Eigen::Vector3d base_values(const ml::GbtModel& model);

struct ImportanceSummary {
  Eigen::MatrixXd mean_abs;                              // classes x features
  std::array<std::vector<int>, ml::kClasses> class_rank;  // feature indices, most important first
  std::vector<int> global_rank;                          // by summed class means
};

ImportanceSummary mean_abs_shap(const ShapMatrix& shap);
ImportanceSummary mean_abs_shap(const ml::GbtModel& model, const Eigen::MatrixXd& X);

enum class Tercile { Weak, Moderate, Strong };
std::string_view to_string(Tercile t);

struct BeeswarmRow {
  int feature = 0;
  Eigen::Index sample = 0;
  double shap_value = 0;
  double feature_value = 0;
  Tercile tercile = Tercile::Weak;
};

// Linear-interpolated percentile (q in [0, 100]) of the values.
double percentile(std::vector<double> values, double q);

// Long-format rows, feature-major, for one class.
std::vector<BeeswarmRow> beeswarm_export(const Eigen::MatrixXd& X, const ShapMatrix& shap, int class_index);

// `sample_id,class,feature,shap_value,feature_value`
void write_shap_csv(std::ostream& out, const ShapMatrix& shap, const Eigen::MatrixXd& X,
                    std::span<const std::string> sample_ids, std::span<const std::string> feature_names);

// `class,feature,mean_abs_shap,rank`, rank 1 = most important within the class.
void write_importance_csv(std::ostream& out, const ImportanceSummary& imp,
                          std::span<const std::string> feature_names);

}  // namespace storynet::explain
