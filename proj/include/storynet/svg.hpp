#pragma once

#include <string>
#include <vector>

namespace storynet::svg {

struct Series {
  std::string name;
  std::vector<double> values;
  std::vector<double> errors;  // optional symmetric error bars
};

// Vertical grouped bars; one group per category, one bar per series.
std::string grouped_bars(const std::string& title, const std::vector<std::string>& categories,
                         const std::vector<Series>& series, const std::string& y_label);

// Horizontal grouped bars, categories listed top to bottom.
std::string grouped_hbars(const std::string& title, const std::vector<std::string>& categories,
                          const std::vector<Series>& series, const std::string& x_label);

// Annotated matrix heatmap (e.g. a confusion matrix).
std::string heatmap(const std::string& title, const std::vector<std::vector<double>>& cells,
                    const std::vector<std::string>& row_labels, const std::vector<std::string>& col_labels,
                    const std::string& row_axis, const std::string& col_axis);

struct SwarmPoint {
  int row = 0;  // category index
  double x = 0;
  int color = 0;  // legend index
};

// One horizontal strip per category; points jittered deterministically.
std::string beeswarm(const std::string& title, const std::vector<std::string>& categories,
                     const std::vector<SwarmPoint>& points, const std::vector<std::string>& legend,
                     const std::string& x_label);

// Escapes &, <, >, " for text content and attributes.
std::string escape(const std::string& s);

}  // namespace storynet::svg
