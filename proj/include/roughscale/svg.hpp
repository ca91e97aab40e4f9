#pragma once

#include <string>
#include <vector>

namespace roughscale::svg {

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
};

/// Nearest-cell heatmap; values[row][col], row 0 drawn at the bottom.
/// NaN cells are left grey. The colour scale is symmetric around zero.
std::string heatmap(const std::vector<std::vector<double>>& values, const std::vector<double>& row_coords,
                    const std::vector<double>& col_coords, const Axes& axes);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  ///< optional symmetric error bars
};

std::string line_plot(const std::vector<Series>& series, const Axes& axes);

/// Scatter with optional point labels; points listed in `highlight` are drawn in red.
std::string scatter(const std::vector<double>& x, const std::vector<double>& y, const std::vector<std::string>& labels,
                    const std::vector<int>& highlight, const Axes& axes);

}  // namespace roughscale::svg
