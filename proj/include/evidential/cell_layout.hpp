#pragma once

#include <string>
#include <vector>

#include "evidential/linear_model.hpp"

namespace evidential {

/// Assignment of observations to cells (treatment level combinations).
class CellLayout {
 public:
  /// cell_of[i] in 0..C-1 for every observation; every cell index below the
  /// maximum must be used. Throws SpecError otherwise.
  explicit CellLayout(std::vector<int> cell_of, std::vector<std::string> names = {});

  Index size() const noexcept { return static_cast<Index>(cell_of_.size()); }
  int num_cells() const noexcept { return static_cast<int>(counts_.size()); }
  int cell_of(Index i) const { return cell_of_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& assignment() const noexcept { return cell_of_; }
  const std::vector<Index>& counts() const noexcept { return counts_; }
  const std::vector<Index>& members(int cell) const { return members_[static_cast<std::size_t>(cell)]; }

  /// Display name of a cell ("cell 1" for index 0 when none were supplied).
  std::string name(int cell) const;

  /// Throws StratificationError naming the first cell with fewer than two observations.
  void require_replicated() const;

 private:
  std::vector<int> cell_of_;
  std::vector<std::string> names_;
  std::vector<Index> counts_;
  std::vector<std::vector<Index>> members_;
};

/// Median-centered, variance-inflated residuals per cell:
/// pool[c] = (y_i - median_c) * sqrt(n_c / (n_c - 1)) over members of c.
struct StratifiedPools {
  std::vector<double> medians;
  std::vector<std::vector<double>> pools;
};

StratifiedPools stratified_pools(const Eigen::VectorXd& y, const CellLayout& layout);

/// Median with the even-count convention of averaging the two middle order statistics.
double median(std::vector<double> values);

}  // namespace evidential
