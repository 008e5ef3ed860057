#include "evidential/cell_layout.hpp"

#include <algorithm>
#include <cmath>

#include "evidential/error.hpp"

namespace evidential {

CellLayout::CellLayout(std::vector<int> cell_of, std::vector<std::string> names)
    : cell_of_(std::move(cell_of)), names_(std::move(names)) {
  if (cell_of_.empty()) throw SpecError("cell layout has no observations");
  const int top = *std::max_element(cell_of_.begin(), cell_of_.end());
  if (*std::min_element(cell_of_.begin(), cell_of_.end()) < 0) throw SpecError("negative cell index");
  counts_.assign(static_cast<std::size_t>(top) + 1, 0);
  members_.resize(counts_.size());
  for (std::size_t i = 0; i < cell_of_.size(); ++i) {
    const auto c = static_cast<std::size_t>(cell_of_[i]);
    ++counts_[c];
    members_[c].push_back(static_cast<Index>(i));
  }
  for (int c = 0; c <= top; ++c) {
    if (counts_[static_cast<std::size_t>(c)] == 0) throw SpecError(name(c) + " has no observations");
  }
  if (!names_.empty() && names_.size() != counts_.size()) {
    throw SpecError("cell names must match the number of cells");
  }
}

std::string CellLayout::name(int cell) const {
  if (static_cast<std::size_t>(cell) < names_.size()) return names_[static_cast<std::size_t>(cell)];
  return "cell " + std::to_string(cell + 1);
}

void CellLayout::require_replicated() const {
  for (int c = 0; c < num_cells(); ++c) {
    const Index k = counts_[static_cast<std::size_t>(c)];
    if (k < 2) {
      throw StratificationError(name(c) + " has " + std::to_string(k) +
                                " observation; stratified resampling needs at least 2 per cell");
    }
  }
}

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty set");
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

StratifiedPools stratified_pools(const Eigen::VectorXd& y, const CellLayout& layout) {
  if (y.size() != layout.size()) throw SpecError("response length does not match the cell layout");
  layout.require_replicated();
  StratifiedPools out;
  out.medians.reserve(static_cast<std::size_t>(layout.num_cells()));
  out.pools.reserve(static_cast<std::size_t>(layout.num_cells()));
  for (int c = 0; c < layout.num_cells(); ++c) {
    const auto& idx = layout.members(c);
    std::vector<double> values;
    values.reserve(idx.size());
    for (Index i : idx) values.push_back(y(i));
    const double m = median(values);
    const double k = static_cast<double>(idx.size());
    const double inflate = std::sqrt(k / (k - 1.0));
    for (double& v : values) v = (v - m) * inflate;
    out.medians.push_back(m);
    out.pools.push_back(std::move(values));
  }
  return out;
}

}  // namespace evidential
