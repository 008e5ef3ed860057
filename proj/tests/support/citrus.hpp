#pragma once

#include <Eigen/Dense>
#include <vector>

#include "evidential/linear_model.hpp"

namespace citrus {

/// Fruit yields by variety (rows) and pesticide (columns), two trees per cell.
inline const double kYield[3][4][2] = {
    {{49, 39}, {50, 55}, {43, 38}, {53, 48}},
    {{55, 41}, {67, 58}, {53, 42}, {85, 73}},
    {{66, 68}, {85, 92}, {69, 62}, {85, 99}},
};

inline Eigen::VectorXd response() {
  Eigen::VectorXd y(24);
  int k = 0;
  for (const auto& variety : kYield) {
    for (const auto& cell : variety) {
      for (double v : cell) y(k++) = v;
    }
  }
  return y;
}

inline evidential::TwoWayDesign design() {
  return evidential::build_two_way_design(3, 4, std::vector<std::vector<int>>(3, std::vector<int>(4, 2)));
}

}  // namespace citrus
