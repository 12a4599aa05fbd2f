#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "plsel/linmodel.hpp"

namespace fixture {

/// y = X beta + sin(2 pi t) + sigma * N(0, 1), X uniform on [-1, 1] plus t.
inline plsel::Dataset random_dataset(int n, int q, std::uint64_t seed, double sigma = 0.5,
                                     std::vector<double> beta = {}) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  if (beta.empty()) {
    for (int j = 0; j < q; ++j) beta.push_back(j % 2 == 0 ? 1.0 : 0.0);
  }
  Eigen::VectorXd y(n), t(n);
  Eigen::MatrixXd x(n, q);
  for (int i = 0; i < n; ++i) {
    t[i] = U(gen);
    double m = std::sin(2.0 * M_PI * t[i]);
    for (int j = 0; j < q; ++j) {
      x(i, j) = 2.0 * U(gen) - 1.0 + 0.3 * t[i];
      m += beta[static_cast<std::size_t>(j)] * x(i, j);
    }
    y[i] = m + sigma * N(gen);
  }
  return plsel::Dataset(y, x, t);
}

}  // namespace fixture
