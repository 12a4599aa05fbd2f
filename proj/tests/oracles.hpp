#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's numerical code: quadrature comes from the Golub-Welsch
// eigenproblem, Legendre values from the explicit binomial sum, and least
// squares from normal equations solved by Gaussian elimination in long double.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

struct Rule {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

inline Rule golub_welsch(int m) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int k = 1; k < m; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule r;
  for (int i = 0; i < m; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    r.nodes.push_back(0.5 * (es.eigenvalues()[i] + 1.0));
    r.weights.push_back(v0 * v0);
  }
  return r;
}

/// Integral over [0, 1] with `panels` equal panels of an m-point rule.
template <class F>
double integrate(F&& f, int m = 12, int panels = 64) {
  const Rule r = golub_welsch(m);
  long double s = 0.0L;
  for (int p = 0; p < panels; ++p) {
    for (int k = 0; k < m; ++k) {
      const double t = (p + r.nodes[static_cast<std::size_t>(k)]) / panels;
      s += static_cast<long double>(r.weights[static_cast<std::size_t>(k)]) * f(t) / panels;
    }
  }
  return static_cast<double>(s);
}

inline double binom(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

/// P~_m(u) = sum_k (-1)^(m+k) C(m,k) C(m+k,k) u^k.
inline double shifted_legendre(int m, double u) {
  long double s = 0.0L;
  for (int k = 0; k <= m; ++k) {
    const double sign = ((m + k) % 2 == 0) ? 1.0 : -1.0;
    s += sign * binom(m, k) * binom(m + k, k) * std::pow(static_cast<long double>(u), k);
  }
  return static_cast<double>(s);
}

inline Eigen::VectorXd basis(int K, int r, double t) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(K * r);
  int c = static_cast<int>(std::floor(t * K));
  if (c >= K) c = K - 1;
  for (int m = 0; m < r; ++m) {
    v[c * r + m] = std::sqrt(static_cast<double>(K) * (2 * m + 1)) * shifted_legendre(m, K * t - c);
  }
  return v;
}

inline double kahan_sum(const std::vector<double>& v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

/// Solves A x = b by Gaussian elimination with partial pivoting. Returns
/// false when a pivot vanishes relative to the largest entry.
inline bool gauss_solve(std::vector<std::vector<long double>> A, std::vector<long double> b,
                        std::vector<long double>& x) {
  const std::size_t n = b.size();
  long double scale = 0.0L;
  for (const auto& row : A) {
    for (auto v : row) scale = std::max(scale, std::fabs(v));
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
    }
    if (std::fabs(A[piv][col]) <= 1e-13L * scale) return false;
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const long double f = A[r][col] / A[col][col];
      for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0L);
  for (std::size_t i = n; i-- > 0;) {
    long double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= A[i][c] * x[c];
    x[i] = s / A[i][i];
  }
  return true;
}

struct LsFit {
  bool ok = false;
  Eigen::VectorXd beta;
  Eigen::VectorXd delta;
  double gamma_n = 0.0;
};

/// Least squares of y on [X_I | Z_K] through the normal equations.
inline LsFit least_squares(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& t, const std::vector<int>& I, int K, int r) {
  const int n = static_cast<int>(y.size());
  const int p = static_cast<int>(I.size()) + K * r;
  LsFit out;
  if (p >= n) return out;
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    for (int j : I) row.push_back(X(i, j));
    const Eigen::VectorXd z = basis(K, r, t[i]);
    for (int k = 0; k < z.size(); ++k) row.push_back(z[k]);
  }
  std::vector<std::vector<long double>> A(static_cast<std::size_t>(p),
                                          std::vector<long double>(static_cast<std::size_t>(p), 0.0L));
  std::vector<long double> b(static_cast<std::size_t>(p), 0.0L);
  for (int i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (int a = 0; a < p; ++a) {
      b[static_cast<std::size_t>(a)] += static_cast<long double>(row[static_cast<std::size_t>(a)]) * y[i];
      for (int c = 0; c < p; ++c) {
        A[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)] +=
            static_cast<long double>(row[static_cast<std::size_t>(a)]) * row[static_cast<std::size_t>(c)];
      }
    }
  }
  std::vector<long double> x;
  if (!gauss_solve(A, b, x)) return out;
  out.ok = true;
  const auto q0 = static_cast<int>(I.size());
  out.beta.resize(q0);
  out.delta.resize(K * r);
  for (int a = 0; a < q0; ++a) out.beta[a] = static_cast<double>(x[static_cast<std::size_t>(a)]);
  for (int a = 0; a < K * r; ++a) out.delta[a] = static_cast<double>(x[static_cast<std::size_t>(q0 + a)]);
  std::vector<double> sq;
  for (int i = 0; i < n; ++i) {
    long double fit = 0.0L;
    for (int a = 0; a < p; ++a) fit += x[static_cast<std::size_t>(a)] * rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)];
    const double e = static_cast<double>(y[i] - fit);
    sq.push_back(e * e);
  }
  out.gamma_n = kahan_sum(sq) / n;
  return out;
}

/// Radical-inverse Halton point in base `base`.
inline double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

}  // namespace oracle
