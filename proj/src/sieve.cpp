#include "plsel/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "plsel/errors.hpp"

namespace plsel {

void SieveConfig::validate() const {
  if (b < 3) throw InvalidArgument("sieve: b must be >= 3, got " + std::to_string(b));
  if (n < 2) throw InvalidArgument("sieve: n must be >= 2, got " + std::to_string(n));
}

bool SieveGrid::contains(int K) const noexcept {
  return std::find(dims.begin(), dims.end(), K) != dims.end();
}

SieveGrid dimension_grid(const SieveConfig& config) {
  config.validate();
  const double n = static_cast<double>(config.n);
  const double ratio = n / std::log(n);
  if (!(ratio > std::ldexp(1.0, config.b))) {
    throw GridEmpty("sieve: n / ln n = " + std::to_string(ratio) + " must exceed 2^b for n=" +
                    std::to_string(config.n) + ", b=" + std::to_string(config.b));
  }
  const double l2 = std::log2(ratio);
  SieveGrid grid;
  grid.A = static_cast<int>(std::floor(l2 / config.b));
  grid.J = static_cast<int>(std::floor(l2 / 2.0));
  if (grid.J < grid.A) {
    throw GridEmpty("sieve: J_n < A_n for n=" + std::to_string(config.n));
  }
  for (int k = grid.A; k <= grid.J; ++k) grid.dims.push_back(1 << k);
  return grid;
}

void BasisSpec::validate() const {
  if (K < 1 || !is_power_of_two(K)) {
    throw InvalidArgument("basis: K must be a positive power of two, got " + std::to_string(K));
  }
  if (r < 1) throw InvalidArgument("basis: r must be >= 1, got " + std::to_string(r));
}

bool is_power_of_two(std::int64_t value) noexcept {
  return value > 0 && (value & (value - 1)) == 0;
}

double shifted_legendre(int degree, double u) noexcept {
  const double x = 2.0 * u - 1.0;
  if (degree == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int m = 1; m < degree; ++m) {
    const double next = ((2.0 * m + 1.0) * x * cur - m * prev) / (m + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

int cell_index(int K, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("basis: t = " + std::to_string(t) + " outside [0, 1]");
  }
  const int c = static_cast<int>(std::floor(t * K));
  return std::min(c, K - 1);
}

int eval_local(const BasisSpec& spec, double t, std::span<double> out) {
  const int c = cell_index(spec.K, t);
  const double u = spec.K * t - c;
  const double scale = std::sqrt(static_cast<double>(spec.K));
  for (int m = 0; m < spec.r; ++m) {
    out[m] = scale * std::sqrt(2.0 * m + 1.0) * shifted_legendre(m, u);
  }
  return c;
}

Eigen::VectorXd eval_basis(const BasisSpec& spec, double t) {
  spec.validate();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(spec.dim());
  std::vector<double> local(spec.r);
  const int c = eval_local(spec, t, local);
  for (int m = 0; m < spec.r; ++m) v[c * spec.r + m] = local[m];
  return v;
}

Eigen::MatrixXd design_matrix(const BasisSpec& spec, std::span<const double> T) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(T.size());
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, spec.dim());
  std::vector<double> local(spec.r);
  for (Eigen::Index i = 0; i < n; ++i) {
    int c = 0;
    try {
      c = eval_local(spec, T[i], local);
    } catch (const DomainError& e) {
      throw DomainError(std::string(e.what()) + " at row " + std::to_string(i),
                        static_cast<std::size_t>(i));
    }
    for (int m = 0; m < spec.r; ++m) Z(i, c * spec.r + m) = local[m];
  }
  return Z;
}

namespace {

int pilot_from_log2(double log2_target) {
  // Round half down: e.g. 3.5 -> 3, 3.6 -> 4.
  int k = static_cast<int>(std::ceil(log2_target - 0.5));
  k = std::max(k, 0);
  if (k > 30) throw InvalidArgument("pilot dimension overflows int");
  return 1 << k;
}

}  // namespace

int round_to_power_of_two(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw InvalidArgument("round_to_power_of_two: argument must be positive and finite");
  }
  return pilot_from_log2(std::log2(x));
}

int pilot_dimension_alpha(int n, double alpha) {
  if (!(alpha > 0.5)) throw InvalidArgument("pilot_dimension_alpha: alpha must exceed 1/2");
  if (n < 2) throw InvalidArgument("pilot_dimension_alpha: n must be >= 2");
  return pilot_from_log2(std::log2(static_cast<double>(n)) / (2.0 * alpha + 1.0));
}

int pilot_dimension_a(int n, double a) {
  if (!(a > 0.0)) throw InvalidArgument("pilot_dimension_a: a must be positive");
  if (n < 2) throw InvalidArgument("pilot_dimension_a: n must be >= 2");
  return pilot_from_log2(std::log2(static_cast<double>(n)) / (2.0 * a + 2.0));
}

PilotDimension clamp_to_grid(int K, const SieveGrid& grid) {
  PilotDimension p;
  p.raw = K;
  p.K = std::clamp(K, grid.lower(), grid.upper());
  p.clamped = p.K != K;
  return p;
}

}  // namespace plsel
