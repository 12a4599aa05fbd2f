#pragma once

// Dyadic piecewise-polynomial sieve on [0, 1].
//
// S_K is the space of piecewise polynomials of degree <= r-1 on the regular
// partition of [0, 1] into K = 2^k cells. The basis used throughout is the
// per-cell shifted Legendre family normalized in L2(Lebesgue on [0, 1]):
//
//   phi_{c,m}(t) = sqrt(K) * sqrt(2m+1) * P~_m(K t - c),   t in cell c,
//
// with P~_m the shifted Legendre polynomial on [0, 1] and cells indexed from
// zero. Column order is cell-major: column c*r + m. The point t = 1 belongs to
// the last cell.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace plsel {

/// Smoothness budget b and sample size n. The per-cell polynomial count is
/// r = floor((b - 1) / 2).
struct SieveConfig {
  int b = 3;
  int n = 0;

  int r() const noexcept { return (b - 1) / 2; }

  /// Throws InvalidArgument unless b >= 3 and n >= 2.
  void validate() const;
};

/// Dimension grid {2^A, 2^(A+1), ..., 2^J}.
struct SieveGrid {
  int A = 0;
  int J = 0;
  std::vector<int> dims;

  int lower() const noexcept { return 1 << A; }  // B_n
  int upper() const noexcept { return 1 << J; }  // N_n
  bool contains(int K) const noexcept;
};

/// A_n = floor(log2((n / ln n)^(1/b))), J_n = floor(log2((n / ln n)^(1/2))).
/// Throws GridEmpty when n / ln n <= 2^b or J_n < A_n.
SieveGrid dimension_grid(const SieveConfig& config);

struct BasisSpec {
  int K = 1;
  int r = 1;

  int dim() const noexcept { return r * K; }

  /// Throws InvalidArgument unless K is a positive power of two and r >= 1.
  void validate() const;
};

bool is_power_of_two(std::int64_t value) noexcept;

/// Shifted Legendre polynomial of the given degree on [0, 1].
double shifted_legendre(int degree, double u) noexcept;

/// Index of the dyadic cell owning t (t = 1 maps to the last cell).
/// Throws DomainError if t is outside [0, 1] or not finite.
int cell_index(int K, double t);

/// Values of the r basis functions of t's own cell, written to `out`
/// (size r). Returns the cell index.
int eval_local(const BasisSpec& spec, double t, std::span<double> out);

/// Full rK-vector of basis values; at most r entries are nonzero.
Eigen::VectorXd eval_basis(const BasisSpec& spec, double t);

/// n x rK matrix whose i-th row is eval_basis(spec, T_i). DomainError carries
/// the offending row.
Eigen::MatrixXd design_matrix(const BasisSpec& spec, std::span<const double> T);

/// Nearest power of two to x on the log scale, ties broken downward.
int round_to_power_of_two(double x);

/// K ~ n^(1/(2 alpha + 1)) for known smoothness alpha > 1/2. Not clamped.
int pilot_dimension_alpha(int n, double alpha);

/// K ~ n^(1/(2a + 2)) for the unknown-smoothness rule with a > 0. Not clamped.
int pilot_dimension_a(int n, double a);

struct PilotDimension {
  int K = 0;       // value actually used
  int raw = 0;     // before clamping
  bool clamped = false;
};

/// Clamp a pilot dimension into [B_n, N_n].
PilotDimension clamp_to_grid(int K, const SieveGrid& grid);

}  // namespace plsel
