#pragma once

// Least-squares fitting of one candidate model Y ~ X_I beta + Z_K delta.

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plsel/sieve.hpp"

namespace plsel {

/// Observed sample (Y_i, X_i, T_i), i = 1..n. Immutable once built.
class Dataset {
 public:
  Dataset() = default;

  /// Validates shapes, n > q + 1, finiteness and T_i in [0, 1]. Column names
  /// default to x1..xq.
  Dataset(Eigen::VectorXd y, Eigen::MatrixXd x, Eigen::VectorXd t,
          std::vector<std::string> x_names = {}, std::string y_name = "y",
          std::string t_name = "t");

  const Eigen::VectorXd& y() const noexcept { return y_; }
  const Eigen::MatrixXd& x() const noexcept { return x_; }
  const Eigen::VectorXd& t() const noexcept { return t_; }
  const std::vector<std::string>& x_names() const noexcept { return x_names_; }
  const std::string& y_name() const noexcept { return y_name_; }
  const std::string& t_name() const noexcept { return t_name_; }

  int n() const noexcept { return static_cast<int>(y_.size()); }
  int q() const noexcept { return static_cast<int>(x_.cols()); }

  /// Column index for a name; throws InvalidArgument if absent.
  int column(const std::string& name) const;

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd t_;
  std::vector<std::string> x_names_;
  std::string y_name_;
  std::string t_name_;
};

/// Candidate (I, K): covariate subset (sorted, zero-based) and sieve size.
struct ModelIndex {
  std::vector<int> I;
  int K = 1;
  int r = 1;

  int dim() const noexcept { return static_cast<int>(I.size()) + r * K; }
  BasisSpec basis() const noexcept { return {K, r}; }

  friend bool operator==(const ModelIndex&, const ModelIndex&) = default;
};

struct FitResult {
  ModelIndex model;
  Eigen::VectorXd beta;     // |I|
  Eigen::VectorXd delta;    // rK
  Eigen::VectorXd residuals;
  double gamma_n = 0.0;     // mean squared residual
  bool rank_ok = false;
  double rcond = 0.0;       // smallest / largest singular value of [Z_K | X_I]
  Eigen::MatrixXd xtx;      // X_I'(Id - P_K) X_I
  Eigen::MatrixXd xtx_inv;  // its inverse

  int n() const noexcept { return static_cast<int>(residuals.size()); }
};

/// Least-squares fit of the candidate. Throws RankDeficient when the
/// concatenated design is numerically singular and InvalidArgument when
/// dim >= n or an index is out of range.
FitResult fit_model(const Dataset& data, const ModelIndex& model);

/// Same computation, but a rank-deficient or oversized candidate is
/// returned with rank_ok = false instead of throwing.
FitResult evaluate_candidate(const Dataset& data, const ModelIndex& model);

/// beta' x_I + delta' phi(t) for a full q-vector x.
double predict(const FitResult& fit, std::span<const double> x, double t);

/// delta' phi(t) only.
double predict_f(const FitResult& fit, double t);

/// Axis-aligned box in covariate space.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

Box bounding_box(const Dataset& data);

/// Integral of s^2 over box x [0, 1] divided by vol(box), in closed form.
/// A zero-width side is treated as the limit (point mass).
double lambda_norm_sq(const FitResult& fit, const Box& box);

/// n^-1 sum v_i^2.
double empirical_norm_sq(std::span<const double> values);

}  // namespace plsel
