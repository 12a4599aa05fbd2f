#pragma once

// Post-selection inference on the linear coefficients.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plsel/linmodel.hpp"
#include "plsel/selector.hpp"

namespace plsel {

/// Residual variance with degrees-of-freedom correction:
/// n gamma_n / (n - |I| - rK). Throws DegenerateDoF when n <= dim.
double sigma2_hat(const FitResult& fit, int n);

struct Interval {
  int column = 0;  // zero-based covariate index
  double estimate = 0.0;
  double se = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.0;
};

/// beta_j +- z_{(1+level)/2} sqrt(sigma2 [xtx_inv]_jj) for every j in I.
std::vector<Interval> confidence_intervals(const FitResult& fit, double sigma2, double level);

/// q x q symmetric matrix equal to V0 on I0 x I0 and zero elsewhere.
Eigen::MatrixXd embed_V(const Eigen::MatrixXd& V0, std::span<const int> I0, int q);

struct InferenceReport {
  std::vector<int> selected;
  double sigma2 = 0.0;
  Eigen::MatrixXd sigma_hat;    // X_I'(Id - P_K) X_I / n
  Eigen::MatrixXd beta_cov;     // sigma2 (X_I'(Id - P_K) X_I)^-1
  Eigen::MatrixXd v_embedded;   // n beta_cov embedded into q x q
  std::vector<Interval> intervals;
  Eigen::VectorXd zstats;       // beta_j / se_j
  double level = 0.95;
  std::string regime = "asymptotic, selection-consistent regime";
};

/// Conditional-on-selection inference for the fitted model. Throws
/// RankDeficient if the fit is not rank_ok.
InferenceReport infer(const FitResult& fit, int q, double level);

/// Inference on a selection outcome; a failed truncation event yields zero
/// coefficients with the covariance of the selected fit.
InferenceReport infer(const SelectionResult& selection, int q, double level);

struct FullModelComparison {
  std::vector<int> I0;
  int K = 0;
  double sigma2 = 0.0;
  Eigen::MatrixXd information;  // Sigma_hat_q / sigma2
  Eigen::MatrixXd full_cov;     // (I_11 - I_12 I_22^-1 I_21)^-1
  Eigen::MatrixXd selected_cov; // sigma2 Sigma_hat_{q0}^-1 = I_11^-1
  Eigen::MatrixXd excess;       // full_cov - selected_cov
  double min_eigen_excess = 0.0;
};

/// Fits all q covariates at sieve size K and compares the I0 block of the
/// full-model limit covariance with the known-I0 one.
FullModelComparison full_model_covariance(const Dataset& data, int K, int r,
                                          std::span<const int> I0);

struct SigmaDiagnosticRow {
  int n = 0;
  int K = 0;
  double median_distance = 0.0;  // median over replications of ||Sigma_hat - Sigma||_F
};

struct SigmaDiagnostic {
  std::vector<SigmaDiagnosticRow> rows;
  double spearman = 0.0;  // distance vs n; NaN when constant
  bool decreasing_trend = false;
};

/// generator(n, replication) produces a dataset; k_rule(n) the sieve size.
SigmaDiagnostic sigma_convergence_diagnostic(
    const std::function<Dataset(int n, int replication)>& generator,
    const Eigen::MatrixXd& sigma_population, std::span<const int> I,
    const std::function<int(int n)>& k_rule, int r, std::span<const int> n_list, int reps,
    int threads = 1);

}  // namespace plsel
