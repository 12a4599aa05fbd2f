#pragma once

// Data-generating processes for the partially linear model and replicated
// experiments on selection consistency, coverage and convergence rates.
//
// X_j = theta_j(T) + eps_j with eps = M v, v_k iid Uniform[-1, 1], so the
// covariate noise is bounded and independent of T; Y = beta'X + f(T) + W.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plsel/inference.hpp"
#include "plsel/linmodel.hpp"
#include "plsel/selector.hpp"
#include "plsel/stats.hpp"

namespace plsel {

struct FunctionSpec {
  enum class Kind { Zero, Linear, Sine, Cosine, Triangle, PowerAbs, Step };

  Kind kind = Kind::Zero;
  double amplitude = 1.0;
  double frequency = 1.0;
  double offset = 0.0;  // phase for Sine/Cosine/Triangle, center for Linear/PowerAbs
  double exponent = 1.0;
  std::vector<double> levels;  // Step: value on each of levels.size() equal cells

  double operator()(double t) const;

  static FunctionSpec zero() { return {}; }
  static FunctionSpec linear(double slope, double center);
  static FunctionSpec sine(double amplitude, double frequency, double phase = 0.0);
  static FunctionSpec cosine(double amplitude, double frequency, double phase = 0.0);
  static FunctionSpec triangle(double amplitude, double frequency, double phase = 0.0);
  static FunctionSpec power_abs(double amplitude, double center, double exponent);
  static FunctionSpec step(std::vector<double> levels);
};

const char* to_string(FunctionSpec::Kind kind) noexcept;
FunctionSpec::Kind function_kind_from_string(const std::string& name);

struct NoiseSpec {
  enum class Kind { Gaussian, Uniform };
  Kind kind = Kind::Gaussian;
  double sigma = 1.0;  // standard deviation of W
};

/// Density of T on [0, 1]: 1 + slope (t - 1/2), |slope| < 2.
struct TLaw {
  double slope = 0.0;

  double density(double t) const noexcept { return 1.0 + slope * (t - 0.5); }
  double lower_bound() const noexcept { return 1.0 - 0.5 * std::abs(slope); }
  double upper_bound() const noexcept { return 1.0 + 0.5 * std::abs(slope); }
  double inverse_cdf(double u) const noexcept;
};

struct DgpSpec {
  std::string name;
  std::string description;
  int q = 0;
  std::vector<double> beta;
  std::vector<FunctionSpec> theta;
  double theta_gamma = 1.0;           // declared smoothness of theta_j
  FunctionSpec f;
  std::optional<double> f_alpha;      // declared smoothness of f; empty = f in every S_K
  double f_seminorm = 1.0;            // declared bound L
  Eigen::MatrixXd x_mix;              // q x q mixing of the uniform noise
  NoiseSpec w;
  TLaw t_law;
  std::vector<std::string> assumptions;

  std::vector<int> support() const;   // I0
  Eigen::VectorXd noise_half_width() const;
};

/// Problems with the spec for smoothness budget b (empty when valid).
std::vector<std::string> validate_spec(const DgpSpec& spec, int b = 3);

/// Throws InvalidSpec listing every problem.
void check_spec(const DgpSpec& spec, int b = 3);

/// Sample of size n, fully determined by (spec, n, seed).
Dataset generate(const DgpSpec& spec, int n, std::uint64_t seed);

/// Cov(eps) = M M' / 3; equals Sigma with sigma_kj = Cov(X_k, X_j) - Cov(theta_k, theta_j).
Eigen::MatrixXd noise_covariance(const DgpSpec& spec);

/// Cov(X) = Cov(theta(T)) + Cov(eps), by composite Gauss-Legendre quadrature.
Eigen::MatrixXd population_covariance(const DgpSpec& spec);

/// E[g(T)] under the T law, by composite Gauss-Legendre quadrature.
double expectation_t(const DgpSpec& spec, const std::function<double(double)>& g);

std::vector<DgpSpec> builtin_dgps();
DgpSpec builtin_dgp(const std::string& name);

struct ExperimentOptions {
  int threads = 1;
  bool keep_replications = false;
};

struct ReplicationRecord {
  int n = 0;
  int replication = 0;
  std::uint64_t seed = 0;
  std::string outcome;  // correct | overfit | underfit | failed
  std::vector<int> selected;
  int K = 0;
  double gamma_n = 0.0;
  double criterion = 0.0;
  bool gamma_ok = true;
  std::vector<double> beta;   // length q, zero outside the selection
  std::vector<double> se;     // length q, 0 outside the selection
  double f_error = 0.0;       // ||f_hat - f||_n^2
  bool bic_agrees = true;
  std::string error;
};

struct SelectionRow {
  int n = 0;
  int reps = 0;
  int correct = 0;
  int overfit = 0;
  int underfit = 0;
  int failed = 0;
  double p_correct = 0.0;
  double p_overfit = 0.0;
  double p_underfit = 0.0;
  double p_failed = 0.0;
  double se_correct = 0.0;
  double se_overfit = 0.0;
  double se_underfit = 0.0;
  int K = 0;                  // pilot K, or modal selected K when K is searched
  double bic_agreement = 0.0; // fraction agreeing with ln(gamma_n) + |I| ln n / n at the same K
};

struct CoverageRow {
  int column = 0;
  std::string name;
  double beta = 0.0;
  bool in_support = false;
  int included = 0;
  double coverage = 0.0;
  double coverage_se = 0.0;
  double exclusion_freq = 0.0;
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  int ks_count = 0;
  double mean_abs_scaled = 0.0;  // mean |sqrt(n) beta_hat_j| when included (zero coefficients)
};

struct RateRow {
  int n = 0;
  double median_error = 0.0;
  double mean_error = 0.0;
  int modal_k = 0;
  int target_k = 0;
  bool within_one_step = false;
  int failed = 0;
};

struct RateSummary {
  stats::LinearFit fit;
  bool degenerate = false;
  std::optional<double> expected_slope;
};

struct ExperimentReport {
  std::string kind;  // selection | coverage | rate | sigma
  std::string dgp;
  CaseParams params;
  PenaltyKind penalty;
  std::vector<int> n_list;
  int reps = 0;
  std::uint64_t seed = 0;
  double level = 0.95;
  std::vector<SelectionRow> selection;
  std::vector<CoverageRow> coverage;
  std::vector<RateRow> rate;
  std::optional<RateSummary> rate_summary;
  std::optional<SigmaDiagnostic> sigma;
  std::vector<std::string> warnings;
  std::vector<ReplicationRecord> replications;
};

ExperimentReport run_selection_experiment(const DgpSpec& spec, const CaseParams& params,
                                          const std::optional<PenaltyKind>& penalty,
                                          std::span<const int> n_list, int reps,
                                          std::uint64_t seed, const ExperimentOptions& options = {});

/// Case1 without I0 uses the true support.
ExperimentReport run_coverage_experiment(const DgpSpec& spec, const CaseParams& params, int n,
                                         int reps, double level, std::uint64_t seed,
                                         const ExperimentOptions& options = {});

/// Case1 with I0 = true support, K searched over the full grid.
ExperimentReport run_rate_experiment(const DgpSpec& spec, std::span<const int> n_list, int reps,
                                     std::uint64_t seed, int b = 3,
                                     const ExperimentOptions& options = {});

/// Distance of X'(Id - P_K) X / n from Cov(eps) over all q columns as n
/// grows, with K = K_{n,a} clamped into the grid.
ExperimentReport run_sigma_experiment(const DgpSpec& spec, std::span<const int> n_list, int reps,
                                      double a, std::uint64_t seed, int b = 3,
                                      const ExperimentOptions& options = {});

}  // namespace plsel
