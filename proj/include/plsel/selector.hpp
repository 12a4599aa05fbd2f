#pragma once

// Penalized least-squares selection over a collection of candidates (I, K).

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plsel/linmodel.hpp"
#include "plsel/sieve.hpp"

namespace plsel {

/// Estimation setting.
///   Case1: I0 known, smoothness unknown; K searched over the grid.
///   Case2: I0 unknown, alpha known; I searched at K = K_{n,alpha}.
///   Case3: I0 and alpha unknown; I searched at K = K_{n,a}.
///   Full:  I and K both searched.
enum class Case { Case1, Case2, Case3, Full };

const char* to_string(Case c) noexcept;
Case case_from_string(const std::string& name);  // "case1".."case3", "full"

struct PenaltyKind {
  enum class Variant { AdaptiveK, KnownAlpha, UnknownAlpha, GenericAdditive };

  Variant variant = Variant::AdaptiveK;
  double param = 0.0;  // alpha, a or c depending on the variant

  static PenaltyKind adaptive_k() { return {Variant::AdaptiveK, 0.0}; }
  static PenaltyKind known_alpha(double alpha);
  static PenaltyKind unknown_alpha(double a);
  static PenaltyKind generic_additive(double c);

  bool multiplicative() const noexcept { return variant != Variant::GenericAdditive; }
  void validate() const;
};

const char* to_string(PenaltyKind::Variant v) noexcept;

/// 2(|I| + 1) r K ln(n) / n for the multiplicative variants,
/// c (|I| + rK) / n for GenericAdditive.
double penalty(const PenaltyKind& kind, int size_i, int K, int r, int n);

struct CaseParams {
  Case selection_case = Case::Case3;
  int b = 3;
  std::optional<double> alpha;         // Case2
  std::optional<double> a;             // Case3
  std::optional<std::vector<int>> I0;  // Case1
  bool clamp_pilot = true;             // clamp K_{n,alpha}, K_{n,a} into [B_n, N_n]
  int max_q = 20;
};

/// Default penalty for the case: AdaptiveK for Case1/Full, KnownAlpha for
/// Case2, UnknownAlpha for Case3.
PenaltyKind default_penalty(const CaseParams& params);

struct CandidateGrid {
  std::vector<ModelIndex> models;  // canonical order: subsets by bitmask, then K ascending
  SieveGrid grid;
  std::optional<PilotDimension> pilot;
};

/// Throws MissingParameter when a case-required parameter is absent.
CandidateGrid candidate_grid(const CaseParams& params, int n, int q);

struct LedgerEntry {
  ModelIndex model;
  double gamma_n = 0.0;
  double pen = 0.0;
  double criterion = 0.0;
  bool rank_ok = false;
};

/// Index of the winning entry among rank_ok ones: minimal criterion, ties
/// (within a relative 1e-12) broken by smaller |I| + rK, then the
/// lexicographically smaller I, then the smaller K. Throws
/// AllCandidatesRankDeficient if no entry is rank_ok.
std::size_t choose_winner(std::span<const LedgerEntry> table);

/// True iff ||s||_lambda <= 2 exp(ln^2 n), compared on the log scale.
bool gamma_event(double lambda_norm_sq, int n);

/// 2 exp(ln^2 n); +inf once it overflows.
double gamma_threshold(int n);

struct SelectionResult {
  FitResult chosen;          // unrestricted winner
  double criterion = 0.0;
  double lambda_norm_sq = 0.0;
  bool gamma_ok = true;      // truncation event holds
  std::vector<LedgerEntry> table;
  Case selection_case = Case::Case3;
  PenaltyKind penalty;
  SieveGrid grid;
  std::optional<PilotDimension> pilot;
  std::vector<std::string> warnings;

  /// Coefficients after truncation (zero when gamma_ok is false).
  Eigen::VectorXd beta() const;
  Eigen::VectorXd delta() const;
  /// Selected coefficients embedded into R^q.
  Eigen::VectorXd beta_full(int q) const;
  double predict(std::span<const double> x, double t) const;
  double predict_f(double t) const;
};

struct SelectOptions {
  int threads = 1;
};

/// Fits every candidate, minimizes gamma_n + pen over the rank-ok ones and
/// evaluates the truncation event on the winner.
SelectionResult select(const Dataset& data, const CaseParams& params,
                       const std::optional<PenaltyKind>& kind = std::nullopt,
                       const SelectOptions& options = {});

struct PenaltyGapRow {
  int K = 0;
  double increment = 0.0;  // pen(|I0|+1, K) - pen(|I0|, K)
  double bias = 0.0;       // B K^(-2 alpha)
  bool holds = false;
};

struct PenaltyGapReport {
  // (ii): pen(I, K) >= (|I| + rK) ln n / n for every |I| in 0..q.
  bool dimension_condition = false;
  double dimension_margin = 0.0;  // min over |I| of pen - (|I|+rK) ln n / n
  // (i): increment over the smallest superset of I0 beats the bias bound.
  std::optional<bool> bias_condition;
  std::optional<double> bias_margin;
  std::vector<PenaltyGapRow> per_k;  // (i) at every grid K
  // Smallest n beyond which (i) holds along K = K_{n,alpha} (scan up to 1e12).
  std::optional<double> n0;
  double n0_continuous = 0.0;  // exp(B/2), the K = n^(1/(2 alpha+1)) proxy
};

struct PenaltyGapQuery {
  PenaltyKind kind;
  int n = 0;
  int q = 0;
  int size_i0 = 0;
  int K = 0;
  int r = 1;
  int b = 3;
  double alpha_assumed = 1.0;
  std::optional<double> bias_bound;  // h1 C(alpha) L; absent = only (ii)
};

PenaltyGapReport penalty_gap_diagnostic(const PenaltyGapQuery& query);

}  // namespace plsel
