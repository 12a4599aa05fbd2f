#include "plsel/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "plsel/errors.hpp"
#include "plsel/parallel.hpp"

namespace plsel {

const char* to_string(Case c) noexcept {
  switch (c) {
    case Case::Case1: return "case1";
    case Case::Case2: return "case2";
    case Case::Case3: return "case3";
    case Case::Full: return "full";
  }
  return "unknown";
}

Case case_from_string(const std::string& name) {
  if (name == "case1") return Case::Case1;
  if (name == "case2") return Case::Case2;
  if (name == "case3") return Case::Case3;
  if (name == "full") return Case::Full;
  throw InvalidArgument("unknown selection case '" + name + "'");
}

const char* to_string(PenaltyKind::Variant v) noexcept {
  switch (v) {
    case PenaltyKind::Variant::AdaptiveK: return "adaptive_k";
    case PenaltyKind::Variant::KnownAlpha: return "known_alpha";
    case PenaltyKind::Variant::UnknownAlpha: return "unknown_alpha";
    case PenaltyKind::Variant::GenericAdditive: return "generic_additive";
  }
  return "unknown";
}

PenaltyKind PenaltyKind::known_alpha(double alpha) {
  PenaltyKind k{Variant::KnownAlpha, alpha};
  k.validate();
  return k;
}

PenaltyKind PenaltyKind::unknown_alpha(double a) {
  PenaltyKind k{Variant::UnknownAlpha, a};
  k.validate();
  return k;
}

PenaltyKind PenaltyKind::generic_additive(double c) {
  PenaltyKind k{Variant::GenericAdditive, c};
  k.validate();
  return k;
}

void PenaltyKind::validate() const {
  switch (variant) {
    case Variant::AdaptiveK: return;
    case Variant::KnownAlpha:
      if (!(param > 0.5)) throw InvalidArgument("penalty: alpha must exceed 1/2");
      return;
    case Variant::UnknownAlpha:
      if (!(param > 0.0)) throw InvalidArgument("penalty: a must be positive");
      return;
    case Variant::GenericAdditive:
      if (!(param > 0.0)) throw InvalidArgument("penalty: c must be positive");
      return;
  }
}

double penalty(const PenaltyKind& kind, int size_i, int K, int r, int n) {
  if (size_i < 0 || K < 1 || r < 1 || n < 2) {
    throw InvalidArgument("penalty: need |I| >= 0, K >= 1, r >= 1, n >= 2");
  }
  const double nn = static_cast<double>(n);
  if (kind.variant == PenaltyKind::Variant::GenericAdditive) {
    return kind.param * (size_i + static_cast<double>(r) * K) / nn;
  }
  return 2.0 * (size_i + 1.0) * r * K * std::log(nn) / nn;
}

PenaltyKind default_penalty(const CaseParams& params) {
  switch (params.selection_case) {
    case Case::Case1:
    case Case::Full: return PenaltyKind::adaptive_k();
    case Case::Case2:
      if (!params.alpha) throw MissingParameter("case2 requires alpha");
      return PenaltyKind::known_alpha(*params.alpha);
    case Case::Case3:
      if (!params.a) throw MissingParameter("case3 requires a");
      return PenaltyKind::unknown_alpha(*params.a);
  }
  return PenaltyKind::adaptive_k();
}

namespace {

std::vector<std::vector<int>> all_subsets(int q) {
  std::vector<std::vector<int>> out;
  out.reserve(std::size_t{1} << q);
  for (unsigned mask = 0; mask < (1u << q); ++mask) {
    std::vector<int> s;
    for (int j = 0; j < q; ++j) {
      if (mask & (1u << j)) s.push_back(j);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

CandidateGrid candidate_grid(const CaseParams& params, int n, int q) {
  if (q < 0 || q > params.max_q) {
    throw InvalidArgument("candidate_grid: q must lie in [0, " + std::to_string(params.max_q) + "]");
  }
  const SieveConfig config{params.b, n};
  CandidateGrid out;
  out.grid = dimension_grid(config);
  const int r = config.r();

  auto pilot_models = [&](int raw) {
    out.pilot = params.clamp_pilot ? clamp_to_grid(raw, out.grid) : PilotDimension{raw, raw, false};
    for (auto& s : all_subsets(q)) out.models.push_back({std::move(s), out.pilot->K, r});
  };

  switch (params.selection_case) {
    case Case::Case1: {
      if (!params.I0) throw MissingParameter("case1 requires the known index set I0");
      std::vector<int> I0 = *params.I0;
      std::sort(I0.begin(), I0.end());
      if (std::adjacent_find(I0.begin(), I0.end()) != I0.end() ||
          (!I0.empty() && (I0.front() < 0 || I0.back() >= q))) {
        throw InvalidArgument("case1: I0 must hold distinct indices in [0, q)");
      }
      for (int K : out.grid.dims) out.models.push_back({I0, K, r});
      break;
    }
    case Case::Case2:
      if (!params.alpha) throw MissingParameter("case2 requires alpha");
      pilot_models(pilot_dimension_alpha(n, *params.alpha));
      break;
    case Case::Case3:
      if (!params.a) throw MissingParameter("case3 requires a");
      pilot_models(pilot_dimension_a(n, *params.a));
      break;
    case Case::Full:
      for (auto& s : all_subsets(q)) {
        for (int K : out.grid.dims) out.models.push_back({s, K, r});
      }
      break;
  }
  return out;
}

namespace {

constexpr double kTieTolerance = 1e-12;

// Strict "a is preferred over b" among candidates with equal criterion.
bool tie_preferred(const ModelIndex& a, const ModelIndex& b) {
  if (a.dim() != b.dim()) return a.dim() < b.dim();
  if (a.I != b.I) return a.I < b.I;
  return a.K < b.K;
}

}  // namespace

std::size_t choose_winner(std::span<const LedgerEntry> table) {
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& e : table) {
    if (e.rank_ok && std::isfinite(e.criterion)) {
      best = std::min(best, e.criterion);
      any = true;
    }
  }
  if (!any) throw AllCandidatesRankDeficient("select: every candidate is rank deficient");
  const double tol = kTieTolerance * std::max(1.0, std::abs(best));
  std::size_t winner = table.size();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& e = table[i];
    if (!e.rank_ok || !(e.criterion <= best + tol)) continue;
    if (winner == table.size() || tie_preferred(e.model, table[winner].model)) winner = i;
  }
  return winner;
}

double gamma_threshold(int n) {
  const double l = std::log(static_cast<double>(n));
  return 2.0 * std::exp(l * l);
}

bool gamma_event(double lambda_norm_sq, int n) {
  if (!(lambda_norm_sq >= 0.0)) return false;
  if (lambda_norm_sq == 0.0) return true;
  const double l = std::log(static_cast<double>(n));
  return 0.5 * std::log(lambda_norm_sq) <= std::log(2.0) + l * l;
}

Eigen::VectorXd SelectionResult::beta() const {
  return gamma_ok ? chosen.beta : Eigen::VectorXd::Zero(chosen.beta.size());
}

Eigen::VectorXd SelectionResult::delta() const {
  return gamma_ok ? chosen.delta : Eigen::VectorXd::Zero(chosen.delta.size());
}

Eigen::VectorXd SelectionResult::beta_full(int q) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(q);
  const Eigen::VectorXd b = beta();
  for (std::size_t k = 0; k < chosen.model.I.size(); ++k) {
    out[chosen.model.I[k]] = b[static_cast<Eigen::Index>(k)];
  }
  return out;
}

double SelectionResult::predict(std::span<const double> x, double t) const {
  return gamma_ok ? plsel::predict(chosen, x, t) : 0.0;
}

double SelectionResult::predict_f(double t) const {
  return gamma_ok ? plsel::predict_f(chosen, t) : 0.0;
}

SelectionResult select(const Dataset& data, const CaseParams& params,
                       const std::optional<PenaltyKind>& kind, const SelectOptions& options) {
  const CandidateGrid cands = candidate_grid(params, data.n(), data.q());
  if (cands.models.empty()) throw InvalidArgument("select: empty candidate collection");
  const PenaltyKind pen_kind = kind ? *kind : default_penalty(params);
  pen_kind.validate();

  const std::size_t count = cands.models.size();
  std::vector<FitResult> fits(count);
  std::vector<LedgerEntry> table(count);
  parallel_for(count, options.threads, [&](std::size_t i) {
    const ModelIndex& m = cands.models[i];
    fits[i] = evaluate_candidate(data, m);
    LedgerEntry& e = table[i];
    e.model = m;
    e.rank_ok = fits[i].rank_ok;
    e.gamma_n = fits[i].gamma_n;
    e.pen = penalty(pen_kind, static_cast<int>(m.I.size()), m.K, m.r, data.n());
    e.criterion = e.gamma_n + e.pen;
  });

  SelectionResult out;
  const std::size_t w = choose_winner(table);
  out.chosen = std::move(fits[w]);
  out.criterion = table[w].criterion;
  out.table = std::move(table);
  out.selection_case = params.selection_case;
  out.penalty = pen_kind;
  out.grid = cands.grid;
  out.pilot = cands.pilot;
  out.lambda_norm_sq = lambda_norm_sq(out.chosen, bounding_box(data));
  out.gamma_ok = gamma_event(out.lambda_norm_sq, data.n());

  if (out.pilot && out.pilot->clamped) {
    out.warnings.push_back("pilot dimension " + std::to_string(out.pilot->raw) +
                           " clamped to " + std::to_string(out.pilot->K) + " (grid [" +
                           std::to_string(out.grid.lower()) + ", " +
                           std::to_string(out.grid.upper()) + "])");
  }
  const auto deficient = std::count_if(out.table.begin(), out.table.end(),
                                       [](const LedgerEntry& e) { return !e.rank_ok; });
  if (deficient > 0) {
    out.warnings.push_back(std::to_string(deficient) + " rank-deficient candidate(s) excluded");
  }
  if (!out.gamma_ok) {
    out.warnings.push_back("truncation event failed: estimator set to zero");
  }
  return out;
}

namespace {

double pen_increment(const PenaltyKind& kind, int size_i0, int K, int r, int n) {
  return penalty(kind, size_i0 + 1, K, r, n) - penalty(kind, size_i0, K, r, n);
}

}  // namespace

PenaltyGapReport penalty_gap_diagnostic(const PenaltyGapQuery& query) {
  query.kind.validate();
  if (query.n < 2 || query.K < 1 || query.r < 1 || query.q < 0 || query.size_i0 < 0 ||
      query.size_i0 > query.q) {
    throw InvalidArgument("penalty_gap_diagnostic: invalid sizes");
  }
  PenaltyGapReport rep;
  const double ln_n = std::log(static_cast<double>(query.n));
  rep.dimension_margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s <= query.q; ++s) {
    const double need = (s + static_cast<double>(query.r) * query.K) * ln_n / query.n;
    rep.dimension_margin =
        std::min(rep.dimension_margin, penalty(query.kind, s, query.K, query.r, query.n) - need);
  }
  rep.dimension_condition = rep.dimension_margin >= 0.0;

  if (!query.bias_bound) return rep;
  const double B = *query.bias_bound;
  const double two_alpha = 2.0 * query.alpha_assumed;
  auto margin_at = [&](int K, int n) {
    return pen_increment(query.kind, query.size_i0, K, query.r, n) -
           B * std::pow(static_cast<double>(K), -two_alpha);
  };
  rep.bias_margin = margin_at(query.K, query.n);
  rep.bias_condition = *rep.bias_margin > 0.0;

  const SieveGrid grid = dimension_grid({query.b, query.n});
  for (int K : grid.dims) {
    PenaltyGapRow row;
    row.K = K;
    row.increment = pen_increment(query.kind, query.size_i0, K, query.r, query.n);
    row.bias = B * std::pow(static_cast<double>(K), -two_alpha);
    row.holds = row.increment > row.bias;
    rep.per_k.push_back(row);
  }

  rep.n0_continuous = std::exp(B / 2.0);
  // Geometric scan along K = K_{n,alpha}; n0 is the first point after the
  // last failure.
  if (query.alpha_assumed > 0.5) {
    const double log_max = std::log(1e12);
    const int steps = 30000;
    std::optional<double> last_fail;
    bool any_pass = false;
    double first_after_fail = 0.0;
    for (int s = 0; s <= steps; ++s) {
      const double nd = std::floor(std::exp(std::log(2.0) + (log_max - std::log(2.0)) * s / steps));
      const double log2_k = std::log2(nd) / (two_alpha + 1.0);
      const int K = 1 << std::max(0, static_cast<int>(std::ceil(log2_k - 0.5)));
      double inc = 0.0;
      if (query.kind.multiplicative()) {
        inc = 2.0 * query.r * K * std::log(nd) / nd;
      } else {
        inc = query.kind.param / nd;
      }
      const bool ok = inc - B * std::pow(static_cast<double>(K), -two_alpha) > 0.0;
      if (!ok) {
        last_fail = nd;
        any_pass = false;
      } else if (!any_pass) {
        any_pass = true;
        first_after_fail = nd;
      }
    }
    if (any_pass) rep.n0 = last_fail ? first_after_fail : 2.0;
  }
  return rep;
}

}  // namespace plsel
