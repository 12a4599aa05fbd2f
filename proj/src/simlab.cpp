#include "plsel/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "plsel/errors.hpp"
#include "plsel/parallel.hpp"
#include "plsel/rng.hpp"

namespace plsel {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double frac(double x) { return x - std::floor(x); }

// Gauss-Legendre nodes and weights on [0, 1] by Newton iteration.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int m) {
  GaussRule g;
  g.nodes.resize(static_cast<std::size_t>(m));
  g.weights.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    g.nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    g.weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return g;
}

// 240 panels keep the kinks and jumps of the catalog functions on panel edges.
template <class F>
double integrate01(F&& fn) {
  static const GaussRule rule = gauss_legendre(16);
  constexpr int panels = 240;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = static_cast<double>(p) / panels;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      sum += rule.weights[k] * fn(lo + rule.nodes[k] / panels) / panels;
    }
  }
  return sum;
}

bool is_subset(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::string classify(const std::vector<int>& truth, const std::vector<int>& selected) {
  if (selected == truth) return "correct";
  if (is_subset(truth, selected)) return "overfit";
  return "underfit";
}

// ln(gamma_n) + |I| ln n / n at the winner's K; ties go to the smaller set.
bool bic_agrees(const SelectionResult& res, int n) {
  const int K = res.chosen.model.K;
  const double ln_n = std::log(static_cast<double>(n));
  const LedgerEntry* best = nullptr;
  double best_crit = 0.0;
  for (const auto& e : res.table) {
    if (!e.rank_ok || e.model.K != K) continue;
    const double crit = std::log(e.gamma_n) + e.model.I.size() * ln_n / n;
    const bool better = best == nullptr || crit < best_crit ||
                        (crit == best_crit && e.model.I.size() < best->model.I.size());
    if (better) {
      best = &e;
      best_crit = crit;
    }
  }
  return best != nullptr && best->model.I == res.chosen.model.I;
}

int modal_value(const std::vector<int>& values) {
  std::map<int, int> counts;
  for (int v : values) ++counts[v];
  int best = 0, best_count = 0;
  for (const auto& [v, c] : counts) {
    if (c > best_count) {
      best = v;
      best_count = c;
    }
  }
  return best;
}

void check_case2_alpha(const DgpSpec& spec, const CaseParams& params) {
  if (params.selection_case == Case::Case2 && params.alpha && spec.f_alpha &&
      *params.alpha > *spec.f_alpha) {
    std::ostringstream os;
    os << "dgp '" << spec.name << "' declares alpha = " << *spec.f_alpha
       << "; a Case-2 run assuming alpha = " << *params.alpha << " is not covered";
    throw InvalidSpec(os.str());
  }
}

ReplicationRecord run_one(const DgpSpec& spec, const CaseParams& params,
                          const std::optional<PenaltyKind>& penalty, int n, int i,
                          std::uint64_t seed, const std::vector<int>& truth,
                          std::optional<double> level) {
  ReplicationRecord rec;
  rec.n = n;
  rec.replication = i;
  rec.seed = replication_seed(seed, n, i);
  rec.beta.assign(static_cast<std::size_t>(spec.q), 0.0);
  rec.se.assign(static_cast<std::size_t>(spec.q), 0.0);
  try {
    const Dataset data = generate(spec, n, rec.seed);
    const SelectionResult res = select(data, params, penalty);
    rec.selected = res.chosen.model.I;
    rec.K = res.chosen.model.K;
    rec.gamma_n = res.chosen.gamma_n;
    rec.criterion = res.criterion;
    rec.gamma_ok = res.gamma_ok;
    rec.outcome = classify(truth, rec.selected);
    rec.bic_agrees = bic_agrees(res, n);
    const Eigen::VectorXd b = res.beta_full(spec.q);
    for (int j = 0; j < spec.q; ++j) rec.beta[static_cast<std::size_t>(j)] = b[j];
    double err = 0.0;
    for (int k = 0; k < n; ++k) {
      const double d = res.predict_f(data.t()[k]) - spec.f(data.t()[k]);
      err += d * d;
    }
    rec.f_error = err / n;
    if (level) {
      const InferenceReport inf = infer(res, spec.q, *level);
      for (const auto& iv : inf.intervals) rec.se[static_cast<std::size_t>(iv.column)] = iv.se;
    }
  } catch (const Error& e) {
    rec.outcome = "failed";
    rec.error = e.what();
  }
  return rec;
}

void validate_n_list(std::span<const int> n_list) {
  if (n_list.empty()) throw InvalidArgument("n list must not be empty");
  for (int n : n_list) {
    if (n < 2) throw InvalidArgument("every n must be at least 2");
  }
}

}  // namespace

double FunctionSpec::operator()(double t) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Linear: return amplitude * (t - offset);
    case Kind::Sine: return amplitude * std::sin(kTwoPi * frequency * t + offset);
    case Kind::Cosine: return amplitude * std::cos(kTwoPi * frequency * t + offset);
    case Kind::Triangle:
      return amplitude * (1.0 - 4.0 * std::abs(frac(frequency * t + offset) - 0.5));
    case Kind::PowerAbs: return amplitude * std::pow(std::abs(t - offset), exponent);
    case Kind::Step: {
      if (levels.empty()) return 0.0;
      const auto L = static_cast<int>(levels.size());
      const int c = std::clamp(static_cast<int>(std::floor(t * L)), 0, L - 1);
      return levels[static_cast<std::size_t>(c)];
    }
  }
  return 0.0;
}

FunctionSpec FunctionSpec::linear(double slope, double center) {
  FunctionSpec f;
  f.kind = Kind::Linear;
  f.amplitude = slope;
  f.offset = center;
  return f;
}

FunctionSpec FunctionSpec::sine(double amplitude, double frequency, double phase) {
  return {Kind::Sine, amplitude, frequency, phase, 1.0, {}};
}

FunctionSpec FunctionSpec::cosine(double amplitude, double frequency, double phase) {
  return {Kind::Cosine, amplitude, frequency, phase, 1.0, {}};
}

FunctionSpec FunctionSpec::triangle(double amplitude, double frequency, double phase) {
  return {Kind::Triangle, amplitude, frequency, phase, 1.0, {}};
}

FunctionSpec FunctionSpec::power_abs(double amplitude, double center, double exponent) {
  return {Kind::PowerAbs, amplitude, 1.0, center, exponent, {}};
}

FunctionSpec FunctionSpec::step(std::vector<double> levels) {
  FunctionSpec f;
  f.kind = Kind::Step;
  f.levels = std::move(levels);
  return f;
}

const char* to_string(FunctionSpec::Kind kind) noexcept {
  using K = FunctionSpec::Kind;
  switch (kind) {
    case K::Zero: return "zero";
    case K::Linear: return "linear";
    case K::Sine: return "sine";
    case K::Cosine: return "cosine";
    case K::Triangle: return "triangle";
    case K::PowerAbs: return "power_abs";
    case K::Step: return "step";
  }
  return "unknown";
}

FunctionSpec::Kind function_kind_from_string(const std::string& name) {
  using K = FunctionSpec::Kind;
  for (K k : {K::Zero, K::Linear, K::Sine, K::Cosine, K::Triangle, K::PowerAbs, K::Step}) {
    if (name == to_string(k)) return k;
  }
  throw InvalidSpec("unknown function kind '" + name + "'");
}

double TLaw::inverse_cdf(double u) const noexcept {
  // F(t) = t + slope (t^2 - t) / 2
  const double c = 1.0 - 0.5 * slope;
  const double t = 2.0 * u / (c + std::sqrt(c * c + 2.0 * slope * u));
  return std::clamp(t, 0.0, 1.0);
}

std::vector<int> DgpSpec::support() const {
  std::vector<int> s;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) s.push_back(static_cast<int>(j));
  }
  return s;
}

Eigen::VectorXd DgpSpec::noise_half_width() const { return x_mix.cwiseAbs().rowwise().sum(); }

std::vector<std::string> validate_spec(const DgpSpec& spec, int b) {
  std::vector<std::string> problems;
  const auto q = static_cast<std::size_t>(std::max(spec.q, 0));
  if (spec.q < 1) problems.push_back("q must be at least 1");
  if (spec.beta.size() != q) problems.push_back("beta must have q entries");
  if (spec.theta.size() != q) problems.push_back("theta must have q functions");
  if (spec.x_mix.rows() != spec.q || spec.x_mix.cols() != spec.q) {
    problems.push_back("x_mix must be q x q");
  } else if (spec.q > 0) {
    if (!spec.x_mix.allFinite()) {
      problems.push_back("x_mix must be finite");
    } else {
      const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(spec.x_mix).singularValues();
      if (!(sv.minCoeff() > 1e-10 * sv.maxCoeff())) {
        problems.push_back("x_mix is singular: Var(l'X | T) must be positive definite");
      }
    }
  }
  for (double v : spec.beta) {
    if (!std::isfinite(v)) problems.push_back("beta must be finite");
  }
  if (!(spec.theta_gamma > b / 4.0)) {
    std::ostringstream os;
    os << "theta smoothness " << spec.theta_gamma << " must exceed b/4 = " << b / 4.0;
    problems.push_back(os.str());
  }
  if (spec.f_alpha && !(*spec.f_alpha > 0.5)) problems.push_back("declared alpha must exceed 1/2");
  if (!(spec.f_seminorm >= 0.0)) problems.push_back("seminorm bound L must be nonnegative");
  if (!(spec.w.sigma >= 0.0) || !std::isfinite(spec.w.sigma)) {
    problems.push_back("noise sigma must be finite and nonnegative");
  }
  if (!(std::abs(spec.t_law.slope) < 2.0)) {
    problems.push_back("T density slope must satisfy |slope| < 2");
  }
  auto check_fn = [&](const FunctionSpec& fn, const std::string& label) {
    if (fn.kind == FunctionSpec::Kind::Step && fn.levels.empty()) {
      problems.push_back(label + ": step function needs levels");
    }
    if (fn.kind == FunctionSpec::Kind::PowerAbs && !(fn.exponent > 0.0)) {
      problems.push_back(label + ": power exponent must be positive");
    }
    if (!std::isfinite(fn.amplitude) || !std::isfinite(fn.frequency) ||
        !std::isfinite(fn.offset) || !std::isfinite(fn.exponent)) {
      problems.push_back(label + ": parameters must be finite");
    }
  };
  for (std::size_t j = 0; j < spec.theta.size(); ++j) check_fn(spec.theta[j], "theta" + std::to_string(j + 1));
  check_fn(spec.f, "f");
  return problems;
}

void check_spec(const DgpSpec& spec, int b) {
  const auto problems = validate_spec(spec, b);
  if (problems.empty()) return;
  std::string msg = "invalid dgp '" + spec.name + "':";
  for (const auto& p : problems) msg += " " + p + ";";
  msg.pop_back();
  throw InvalidSpec(msg);
}

Dataset generate(const DgpSpec& spec, int n, std::uint64_t seed) {
  check_spec(spec);
  if (n <= spec.q + 1) throw InvalidArgument("generate: need n > q + 1");
  const int q = spec.q;
  Rng rng(seed);
  Eigen::VectorXd y(n), t(n);
  Eigen::MatrixXd x(n, q);
  Eigen::VectorXd v(q);
  const double unif_scale = std::sqrt(3.0) * spec.w.sigma;
  for (int i = 0; i < n; ++i) {
    t[i] = spec.t_law.inverse_cdf(rng.uniform());
    for (int k = 0; k < q; ++k) v[k] = rng.uniform(-1.0, 1.0);
    const Eigen::VectorXd eps = spec.x_mix * v;
    double mean = spec.f(t[i]);
    for (int j = 0; j < q; ++j) {
      x(i, j) = spec.theta[static_cast<std::size_t>(j)](t[i]) + eps[j];
      mean += spec.beta[static_cast<std::size_t>(j)] * x(i, j);
    }
    double w = 0.0;
    if (spec.w.sigma > 0.0) {
      w = spec.w.kind == NoiseSpec::Kind::Gaussian ? spec.w.sigma * rng.normal()
                                                   : unif_scale * rng.uniform(-1.0, 1.0);
    }
    y[i] = mean + w;
  }
  return Dataset(std::move(y), std::move(x), std::move(t));
}

Eigen::MatrixXd noise_covariance(const DgpSpec& spec) {
  return spec.x_mix * spec.x_mix.transpose() / 3.0;
}

double expectation_t(const DgpSpec& spec, const std::function<double(double)>& g) {
  return integrate01([&](double t) { return g(t) * spec.t_law.density(t); });
}

Eigen::MatrixXd population_covariance(const DgpSpec& spec) {
  check_spec(spec);
  const int q = spec.q;
  Eigen::VectorXd m(q);
  for (int j = 0; j < q; ++j) {
    m[j] = expectation_t(spec, [&](double t) { return spec.theta[static_cast<std::size_t>(j)](t); });
  }
  Eigen::MatrixXd cov(q, q);
  for (int j = 0; j < q; ++j) {
    for (int k = j; k < q; ++k) {
      const auto& a = spec.theta[static_cast<std::size_t>(j)];
      const auto& b = spec.theta[static_cast<std::size_t>(k)];
      cov(j, k) = expectation_t(spec, [&](double t) { return (a(t) - m[j]) * (b(t) - m[k]); });
      cov(k, j) = cov(j, k);
    }
  }
  return cov + noise_covariance(spec);
}

std::vector<DgpSpec> builtin_dgps() {
  const double s3 = std::sqrt(3.0);
  // theta_j' is orthogonal to sin(2 pi t)' on [0, 1], which keeps the sieve
  // bias of f out of the linear coefficients to first order.
  const std::vector<FunctionSpec> theta4 = {
      FunctionSpec::linear(0.5, 0.5), FunctionSpec::cosine(0.4, 1.0),
      FunctionSpec::sine(0.3, 2.0), FunctionSpec::power_abs(0.5, 0.5, 2.0)};
  const std::vector<std::string> common = {
      "T uniform on [0, 1]: density bounded in [1, 1]",
      "X noise uniform with bounded support, independent of T",
      "Var(l'X | T) = l' Sigma l > 0 since the mixing matrix is nonsingular",
      "theta_j smooth: declared gamma = 1 > b/4 for b = 3",
      "W Gaussian with finite moments of every order"};

  DgpSpec base;
  base.q = 4;
  base.beta = {1.5, -1.0, 0.0, 0.0};
  base.theta = theta4;
  base.theta_gamma = 1.0;
  base.f = FunctionSpec::sine(1.0, 1.0);
  base.f_alpha = 1.0;
  base.f_seminorm = kTwoPi;
  base.x_mix = s3 * Eigen::MatrixXd::Identity(4, 4);
  base.w = {NoiseSpec::Kind::Gaussian, 1.0};
  base.assumptions = common;

  std::vector<DgpSpec> out;

  DgpSpec d = base;
  d.name = "default";
  d.description = "q = 4, beta = (1.5, -1, 0, 0), Sigma = I, f(t) = sin(2 pi t), sigma = 1";
  out.push_back(d);

  DgpSpec smooth = base;
  smooth.name = "smooth-f";
  smooth.description = "q = 2, beta = (1, -1), f(t) = sin(2 pi t + 1) with declared alpha = 1";
  // A zero phase gives equal dyadic bias at K = 2 and K = 4; phase 1 does not.
  smooth.f = FunctionSpec::sine(1.0, 1.0, 1.0);
  smooth.q = 2;
  smooth.beta = {1.0, -1.0};
  smooth.theta = {theta4[0], theta4[1]};
  smooth.x_mix = s3 * Eigen::MatrixXd::Identity(2, 2);
  out.push_back(smooth);

  DgpSpec rough = base;
  rough.name = "rough-f";
  rough.description = "default design with f(t) = 2 |t - 1/2|^0.6, declared alpha = 0.6";
  rough.f = FunctionSpec::power_abs(2.0, 0.5, 0.6);
  rough.f_alpha = 0.6;
  rough.f_seminorm = 2.0;
  out.push_back(rough);

  DgpSpec tri = base;
  tri.name = "triangle-f";
  tri.description = "default design with a triangle wave of period 1/2, Lipschitz, alpha = 1";
  tri.f = FunctionSpec::triangle(1.0, 2.0);
  tri.f_alpha = 1.0;
  tri.f_seminorm = 8.0;
  tri.assumptions.push_back("f nondifferentiable at its kinks; alpha declared by Lipschitz membership");
  out.push_back(tri);

  DgpSpec null = base;
  null.name = "null-f";
  null.description = "default design with f = 0 (alpha label: exact)";
  null.f = FunctionSpec::zero();
  null.f_alpha.reset();
  null.f_seminorm = 0.0;
  out.push_back(null);

  DgpSpec corr = base;
  corr.name = "correlated";
  corr.description = "default design with correlated noise between I0 and its complement";
  Eigen::MatrixXd L(4, 4);
  L << 1.0, 0.0, 0.0, 0.0,
       0.5, 1.0, 0.0, 0.0,
       0.6, 0.3, 1.0, 0.0,
       0.2, 0.6, 0.4, 1.0;
  corr.x_mix = s3 * L;
  out.push_back(corr);

  return out;
}

DgpSpec builtin_dgp(const std::string& name) {
  for (auto& d : builtin_dgps()) {
    if (d.name == name) return d;
  }
  throw InvalidSpec("unknown dgp '" + name + "'");
}

ExperimentReport run_selection_experiment(const DgpSpec& spec, const CaseParams& params,
                                          const std::optional<PenaltyKind>& penalty,
                                          std::span<const int> n_list, int reps,
                                          std::uint64_t seed, const ExperimentOptions& options) {
  if (reps < 1) throw InvalidArgument("selection experiment: need reps >= 1");
  validate_n_list(n_list);
  check_spec(spec, params.b);
  check_case2_alpha(spec, params);

  ExperimentReport rep;
  rep.kind = "selection";
  rep.dgp = spec.name;
  rep.params = params;
  rep.penalty = penalty ? *penalty : default_penalty(params);
  rep.n_list.assign(n_list.begin(), n_list.end());
  rep.reps = reps;
  rep.seed = seed;
  const std::vector<int> truth = spec.support();

  for (int n : n_list) {
    std::vector<ReplicationRecord> recs(static_cast<std::size_t>(reps));
    parallel_for(recs.size(), options.threads, [&](std::size_t i) {
      recs[i] = run_one(spec, params, penalty, n, static_cast<int>(i), seed, truth, std::nullopt);
    });
    SelectionRow row;
    row.n = n;
    row.reps = reps;
    std::vector<int> ks;
    int agree = 0, ok = 0;
    for (const auto& r : recs) {
      if (r.outcome == "correct") ++row.correct;
      else if (r.outcome == "overfit") ++row.overfit;
      else if (r.outcome == "underfit") ++row.underfit;
      else ++row.failed;
      if (r.outcome != "failed") {
        ks.push_back(r.K);
        ++ok;
        agree += r.bic_agrees ? 1 : 0;
      }
    }
    row.p_correct = static_cast<double>(row.correct) / reps;
    row.p_overfit = static_cast<double>(row.overfit) / reps;
    row.p_underfit = static_cast<double>(row.underfit) / reps;
    row.p_failed = static_cast<double>(row.failed) / reps;
    row.se_correct = stats::binomial_se(row.p_correct, reps);
    row.se_overfit = stats::binomial_se(row.p_overfit, reps);
    row.se_underfit = stats::binomial_se(row.p_underfit, reps);
    row.K = modal_value(ks);
    row.bic_agreement = ok > 0 ? static_cast<double>(agree) / ok : 0.0;
    if (spec.f.kind == FunctionSpec::Kind::Zero && n >= 1000 && row.bic_agreement < 0.95) {
      std::ostringstream os;
      os << "null sanity: agreement with the BIC-style choice is " << row.bic_agreement
         << " at n = " << n;
      rep.warnings.push_back(os.str());
    }
    if (row.failed > 0) {
      rep.warnings.push_back(std::to_string(row.failed) + " failed replication(s) at n = " +
                             std::to_string(n));
    }
    rep.selection.push_back(row);
    if (options.keep_replications) {
      rep.replications.insert(rep.replications.end(), recs.begin(), recs.end());
    }
  }
  return rep;
}

ExperimentReport run_coverage_experiment(const DgpSpec& spec, const CaseParams& params_in, int n,
                                         int reps, double level, std::uint64_t seed,
                                         const ExperimentOptions& options) {
  if (reps < 100) throw InvalidArgument("coverage experiment: need reps >= 100");
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must lie in (0, 1)");
  check_spec(spec, params_in.b);
  check_case2_alpha(spec, params_in);
  const std::vector<int> truth = spec.support();
  CaseParams params = params_in;
  if (params.selection_case == Case::Case1 && !params.I0) params.I0 = truth;

  ExperimentReport rep;
  rep.kind = "coverage";
  rep.dgp = spec.name;
  rep.params = params;
  rep.penalty = default_penalty(params);
  rep.n_list = {n};
  rep.reps = reps;
  rep.seed = seed;
  rep.level = level;

  std::vector<ReplicationRecord> recs(static_cast<std::size_t>(reps));
  parallel_for(recs.size(), options.threads, [&](std::size_t i) {
    recs[i] = run_one(spec, params, std::nullopt, n, static_cast<int>(i), seed, truth, level);
  });

  const double z = stats::normal_quantile(0.5 * (1.0 + level));
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  int failed = 0;
  for (const auto& r : recs) failed += r.outcome == "failed" ? 1 : 0;
  const int valid = reps - failed;
  for (int j = 0; j < spec.q; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    CoverageRow row;
    row.column = j;
    row.name = "x" + std::to_string(j + 1);
    row.beta = spec.beta[jj];
    row.in_support = row.beta != 0.0;
    int covered = 0, excluded = 0;
    std::vector<double> zs;
    double abs_scaled = 0.0;
    for (const auto& r : recs) {
      if (r.outcome == "failed") continue;
      const bool included = std::binary_search(r.selected.begin(), r.selected.end(), j);
      if (!included) {
        ++excluded;
        covered += row.beta == 0.0 ? 1 : 0;
        continue;
      }
      ++row.included;
      const double est = r.beta[jj];
      const double se = r.se[jj];
      if (std::abs(est - row.beta) <= z * se) ++covered;
      if (row.in_support && se > 0.0) zs.push_back((est - row.beta) / se);
      abs_scaled += std::abs(sqrt_n * est);
    }
    row.coverage = valid > 0 ? static_cast<double>(covered) / valid : 0.0;
    row.coverage_se = stats::binomial_se(row.coverage, valid);
    row.exclusion_freq = valid > 0 ? static_cast<double>(excluded) / valid : 0.0;
    if (!zs.empty()) {
      const auto ks = stats::ks_test_normal(zs);
      row.ks_statistic = ks.statistic;
      row.ks_p_value = ks.p_value;
      row.ks_count = ks.n;
    }
    if (!row.in_support && row.included > 0) row.mean_abs_scaled = abs_scaled / row.included;
    rep.coverage.push_back(row);
  }
  if (failed > 0) rep.warnings.push_back(std::to_string(failed) + " failed replication(s)");
  if (options.keep_replications) rep.replications = std::move(recs);
  return rep;
}

ExperimentReport run_rate_experiment(const DgpSpec& spec, std::span<const int> n_list, int reps,
                                     std::uint64_t seed, int b,
                                     const ExperimentOptions& options) {
  if (reps < 1) throw InvalidArgument("rate experiment: need reps >= 1");
  validate_n_list(n_list);
  if (n_list.size() < 4) throw InvalidArgument("rate experiment: need at least 4 sample sizes");
  const double ratio = static_cast<double>(n_list[1]) / n_list[0];
  for (std::size_t k = 1; k < n_list.size(); ++k) {
    const double rk = static_cast<double>(n_list[k]) / n_list[k - 1];
    if (!(rk > 1.0) || std::abs(rk - ratio) > 0.01 * ratio) {
      throw InvalidArgument("rate experiment: n list must be increasing and geometric");
    }
  }
  check_spec(spec, b);
  const int r = SieveConfig{b, 2}.r();

  CaseParams params;
  params.selection_case = Case::Case1;
  params.b = b;
  params.I0 = spec.support();

  ExperimentReport rep;
  rep.kind = "rate";
  rep.dgp = spec.name;
  rep.params = params;
  rep.penalty = default_penalty(params);
  rep.n_list.assign(n_list.begin(), n_list.end());
  rep.reps = reps;
  rep.seed = seed;
  if (spec.f_alpha && *spec.f_alpha > r) {
    std::ostringstream os;
    os << "declared alpha " << *spec.f_alpha << " exceeds r = " << r
       << "; the sieve rate saturates at alpha = r";
    rep.warnings.push_back(os.str());
  }

  const std::vector<int> truth = spec.support();
  std::vector<double> xs, ys;
  bool degenerate = false;
  for (int n : n_list) {
    std::vector<ReplicationRecord> recs(static_cast<std::size_t>(reps));
    parallel_for(recs.size(), options.threads, [&](std::size_t i) {
      recs[i] = run_one(spec, params, std::nullopt, n, static_cast<int>(i), seed, truth, std::nullopt);
    });
    RateRow row;
    row.n = n;
    std::vector<double> errs;
    std::vector<int> ks;
    for (const auto& rec : recs) {
      if (rec.outcome == "failed") {
        ++row.failed;
        continue;
      }
      errs.push_back(rec.f_error);
      ks.push_back(rec.K);
    }
    row.median_error = stats::median(errs);
    row.mean_error = stats::mean(errs);
    row.modal_k = modal_value(ks);
    const double nln = n / std::log(static_cast<double>(n));
    if (spec.f_alpha) {
      row.target_k = round_to_power_of_two(std::pow(nln, 1.0 / (2.0 * *spec.f_alpha + 1.0)));
      row.within_one_step =
          row.modal_k > 0 && std::abs(std::log2(static_cast<double>(row.modal_k)) -
                                      std::log2(static_cast<double>(row.target_k))) <= 1.0;
    }
    if (!(row.median_error > 1e-20) || !std::isfinite(row.median_error)) degenerate = true;
    xs.push_back(std::log(nln));
    ys.push_back(std::log(row.median_error));
    if (row.failed > 0) {
      rep.warnings.push_back(std::to_string(row.failed) + " failed replication(s) at n = " +
                             std::to_string(n));
    }
    rep.rate.push_back(row);
    if (options.keep_replications) {
      rep.replications.insert(rep.replications.end(), recs.begin(), recs.end());
    }
  }

  RateSummary summary;
  summary.degenerate = degenerate;
  if (spec.f_alpha) {
    const double a = *spec.f_alpha;
    summary.expected_slope = -2.0 * a / (2.0 * a + 1.0);
  }
  if (degenerate) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    summary.fit = {nan, nan, nan, nan, nan, nan};
    rep.warnings.push_back("median error is zero at some n: slope undefined (degenerate)");
  } else {
    summary.fit = stats::linear_fit(xs, ys);
  }
  rep.rate_summary = summary;
  return rep;
}

ExperimentReport run_sigma_experiment(const DgpSpec& spec, std::span<const int> n_list, int reps,
                                      double a, std::uint64_t seed, int b,
                                      const ExperimentOptions& options) {
  if (reps < 1) throw InvalidArgument("sigma experiment: need reps >= 1");
  if (!(a > 0.0)) throw InvalidArgument("sigma experiment: a must be positive");
  validate_n_list(n_list);
  check_spec(spec, b);
  const int r = SieveConfig{b, 2}.r();

  ExperimentReport rep;
  rep.kind = "sigma";
  rep.dgp = spec.name;
  rep.params.selection_case = Case::Case3;
  rep.params.b = b;
  rep.params.a = a;
  rep.penalty = PenaltyKind::unknown_alpha(a);
  rep.n_list.assign(n_list.begin(), n_list.end());
  rep.reps = reps;
  rep.seed = seed;

  std::vector<int> all(static_cast<std::size_t>(spec.q));
  for (int j = 0; j < spec.q; ++j) all[static_cast<std::size_t>(j)] = j;
  auto generator = [&](int n, int i) { return generate(spec, n, replication_seed(seed, n, i)); };
  auto k_rule = [&](int n) {
    return clamp_to_grid(pilot_dimension_a(n, a), dimension_grid({b, n})).K;
  };
  rep.sigma = sigma_convergence_diagnostic(generator, noise_covariance(spec), all, k_rule, r,
                                           n_list, reps, options.threads);
  if (!rep.sigma->decreasing_trend) {
    rep.warnings.push_back("Sigma_hat distance does not decrease with n");
  }
  return rep;
}

}  // namespace plsel
