#include "plsel/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "plsel/csv.hpp"
#include "plsel/errors.hpp"
#include "plsel/inference.hpp"
#include "plsel/parallel.hpp"
#include "plsel/report.hpp"
#include "plsel/selector.hpp"
#include "plsel/simlab.hpp"

namespace plsel::cli {

namespace {

struct Options {
  std::string command;
  // data
  std::string csv;
  std::string y;
  std::string t;
  std::vector<std::string> x;
  bool rescale_t = false;
  // model
  std::string case_name = "case3";
  int b = 3;
  std::optional<double> alpha;
  std::optional<double> a;
  std::vector<std::string> i0;
  std::optional<int> K;
  std::string penalty = "default";
  std::optional<double> c;
  bool no_clamp = false;
  double level = 0.95;
  // experiment
  std::string kind;
  std::string dgp = "default";
  std::string dgp_file;
  std::vector<int> n_list;
  int reps = 0;
  std::optional<std::uint64_t> seed;
  std::string dump_csv;
  // output
  std::string out;
  int threads = 0;
};

// Experiments default to the unknown-smoothness rule with this exponent.
constexpr double kDefaultA = 0.1;

bool is_numerical(ErrorKind k) {
  return k == ErrorKind::RankDeficient || k == ErrorKind::AllCandidatesRankDeficient ||
         k == ErrorKind::DegenerateDoF;
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string join(const std::vector<std::string>& v, const char* sep = ", ") {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? sep : "") + v[k];
  return s;
}

std::vector<std::string> pick(const std::vector<int>& idx, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (int j : idx) out.push_back(names[static_cast<std::size_t>(j)]);
  return out;
}

// Names first; a token that is not a name may be a 1-based column number.
std::vector<int> resolve_columns(const std::vector<std::string>& tokens,
                                 const std::vector<std::string>& names) {
  std::vector<int> idx;
  for (const auto& tok : tokens) {
    const auto it = std::find(names.begin(), names.end(), tok);
    if (it != names.end()) {
      idx.push_back(static_cast<int>(it - names.begin()));
      continue;
    }
    int v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size() || v < 1 ||
        v > static_cast<int>(names.size())) {
      throw InvalidArgument("unknown covariate '" + tok + "'");
    }
    idx.push_back(v - 1);
  }
  std::sort(idx.begin(), idx.end());
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
    throw InvalidArgument("covariate listed twice in --i0");
  }
  return idx;
}

CaseParams case_params(const Options& o, const std::vector<std::string>& names) {
  CaseParams p;
  p.selection_case = case_from_string(o.case_name);
  p.b = o.b;
  p.alpha = o.alpha;
  p.a = o.a;
  p.clamp_pilot = !o.no_clamp;
  if (!o.i0.empty()) p.I0 = resolve_columns(o.i0, names);
  switch (p.selection_case) {
    case Case::Case1:
      if (!p.I0) throw MissingParameter("case1 requires --i0");
      break;
    case Case::Case2:
      if (!p.alpha) throw MissingParameter("case2 requires --alpha");
      break;
    case Case::Case3:
      if (!p.a) throw MissingParameter("case3 requires --a");
      break;
    case Case::Full: break;
  }
  return p;
}

std::optional<PenaltyKind> penalty_option(const Options& o) {
  if (o.penalty == "default") return std::nullopt;
  if (o.penalty == "adaptive_k") return PenaltyKind::adaptive_k();
  if (o.penalty == "known_alpha") {
    if (!o.alpha) throw MissingParameter("--penalty known_alpha requires --alpha");
    return PenaltyKind::known_alpha(*o.alpha);
  }
  if (o.penalty == "unknown_alpha") {
    if (!o.a) throw MissingParameter("--penalty unknown_alpha requires --a");
    return PenaltyKind::unknown_alpha(*o.a);
  }
  if (!o.c) throw MissingParameter("--penalty additive requires --c");
  return PenaltyKind::generic_additive(*o.c);
}

json config_json(const Options& o) {
  json j = {{"command", o.command}};
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  if (o.command == "fit" || o.command == "select") {
    j["csv"] = o.csv;
    j["y"] = o.y;
    j["t"] = o.t;
    j["x"] = o.x;
    j["rescale_t"] = o.rescale_t;
  }
  if (o.command == "fit") {
    j["i0"] = o.i0;
    j["K"] = opt(o.K);
    j["b"] = o.b;
    j["level"] = o.level;
  }
  if (o.command == "select" || o.command == "experiment") {
    j["case"] = o.case_name;
    j["b"] = o.b;
    j["alpha"] = opt(o.alpha);
    j["a"] = opt(o.a);
    j["i0"] = o.i0;
    j["penalty"] = o.penalty;
    j["c"] = opt(o.c);
    j["clamp_pilot"] = !o.no_clamp;
    j["level"] = o.level;
  }
  if (o.command == "experiment") {
    j["kind"] = o.kind;
    j["dgp"] = o.dgp_file.empty() ? o.dgp : o.dgp_file;
    j["n"] = o.n_list;
    j["reps"] = o.reps;
    j["seed"] = opt(o.seed);
  }
  return j;
}

LoadedCsv load_data(const Options& o) {
  CsvRoles roles{o.y, o.t, o.x, o.rescale_t};
  return load_csv(o.csv, roles);
}

json data_json(const LoadedCsv& d) {
  json j = {{"n", d.data.n()}, {"q", d.data.q()}, {"columns", d.data.x_names()}};
  j["t_rescale"] = d.rescale ? json{{"min", d.rescale->min}, {"max", d.rescale->max}} : json(nullptr);
  return j;
}

void print_intervals(std::ostream& s, const InferenceReport& inf,
                     const std::vector<std::string>& names) {
  s << "sigma2 = " << fmt(inf.sigma2) << " (" << inf.regime << ")\n";
  s << fmt(100.0 * inf.level, 4) << "% confidence intervals:\n";
  for (const auto& iv : inf.intervals) {
    s << "  " << names[static_cast<std::size_t>(iv.column)] << "  " << fmt(iv.estimate) << "  ["
      << fmt(iv.lo) << ", " << fmt(iv.hi) << "]  se " << fmt(iv.se) << "\n";
  }
}

Envelope cmd_fit(const Options& o, std::ostream& summary) {
  if (!o.K) throw MissingParameter("fit requires --K");
  const LoadedCsv d = load_data(o);
  const auto& names = d.data.x_names();
  ModelIndex m;
  m.I = resolve_columns(o.i0, names);
  m.K = *o.K;
  m.r = SieveConfig{o.b, d.data.n()}.r();
  m.basis().validate();
  const FitResult fit = fit_model(d.data, m);
  const InferenceReport inf = infer(fit, d.data.q(), o.level);
  Envelope env;
  env.payload = {{"data", data_json(d)},
                 {"case", "case0"},
                 {"fit", fit_json(fit, names)},
                 {"inference", inference_json(inf, names)}};
  env.warnings = d.warnings;
  summary << "case0 fit: I = {" << join(pick(m.I, names)) << "}, K = " << m.K
          << ", r = " << m.r << ", n = " << d.data.n() << "\n";
  summary << "gamma_n = " << fmt(fit.gamma_n) << "\n";
  print_intervals(summary, inf, names);
  return env;
}

Envelope cmd_select(const Options& o, std::ostream& summary) {
  if (o.case_name == "case0") {
    Options fit_opts = o;
    fit_opts.command = "fit";
    return cmd_fit(fit_opts, summary);
  }
  const LoadedCsv d = load_data(o);
  const auto& names = d.data.x_names();
  const CaseParams params = case_params(o, names);
  const SelectionResult res =
      select(d.data, params, penalty_option(o), {resolve_threads(o.threads)});
  const InferenceReport inf = infer(res, d.data.q(), o.level);
  Envelope env;
  env.payload = {{"data", data_json(d)},
                 {"selection", selection_json(res, names)},
                 {"inference", inference_json(inf, names)}};
  env.warnings = d.warnings;
  env.warnings.insert(env.warnings.end(), res.warnings.begin(), res.warnings.end());

  const auto& m = res.chosen.model;
  summary << to_string(res.selection_case) << ", penalty " << to_string(res.penalty.variant);
  if (res.penalty.variant != PenaltyKind::Variant::AdaptiveK) summary << "(" << fmt(res.penalty.param) << ")";
  summary << ", n = " << d.data.n() << ", K grid [" << res.grid.lower() << ", " << res.grid.upper()
          << "]\n";
  summary << "selected: {" << join(pick(m.I, names)) << "}, K = " << m.K << "\n";
  const auto& w = res.table[std::distance(
      res.table.begin(), std::find_if(res.table.begin(), res.table.end(),
                                      [&](const LedgerEntry& e) { return e.model == m; }))];
  summary << "gamma_n = " << fmt(w.gamma_n) << ", pen = " << fmt(w.pen)
          << ", criterion = " << fmt(w.criterion) << "\n";
  print_intervals(summary, inf, names);
  return env;
}

DgpSpec experiment_dgp(const Options& o) {
  return o.dgp_file.empty() ? builtin_dgp(o.dgp) : load_dgp_file(o.dgp_file);
}

Envelope cmd_experiment(const Options& o, std::ostream& summary) {
  const DgpSpec spec = experiment_dgp(o);
  std::vector<std::string> names;
  for (int j = 0; j < spec.q; ++j) names.push_back("x" + std::to_string(j + 1));
  ExperimentOptions eo;
  eo.threads = resolve_threads(o.threads);
  eo.keep_replications = !o.dump_csv.empty();
  const std::uint64_t seed = *o.seed;
  if (o.n_list.empty()) throw MissingParameter("experiment requires --n");

  ExperimentReport rep;
  if (o.kind == "selection") {
    rep = run_selection_experiment(spec, case_params(o, names), penalty_option(o), o.n_list,
                                   o.reps, seed, eo);
  } else if (o.kind == "coverage") {
    if (o.n_list.size() != 1) throw InvalidArgument("coverage experiment takes a single --n");
    Options oc = o;
    if (o.case_name == "case3" && !o.a) oc.case_name = "case1";
    CaseParams params;
    params.selection_case = case_from_string(oc.case_name);
    params.b = o.b;
    params.alpha = o.alpha;
    params.a = o.a;
    params.clamp_pilot = !o.no_clamp;
    if (!o.i0.empty()) params.I0 = resolve_columns(o.i0, names);
    rep = run_coverage_experiment(spec, params, o.n_list.front(), o.reps, o.level, seed, eo);
  } else if (o.kind == "rate") {
    rep = run_rate_experiment(spec, o.n_list, o.reps, seed, o.b, eo);
  } else {
    if (!o.a) throw MissingParameter("sigma experiment requires --a");
    rep = run_sigma_experiment(spec, o.n_list, o.reps, *o.a, seed, o.b, eo);
  }

  Envelope env;
  env.payload = experiment_json(rep);
  env.payload["dgp_spec"] = dgp_json(spec);
  env.warnings = rep.warnings;
  if (!o.dump_csv.empty()) write_file_atomic(o.dump_csv, replications_csv(rep));

  summary << o.kind << " experiment on '" << spec.name << "', reps = " << o.reps
          << ", seed = " << seed << "\n";
  for (const auto& r : rep.selection) {
    summary << "  n = " << r.n << "  K = " << r.K << "  correct " << fmt(r.p_correct, 4)
            << "  overfit " << fmt(r.p_overfit, 4) << "  underfit " << fmt(r.p_underfit, 4)
            << "  failed " << fmt(r.p_failed, 4) << "\n";
  }
  for (const auto& r : rep.coverage) {
    summary << "  " << r.name << "  beta = " << fmt(r.beta) << "  coverage " << fmt(r.coverage, 4)
            << "  excluded " << fmt(r.exclusion_freq, 4);
    if (r.ks_count > 0) summary << "  KS p = " << fmt(r.ks_p_value, 4);
    summary << "\n";
  }
  for (const auto& r : rep.rate) {
    summary << "  n = " << r.n << "  median error " << fmt(r.median_error) << "  modal K "
            << r.modal_k << "  target K " << r.target_k << "\n";
  }
  if (rep.rate_summary) {
    const auto& s = *rep.rate_summary;
    if (s.degenerate) {
      summary << "  slope: degenerate\n";
    } else {
      summary << "  slope " << fmt(s.fit.slope, 4) << "  95% CI [" << fmt(s.fit.ci_lo, 4) << ", "
              << fmt(s.fit.ci_hi, 4) << "]  R^2 " << fmt(s.fit.r_squared, 4) << "\n";
    }
  }
  if (rep.sigma) {
    for (const auto& r : rep.sigma->rows) {
      summary << "  n = " << r.n << "  K = " << r.K << "  median distance "
              << fmt(r.median_distance) << "\n";
    }
  }
  return env;
}

Envelope cmd_catalog(std::ostream& summary) {
  json list = json::array();
  for (const auto& d : builtin_dgps()) {
    json j = dgp_json(d);
    j["problems"] = validate_spec(d);
    list.push_back(j);
    summary << d.name << ": " << d.description << "\n";
  }
  Envelope env;
  env.payload = {{"dgps", list}};
  return env;
}

void add_data_options(CLI::App* sub, Options& o) {
  sub->add_option("--csv", o.csv, "Input CSV file")->required();
  sub->add_option("--y", o.y, "Response column")->required();
  sub->add_option("--t", o.t, "Nonparametric covariate column")->required();
  sub->add_option("--x", o.x, "Covariate columns (default: all others)")->delimiter(',');
  sub->add_flag("--rescale-t", o.rescale_t, "Map t affinely onto [0, 1]");
}

void add_model_options(CLI::App* sub, Options& o) {
  sub->add_option("--case", o.case_name, "case0, case1, case2, case3 or full")
      ->check(CLI::IsMember({"case0", "case1", "case2", "case3", "full"}));
  sub->add_option("--alpha", o.alpha, "Known smoothness (case2)");
  sub->add_option("--a", o.a, "Pilot exponent (case3)");
  sub->add_option("--i0", o.i0, "Covariates, by name or 1-based index")->delimiter(',');
  sub->add_option("--penalty", o.penalty, "default, adaptive_k, known_alpha, unknown_alpha, additive")
      ->check(CLI::IsMember({"default", "adaptive_k", "known_alpha", "unknown_alpha", "additive"}));
  sub->add_option("--c", o.c, "Constant of the additive penalty");
  sub->add_flag("--no-clamp", o.no_clamp, "Use the pilot K even outside the grid");
}

void add_common_options(CLI::App* sub, Options& o) {
  sub->add_option("--b", o.b, "Smoothness budget b >= 3")->check(CLI::Range(3, 64));
  sub->add_option("--level", o.level, "Confidence level in (0, 1)");
  sub->add_option("--out", o.out, "Write the JSON envelope here");
  sub->add_option("--threads", o.threads, "Worker threads (default: PLSEL_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Penalized least-squares selection for partially linear models", "plsel"};
  app.require_subcommand(1);

  auto* fit = app.add_subcommand("fit", "Fit a given (I, K) and report inference");
  add_data_options(fit, o);
  fit->add_option("--i0", o.i0, "Covariates, by name or 1-based index")->delimiter(',');
  fit->add_option("--K", o.K, "Sieve dimension (power of two)")->required();
  add_common_options(fit, o);

  auto* sel = app.add_subcommand("select", "Select (I, K) on a CSV dataset");
  add_data_options(sel, o);
  add_model_options(sel, o);
  sel->add_option("--K", o.K, "Sieve dimension for case0");
  add_common_options(sel, o);

  auto* exp = app.add_subcommand("experiment", "Run a Monte Carlo experiment");
  exp->add_option("kind", o.kind, "selection, coverage, rate or sigma")
      ->required()
      ->check(CLI::IsMember({"selection", "coverage", "rate", "sigma"}));
  exp->add_option("--dgp", o.dgp, "Catalog DGP name");
  exp->add_option("--dgp-file", o.dgp_file, "DGP spec as JSON")->check(CLI::ExistingFile);
  exp->add_option("--n", o.n_list, "Sample sizes, comma separated")->delimiter(',')->required();
  exp->add_option("--reps", o.reps, "Replications per n")->required();
  exp->add_option("--seed", o.seed, "Base seed")->required();
  exp->add_option("--dump-csv", o.dump_csv, "Write per-replication records as CSV");
  add_model_options(exp, o);
  add_common_options(exp, o);

  auto* cat = app.add_subcommand("catalog", "List the built-in DGPs");
  cat->add_option("--out", o.out, "Write the JSON envelope here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  o.command = app.get_subcommands().front()->get_name();
  if (o.command == "experiment" && (o.kind == "selection" || o.kind == "sigma") &&
      o.case_name == "case3" && !o.a) {
    o.a = kDefaultA;
  }
  if (!(o.level > 0.0 && o.level < 1.0)) {
    err << "error: --level must lie in (0, 1)\n";
    return kUsage;
  }

  const bool to_file = !o.out.empty() && o.out != "-";
  std::ostream& summary = to_file ? out : err;
  const auto start = std::chrono::steady_clock::now();
  try {
    Envelope env;
    if (o.command == "fit") env = cmd_fit(o, summary);
    else if (o.command == "select") env = cmd_select(o, summary);
    else if (o.command == "experiment") env = cmd_experiment(o, summary);
    else env = cmd_catalog(summary);
    env.command = o.command == "experiment" ? "experiment " + o.kind : o.command;
    env.config = config_json(o);
    env.threads = resolve_threads(o.threads);
    env.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& w : env.warnings) summary << "warning: " << w << "\n";
    const std::string text = envelope_json(env).dump(2) + "\n";
    if (to_file) write_file_atomic(o.out, text);
    else out << text;
    return kOk;
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return is_numerical(e.kind()) ? kNumerical : kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv = {"plsel"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace plsel::cli
