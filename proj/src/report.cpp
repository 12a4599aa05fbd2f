#include "plsel/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "plsel/csv.hpp"
#include "plsel/errors.hpp"

namespace plsel {

namespace {

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

json names_of(const std::vector<int>& idx, const std::vector<std::string>& names) {
  json a = json::array();
  for (int j : idx) {
    a.push_back(j >= 0 && static_cast<std::size_t>(j) < names.size()
                    ? names[static_cast<std::size_t>(j)]
                    : "x" + std::to_string(j + 1));
  }
  return a;
}

json model_json(const ModelIndex& m, const std::vector<std::string>& names) {
  return {{"columns", names_of(m.I, names)}, {"indices", m.I}, {"K", m.K}, {"r", m.r},
          {"dim", m.dim()}};
}

json penalty_json(const PenaltyKind& p) {
  return {{"kind", to_string(p.variant)}, {"param", p.param}};
}

json params_json(const CaseParams& p) {
  json j = {{"case", to_string(p.selection_case)}, {"b", p.b}};
  j["alpha"] = p.alpha ? json(*p.alpha) : json(nullptr);
  j["a"] = p.a ? json(*p.a) : json(nullptr);
  j["I0"] = p.I0 ? json(*p.I0) : json(nullptr);
  j["clamp_pilot"] = p.clamp_pilot;
  return j;
}

json grid_json(const SieveGrid& g) { return {{"A", g.A}, {"J", g.J}, {"dims", g.dims}}; }

double get_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw InvalidSpec(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json matrix_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vector_json(m.row(i).transpose()));
  return a;
}

json fit_json(const FitResult& fit, const std::vector<std::string>& names) {
  json beta = json::array();
  for (std::size_t k = 0; k < fit.model.I.size(); ++k) {
    const int j = fit.model.I[k];
    beta.push_back({{"column", names_of({j}, names)[0]},
                    {"index", j},
                    {"estimate", number(fit.beta[static_cast<Eigen::Index>(k)])}});
  }
  return {{"model", model_json(fit.model, names)},
          {"n", fit.n()},
          {"gamma_n", number(fit.gamma_n)},
          {"rank_ok", fit.rank_ok},
          {"rcond", number(fit.rcond)},
          {"beta", beta},
          {"delta", vector_json(fit.delta)}};
}

json inference_json(const InferenceReport& r, const std::vector<std::string>& names) {
  json intervals = json::array();
  for (std::size_t k = 0; k < r.intervals.size(); ++k) {
    const auto& iv = r.intervals[k];
    intervals.push_back({{"column", names_of({iv.column}, names)[0]},
                         {"index", iv.column},
                         {"estimate", number(iv.estimate)},
                         {"se", number(iv.se)},
                         {"lo", number(iv.lo)},
                         {"hi", number(iv.hi)},
                         {"z", number(r.zstats[static_cast<Eigen::Index>(k)])}});
  }
  return {{"regime", r.regime},
          {"level", r.level},
          {"selected", names_of(r.selected, names)},
          {"sigma2", number(r.sigma2)},
          {"sigma_hat", matrix_json(r.sigma_hat)},
          {"beta_cov", matrix_json(r.beta_cov)},
          {"v_embedded", matrix_json(r.v_embedded)},
          {"intervals", intervals}};
}

json selection_json(const SelectionResult& s, const std::vector<std::string>& names) {
  json ledger = json::array();
  for (const auto& e : s.table) {
    ledger.push_back({{"columns", names_of(e.model.I, names)},
                      {"K", e.model.K},
                      {"gamma_n", number(e.gamma_n)},
                      {"pen", number(e.pen)},
                      {"criterion", e.rank_ok ? number(e.criterion) : json(nullptr)},
                      {"rank_ok", e.rank_ok}});
  }
  json pilot = nullptr;
  if (s.pilot) pilot = {{"K", s.pilot->K}, {"raw", s.pilot->raw}, {"clamped", s.pilot->clamped}};
  const int n = s.chosen.n();
  const Eigen::VectorXd beta = s.beta();
  json coef = json::array();
  for (std::size_t k = 0; k < s.chosen.model.I.size(); ++k) {
    const int j = s.chosen.model.I[k];
    coef.push_back({{"column", names_of({j}, names)[0]},
                    {"index", j},
                    {"estimate", number(beta[static_cast<Eigen::Index>(k)])}});
  }
  return {{"case", to_string(s.selection_case)},
          {"penalty", penalty_json(s.penalty)},
          {"n", n},
          {"grid", grid_json(s.grid)},
          {"pilot", pilot},
          {"selected", model_json(s.chosen.model, names)},
          {"gamma_n", number(s.chosen.gamma_n)},
          {"criterion", number(s.criterion)},
          {"lambda_norm_sq", number(s.lambda_norm_sq)},
          {"log_gamma_threshold", std::log(2.0) + std::pow(std::log(static_cast<double>(n)), 2)},
          {"gamma_ok", s.gamma_ok},
          {"beta", coef},
          {"delta", vector_json(s.delta())},
          {"ledger", ledger}};
}

json experiment_json(const ExperimentReport& r) {
  json j = {{"kind", r.kind},
            {"dgp", r.dgp},
            {"params", params_json(r.params)},
            {"penalty", penalty_json(r.penalty)},
            {"n_list", r.n_list},
            {"reps", r.reps},
            {"seed", r.seed},
            {"level", r.level}};
  json sel = json::array();
  for (const auto& row : r.selection) {
    sel.push_back({{"n", row.n},
                   {"reps", row.reps},
                   {"correct", row.correct},
                   {"overfit", row.overfit},
                   {"underfit", row.underfit},
                   {"failed", row.failed},
                   {"p_correct", row.p_correct},
                   {"p_overfit", row.p_overfit},
                   {"p_underfit", row.p_underfit},
                   {"p_failed", row.p_failed},
                   {"se_correct", number(row.se_correct)},
                   {"se_overfit", number(row.se_overfit)},
                   {"se_underfit", number(row.se_underfit)},
                   {"K", row.K},
                   {"bic_agreement", row.bic_agreement}});
  }
  j["selection"] = sel;
  json cov = json::array();
  for (const auto& row : r.coverage) {
    cov.push_back({{"column", row.name},
                   {"index", row.column},
                   {"beta", row.beta},
                   {"in_support", row.in_support},
                   {"included", row.included},
                   {"coverage", row.coverage},
                   {"coverage_se", number(row.coverage_se)},
                   {"exclusion_freq", row.exclusion_freq},
                   {"ks_statistic", row.ks_statistic},
                   {"ks_p_value", row.ks_p_value},
                   {"ks_count", row.ks_count},
                   {"mean_abs_scaled", row.mean_abs_scaled}});
  }
  j["coverage"] = cov;
  json rate = json::array();
  for (const auto& row : r.rate) {
    rate.push_back({{"n", row.n},
                    {"median_error", number(row.median_error)},
                    {"mean_error", number(row.mean_error)},
                    {"modal_k", row.modal_k},
                    {"target_k", row.target_k},
                    {"within_one_step", row.within_one_step},
                    {"failed", row.failed}});
  }
  j["rate"] = rate;
  if (r.rate_summary) {
    const auto& s = *r.rate_summary;
    j["rate_summary"] = {{"slope", number(s.fit.slope)},
                         {"intercept", number(s.fit.intercept)},
                         {"slope_se", number(s.fit.slope_se)},
                         {"slope_ci", {number(s.fit.ci_lo), number(s.fit.ci_hi)}},
                         {"r_squared", number(s.fit.r_squared)},
                         {"degenerate", s.degenerate},
                         {"expected_slope", s.expected_slope ? json(*s.expected_slope) : json(nullptr)}};
  } else {
    j["rate_summary"] = nullptr;
  }
  if (r.sigma) {
    json rows = json::array();
    for (const auto& row : r.sigma->rows) {
      rows.push_back({{"n", row.n}, {"K", row.K}, {"median_distance", number(row.median_distance)}});
    }
    j["sigma"] = {{"rows", rows},
                  {"spearman", number(r.sigma->spearman)},
                  {"decreasing_trend", r.sigma->decreasing_trend}};
  } else {
    j["sigma"] = nullptr;
  }
  return j;
}

json function_json(const FunctionSpec& fn) {
  json j = {{"kind", to_string(fn.kind)},
            {"amplitude", fn.amplitude},
            {"frequency", fn.frequency},
            {"offset", fn.offset},
            {"exponent", fn.exponent}};
  if (!fn.levels.empty()) j["levels"] = fn.levels;
  return j;
}

FunctionSpec function_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw InvalidSpec("function needs a string 'kind'");
  }
  FunctionSpec fn;
  fn.kind = function_kind_from_string(j.at("kind").get<std::string>());
  fn.amplitude = get_number(j, "amplitude", 1.0);
  fn.frequency = get_number(j, "frequency", 1.0);
  fn.offset = get_number(j, "offset", 0.0);
  fn.exponent = get_number(j, "exponent", 1.0);
  if (j.contains("levels")) {
    try {
      fn.levels = j.at("levels").get<std::vector<double>>();
    } catch (const json::exception&) {
      throw InvalidSpec("'levels' must be an array of numbers");
    }
  }
  return fn;
}

json dgp_json(const DgpSpec& s) {
  json theta = json::array();
  for (const auto& fn : s.theta) theta.push_back(function_json(fn));
  return {{"name", s.name},
          {"description", s.description},
          {"q", s.q},
          {"beta", s.beta},
          {"theta", theta},
          {"theta_gamma", s.theta_gamma},
          {"f", function_json(s.f)},
          {"f_alpha", s.f_alpha ? json(*s.f_alpha) : json("exact")},
          {"f_seminorm", s.f_seminorm},
          {"x_mix", matrix_json(s.x_mix)},
          {"x_half_width", vector_json(s.noise_half_width())},
          {"w", {{"kind", s.w.kind == NoiseSpec::Kind::Gaussian ? "gaussian" : "uniform"},
                 {"sigma", s.w.sigma}}},
          {"t_slope", s.t_law.slope},
          {"assumptions", s.assumptions}};
}

DgpSpec dgp_from_json(const json& j) {
  if (!j.is_object()) throw InvalidSpec("dgp must be a JSON object");
  DgpSpec s;
  try {
    s.name = j.value("name", std::string("custom"));
    s.description = j.value("description", std::string());
    if (!j.contains("beta")) throw InvalidSpec("dgp needs 'beta'");
    s.beta = j.at("beta").get<std::vector<double>>();
    s.q = j.contains("q") ? j.at("q").get<int>() : static_cast<int>(s.beta.size());
    const auto q = static_cast<Eigen::Index>(s.q);
    if (j.contains("theta")) {
      for (const auto& t : j.at("theta")) s.theta.push_back(function_from_json(t));
    } else {
      s.theta.assign(static_cast<std::size_t>(std::max(s.q, 0)), FunctionSpec::zero());
    }
    s.theta_gamma = get_number(j, "theta_gamma", 1.0);
    s.f = j.contains("f") ? function_from_json(j.at("f")) : FunctionSpec::zero();
    if (!j.contains("f_alpha") || (j.at("f_alpha").is_string() && j.at("f_alpha") == "exact")) {
      s.f_alpha.reset();
    } else {
      s.f_alpha = get_number(j, "f_alpha", 1.0);
    }
    s.f_seminorm = get_number(j, "f_seminorm", 1.0);
    if (j.contains("x_mix")) {
      const auto rows = j.at("x_mix").get<std::vector<std::vector<double>>>();
      s.x_mix.resize(static_cast<Eigen::Index>(rows.size()),
                     rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size()) throw InvalidSpec("x_mix rows differ in length");
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
          s.x_mix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
      }
    } else {
      s.x_mix = std::sqrt(3.0) * Eigen::MatrixXd::Identity(q, q);
    }
    if (j.contains("w")) {
      const auto& w = j.at("w");
      const std::string kind = w.value("kind", std::string("gaussian"));
      if (kind == "gaussian") s.w.kind = NoiseSpec::Kind::Gaussian;
      else if (kind == "uniform") s.w.kind = NoiseSpec::Kind::Uniform;
      else throw InvalidSpec("w.kind must be 'gaussian' or 'uniform'");
      s.w.sigma = get_number(w, "sigma", 1.0);
    }
    s.t_law.slope = get_number(j, "t_slope", 0.0);
    if (j.contains("assumptions")) s.assumptions = j.at("assumptions").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw InvalidSpec(std::string("malformed dgp: ") + e.what());
  }
  check_spec(s);
  return s;
}

DgpSpec load_dgp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON in '") + path + "': " + e.what(), 0, e.byte);
  }
  return dgp_from_json(j);
}

json envelope_json(const Envelope& env) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return {{"schema", kReportSchema},
          {"version", kVersion},
          {"timestamp", stamp},
          {"command", env.command},
          {"config", env.config},
          {"payload", env.payload},
          {"warnings", env.warnings},
          {"timing", {{"elapsed_seconds", env.elapsed_seconds}, {"threads", env.threads}}}};
}

std::string replications_csv(const ExperimentReport& r) {
  std::ostringstream os;
  int q = 0;
  for (const auto& rec : r.replications) q = std::max(q, static_cast<int>(rec.beta.size()));
  os << "n,replication,seed,outcome,selected,K,gamma_n,criterion,gamma_ok,f_error,bic_agrees";
  for (int j = 0; j < q; ++j) os << ",beta" << j + 1;
  for (int j = 0; j < q; ++j) os << ",se" << j + 1;
  os << ",error\n";
  for (const auto& rec : r.replications) {
    std::string sel;
    for (std::size_t k = 0; k < rec.selected.size(); ++k) {
      if (k) sel += ' ';
      sel += std::to_string(rec.selected[k] + 1);
    }
    os << rec.n << ',' << rec.replication << ',' << rec.seed << ',' << rec.outcome << ','
       << csv_escape(sel) << ',' << rec.K << ',' << format_double(rec.gamma_n) << ','
       << format_double(rec.criterion) << ',' << (rec.gamma_ok ? 1 : 0) << ','
       << format_double(rec.f_error) << ',' << (rec.bic_agrees ? 1 : 0);
    for (double b : rec.beta) os << ',' << format_double(b);
    for (double se : rec.se) os << ',' << format_double(se);
    os << ',' << csv_escape(rec.error) << '\n';
  }
  return os.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw InvalidArgument("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InvalidArgument("cannot move output into '" + path + "'");
  }
}

}  // namespace plsel
