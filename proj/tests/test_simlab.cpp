#include <doctest.h>

#include <cmath>

#include "brute_force.hpp"
#include "oracles.hpp"
#include "plsel/errors.hpp"
#include "plsel/rng.hpp"
#include "plsel/simlab.hpp"

using namespace plsel;

TEST_CASE("rng streams") {
  Rng a(5), b(5), c(6);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(a.uniform() != c.uniform());
  CHECK(replication_seed(1, 100, 0) != replication_seed(1, 100, 1));
  CHECK(replication_seed(1, 100, 0) != replication_seed(1, 200, 0));
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);

  Rng g(11);
  double s = 0.0, s2 = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double z = g.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / m) < 4.0 / std::sqrt(m));
  CHECK(std::abs(s2 / m - 1.0) < 4.0 * std::sqrt(2.0 / m));
}

TEST_CASE("function shapes") {
  CHECK(FunctionSpec::zero()(0.3) == 0.0);
  CHECK(FunctionSpec::linear(2.0, 0.5)(0.75) == doctest::Approx(0.5));
  CHECK(FunctionSpec::sine(1.0, 1.0)(0.25) == doctest::Approx(1.0));
  CHECK(FunctionSpec::cosine(2.0, 1.0)(0.5) == doctest::Approx(-2.0));
  CHECK(FunctionSpec::triangle(1.0, 2.0)(0.25) == doctest::Approx(1.0));
  CHECK(FunctionSpec::triangle(1.0, 2.0)(0.0) == doctest::Approx(-1.0));
  CHECK(FunctionSpec::triangle(1.0, 2.0)(0.125) == doctest::Approx(0.0));
  CHECK(FunctionSpec::power_abs(2.0, 0.5, 0.6)(0.5) == 0.0);
  const auto st = FunctionSpec::step({1.0, 2.0, 3.0, 4.0});
  CHECK(st(0.0) == 1.0);
  CHECK(st(0.5) == 3.0);
  CHECK(st(1.0) == 4.0);
  for (auto k : {FunctionSpec::Kind::Zero, FunctionSpec::Kind::Sine, FunctionSpec::Kind::Step}) {
    CHECK(function_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(function_kind_from_string("spline"), InvalidSpec);
}

TEST_CASE("T law inverse cdf") {
  for (double slope : {-1.5, 0.0, 0.8, 1.9}) {
    const TLaw law{slope};
    for (int k = 0; k <= 20; ++k) {
      const double u = k / 20.0;
      const double t = law.inverse_cdf(u);
      CHECK(t + slope * (t * t - t) / 2.0 == doctest::Approx(u).epsilon(1e-12));
    }
    CHECK(law.lower_bound() > 0.0);
  }
}

TEST_CASE("catalog") {
  const auto all = builtin_dgps();
  CHECK(all.size() >= 3);
  for (const auto& d : all) {
    CAPTURE(d.name);
    CHECK(validate_spec(d).empty());
    CHECK_FALSE(d.description.empty());
    CHECK_FALSE(d.assumptions.empty());
  }
  CHECK_FALSE(builtin_dgp("null-f").f_alpha.has_value());
  REQUIRE(builtin_dgp("rough-f").f_alpha.has_value());
  CHECK(*builtin_dgp("rough-f").f_alpha < 1.0);
  CHECK(builtin_dgp("default").support() == std::vector<int>{0, 1});
  CHECK_THROWS_AS(builtin_dgp("nope"), InvalidSpec);
}

TEST_CASE("invalid specs are rejected") {
  DgpSpec d = builtin_dgp("default");
  DgpSpec s = d;
  s.x_mix(2, 2) = 0.0;
  s.x_mix(2, 0) = 0.0;
  CHECK_FALSE(validate_spec(s).empty());
  CHECK_THROWS_AS(generate(s, 100, 1), InvalidSpec);
  s = d;
  s.theta_gamma = 0.7;
  CHECK_FALSE(validate_spec(s).empty());
  CHECK(validate_spec(s, 2).empty());
  s = d;
  s.f_alpha = 0.5;
  CHECK_FALSE(validate_spec(s).empty());
  s = d;
  s.t_law.slope = 2.0;
  CHECK_FALSE(validate_spec(s).empty());
  s = d;
  s.beta.pop_back();
  CHECK_FALSE(validate_spec(s).empty());
  s = d;
  s.f = FunctionSpec::step({});
  CHECK_FALSE(validate_spec(s).empty());
  s = d;
  s.w.sigma = -1.0;
  CHECK_FALSE(validate_spec(s).empty());
}

TEST_CASE("generation is deterministic and bounded") {
  const DgpSpec spec = builtin_dgp("correlated");
  const Dataset a = generate(spec, 300, 77);
  const Dataset b = generate(spec, 300, 77);
  const Dataset c = generate(spec, 300, 78);
  CHECK(a.y() == b.y());
  CHECK(a.x() == b.x());
  CHECK(a.t() == b.t());
  CHECK(a.y() != c.y());
  const Eigen::VectorXd hw = spec.noise_half_width();
  for (int i = 0; i < 300; ++i) {
    CHECK(a.t()[i] >= 0.0);
    CHECK(a.t()[i] <= 1.0);
    for (int j = 0; j < 4; ++j) {
      const double eps = a.x()(i, j) - spec.theta[static_cast<std::size_t>(j)](a.t()[i]);
      CHECK(std::abs(eps) <= hw[j] + 1e-12);
    }
  }
  CHECK_THROWS_AS(generate(spec, 5, 1), InvalidArgument);
}

TEST_CASE("population covariance against an independent quadrature") {
  DgpSpec spec = builtin_dgp("correlated");
  spec.t_law.slope = 0.8;
  const Eigen::MatrixXd pop = population_covariance(spec);
  const auto dens = [&](double t) { return spec.t_law.density(t); };
  Eigen::VectorXd m(4);
  for (int j = 0; j < 4; ++j) {
    m[j] = oracle::integrate([&](double t) { return spec.theta[static_cast<std::size_t>(j)](t) * dens(t); });
  }
  const Eigen::MatrixXd noise = spec.x_mix * spec.x_mix.transpose() / 3.0;
  for (int j = 0; j < 4; ++j) {
    for (int k = 0; k < 4; ++k) {
      const double c = oracle::integrate([&](double t) {
        return (spec.theta[static_cast<std::size_t>(j)](t) - m[j]) *
               (spec.theta[static_cast<std::size_t>(k)](t) - m[k]) * dens(t);
      });
      CHECK(pop(j, k) == doctest::Approx(c + noise(j, k)).epsilon(1e-10));
    }
  }
  // Var(0.5 (T - 1/2)) = 1/48 under the uniform law
  const Eigen::MatrixXd flat = population_covariance(builtin_dgp("default"));
  CHECK(flat(0, 0) == doctest::Approx(1.0 + 1.0 / 48.0).epsilon(1e-12));
}

TEST_CASE("sample covariance approaches the population value") {
  const DgpSpec spec = builtin_dgp("correlated");
  const int n = 100000;
  const Dataset d = generate(spec, n, 2718);
  const Eigen::MatrixXd pop = population_covariance(spec);
  const Eigen::RowVectorXd mean = d.x().colwise().mean();
  const Eigen::MatrixXd xc = d.x().rowwise() - mean;
  for (int j = 0; j < 4; ++j) {
    for (int k = j; k < 4; ++k) {
      const Eigen::ArrayXd prod = xc.col(j).array() * xc.col(k).array();
      const double est = prod.mean();
      const double se = std::sqrt((prod - est).square().mean() / n);
      CAPTURE(j);
      CAPTURE(k);
      CHECK(std::abs(est - pop(j, k)) < 4.0 * se);
    }
  }
}

TEST_CASE("noiseless strong signal is always selected correctly") {
  DgpSpec spec = builtin_dgp("null-f");
  spec.w.sigma = 0.0;
  CaseParams p;
  p.selection_case = Case::Case3;
  p.a = 0.1;
  const std::vector<int> ns = {200};
  ExperimentOptions opt;
  opt.keep_replications = true;
  const auto rep = run_selection_experiment(spec, p, std::nullopt, ns, 10, 31, opt);
  REQUIRE(rep.selection.size() == 1);
  CHECK(rep.selection[0].p_correct == 1.0);
  REQUIRE(rep.replications.size() == 10);
  for (const auto& rec : rep.replications) {
    const Dataset d = generate(spec, 200, rec.seed);
    oracle::BruteQuery q;
    q.setting = oracle::Setting::Case3;
    q.a = 0.1;
    const auto choice = oracle::brute_force_select(d, q);
    REQUIRE(choice.has_value());
    CHECK(choice->I == rec.selected);
    CHECK(choice->K == rec.K);
  }
}

TEST_CASE("selection experiment bookkeeping") {
  const DgpSpec spec = builtin_dgp("default");
  CaseParams p;
  p.selection_case = Case::Case3;
  p.a = 0.1;
  const std::vector<int> ns = {150, 300};
  const auto rep = run_selection_experiment(spec, p, std::nullopt, ns, 12, 4);
  REQUIRE(rep.selection.size() == 2);
  for (const auto& row : rep.selection) {
    CHECK(row.correct + row.overfit + row.underfit + row.failed == 12);
    CHECK(row.p_correct + row.p_overfit + row.p_underfit + row.p_failed == doctest::Approx(1.0));
    CHECK(row.K > 0);
  }
  CHECK(rep.replications.empty());
  CHECK_THROWS_AS(run_selection_experiment(spec, p, std::nullopt, ns, 0, 4), InvalidArgument);
  CHECK_THROWS_AS(run_selection_experiment(spec, p, std::nullopt, std::vector<int>{}, 3, 4),
                  InvalidArgument);
}

TEST_CASE("Case 2 beyond the declared smoothness is rejected") {
  CaseParams p;
  p.selection_case = Case::Case2;
  p.alpha = 1.0;
  const std::vector<int> ns = {300};
  CHECK_THROWS_AS(run_selection_experiment(builtin_dgp("rough-f"), p, std::nullopt, ns, 2, 1),
                  InvalidSpec);
  p.alpha = 0.6;
  CHECK_NOTHROW(run_selection_experiment(builtin_dgp("rough-f"), p, std::nullopt, ns, 2, 1));
}

TEST_CASE("replications can be reproduced one at a time") {
  const DgpSpec spec = builtin_dgp("triangle-f");
  CaseParams p;
  p.selection_case = Case::Full;
  const std::vector<int> ns = {256};
  ExperimentOptions opt;
  opt.keep_replications = true;
  const auto rep = run_selection_experiment(spec, p, std::nullopt, ns, 6, 1234, opt);
  REQUIRE(rep.replications.size() == 6);
  const auto& rec = rep.replications[3];
  CHECK(rec.seed == replication_seed(1234, 256, 3));
  const SelectionResult res = select(generate(spec, 256, rec.seed), p);
  CHECK(res.chosen.model.I == rec.selected);
  CHECK(res.chosen.model.K == rec.K);
  CHECK(res.criterion == rec.criterion);

  opt.threads = 3;
  const auto par = run_selection_experiment(spec, p, std::nullopt, ns, 6, 1234, opt);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(par.replications[i].criterion == rep.replications[i].criterion);
    CHECK(par.replications[i].selected == rep.replications[i].selected);
  }
}

TEST_CASE("coverage experiment") {
  const DgpSpec spec = builtin_dgp("default");
  CaseParams p;
  p.selection_case = Case::Case3;
  p.a = 0.1;
  CHECK_THROWS_AS(run_coverage_experiment(spec, p, 500, 99, 0.95, 1), InvalidArgument);
  CHECK_THROWS_AS(run_coverage_experiment(spec, p, 500, 100, 1.5, 1), InvalidArgument);
  const auto rep = run_coverage_experiment(spec, p, 500, 200, 0.5, 8);
  REQUIRE(rep.coverage.size() == 4);
  for (int j = 0; j < 2; ++j) {
    const auto& row = rep.coverage[static_cast<std::size_t>(j)];
    CAPTURE(j);
    CHECK(row.in_support);
    CHECK(row.coverage > 0.38);
    CHECK(row.coverage < 0.62);
    CHECK(row.ks_count == row.included);
  }
  CHECK_FALSE(rep.coverage[2].in_support);

  CaseParams c1;
  c1.selection_case = Case::Case1;
  const auto known = run_coverage_experiment(spec, c1, 300, 100, 0.95, 2);
  REQUIRE(known.params.I0.has_value());
  CHECK(*known.params.I0 == std::vector<int>{0, 1});
  CHECK(known.coverage[2].exclusion_freq == 1.0);
}

TEST_CASE("rate experiment") {
  const std::vector<int> bad = {256, 512, 1024};
  CHECK_THROWS_AS(run_rate_experiment(builtin_dgp("smooth-f"), bad, 2, 1), InvalidArgument);
  const std::vector<int> uneven = {256, 512, 1024, 4096};
  CHECK_THROWS_AS(run_rate_experiment(builtin_dgp("smooth-f"), uneven, 2, 1), InvalidArgument);

  // A step on dyadic cells lies in every sieve space, so the error vanishes.
  DgpSpec spec = builtin_dgp("null-f");
  spec.f = FunctionSpec::step({1.0, -1.0});
  spec.w.sigma = 0.0;
  const std::vector<int> ns = {256, 512, 1024, 2048};
  const auto rep = run_rate_experiment(spec, ns, 3, 5);
  REQUIRE(rep.rate_summary.has_value());
  CHECK(rep.rate_summary->degenerate);
  CHECK(std::isnan(rep.rate_summary->fit.slope));
  CHECK_FALSE(rep.rate_summary->expected_slope.has_value());
  REQUIRE(rep.rate.size() == 4);

  const auto smooth = run_rate_experiment(builtin_dgp("smooth-f"), ns, 4, 5);
  CHECK_FALSE(smooth.rate_summary->degenerate);
  CHECK(*smooth.rate_summary->expected_slope == doctest::Approx(-2.0 / 3.0));
  CHECK(smooth.rate_summary->fit.slope < 0.0);
  CHECK(smooth.rate[0].target_k > 0);
}

TEST_CASE("sigma experiment") {
  const std::vector<int> ns = {200, 800, 3200};
  const auto rep = run_sigma_experiment(builtin_dgp("default"), ns, 10, 0.1, 3);
  REQUIRE(rep.sigma.has_value());
  CHECK(rep.sigma->rows.size() == 3);
  CHECK(rep.sigma->decreasing_trend);
  CHECK_THROWS_AS(run_sigma_experiment(builtin_dgp("default"), ns, 10, 0.0, 3), InvalidArgument);
}
