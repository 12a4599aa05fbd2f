#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "plsel/errors.hpp"
#include "plsel/report.hpp"

using namespace plsel;

TEST_CASE("matrix and NaN serialization") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, std::nan(""), 4.0;
  const json j = matrix_json(m);
  CHECK(j.dump() == "[[1.0,2.0],[null,4.0]]");
}

TEST_CASE("selection payload shape") {
  const Dataset d = fixture::random_dataset(300, 3, 2);
  CaseParams p;
  p.selection_case = Case::Case3;
  p.a = 0.1;
  const SelectionResult res = select(d, p);
  const json j = selection_json(res, d.x_names());
  for (const char* key : {"case", "penalty", "n", "grid", "pilot", "selected", "gamma_n",
                          "criterion", "lambda_norm_sq", "log_gamma_threshold", "gamma_ok",
                          "beta", "delta", "ledger"}) {
    CAPTURE(key);
    CHECK(j.contains(key));
  }
  CHECK(j["case"] == "case3");
  CHECK(j["n"] == 300);
  CHECK(j["ledger"].size() == res.table.size());
  CHECK(j["pilot"]["K"] == res.pilot->K);
  CHECK(j["log_gamma_threshold"].get<double>() ==
        doctest::Approx(std::log(2.0) + std::pow(std::log(300.0), 2)));

  const json f = fit_json(res.chosen, d.x_names());
  CHECK(f["rank_ok"] == true);
  const json inf = inference_json(infer(res, 3, 0.95), d.x_names());
  CHECK(inf["intervals"].size() == res.chosen.model.I.size());
  CHECK(inf["v_embedded"].size() == 3);
}

TEST_CASE("dgp specs survive a JSON round trip") {
  for (const auto& spec : builtin_dgps()) {
    CAPTURE(spec.name);
    const DgpSpec back = dgp_from_json(dgp_json(spec));
    CHECK(dgp_json(back).dump() == dgp_json(spec).dump());
    const Dataset a = generate(spec, 100, 9);
    const Dataset b = generate(back, 100, 9);
    CHECK(a.y() == b.y());
  }
}

TEST_CASE("dgp from partial JSON") {
  const json j = json::parse(R"({"beta": [1, 0], "f": {"kind": "sine"}, "f_alpha": 1.0})");
  const DgpSpec s = dgp_from_json(j);
  CHECK(s.q == 2);
  CHECK(s.support() == std::vector<int>{0});
  CHECK(s.x_mix.isApprox(std::sqrt(3.0) * Eigen::MatrixXd::Identity(2, 2)));
  CHECK(*s.f_alpha == 1.0);
  CHECK_FALSE(dgp_from_json(json::parse(R"({"beta": [1]})")).f_alpha.has_value());
  CHECK_THROWS_AS(dgp_from_json(json::parse(R"({"q": 2})")), InvalidSpec);
  CHECK_THROWS_AS(dgp_from_json(json::parse(R"({"beta": [1], "f": {"kind": "bogus"}})")), InvalidSpec);
  CHECK_THROWS_AS(dgp_from_json(json::parse(R"({"beta": "x"})")), InvalidSpec);
  CHECK_THROWS_AS(dgp_from_json(json::parse(R"({"beta": [1, 2], "x_mix": [[1, 0], [1, 0]]})")),
                  InvalidSpec);
  CHECK_THROWS_AS(dgp_from_json(json::parse("[]")), InvalidSpec);
}

TEST_CASE("dgp files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "plsel_report_test";
  fs::create_directories(dir);
  const std::string good = (dir / "good.json").string();
  const std::string bad = (dir / "bad.json").string();
  std::ofstream(good) << dgp_json(builtin_dgp("rough-f")).dump(2);
  std::ofstream(bad) << "{\"beta\": [1,";
  CHECK(load_dgp_file(good).name == "rough-f");
  CHECK_THROWS_AS(load_dgp_file(bad), ParseError);
  CHECK_THROWS_AS(load_dgp_file((dir / "missing.json").string()), InvalidArgument);
  fs::remove_all(dir);
}

TEST_CASE("envelope layout") {
  Envelope env;
  env.command = "fit";
  env.config = {{"K", 4}};
  env.payload = {{"x", 1}};
  env.warnings = {"w"};
  env.threads = 2;
  const json j = envelope_json(env);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"schema", "version", "timestamp", "command", "config",
                                         "payload", "warnings", "timing"});
  CHECK(j["schema"] == kReportSchema);
  CHECK(j["timing"]["threads"] == 2);
  CHECK(j["timestamp"].get<std::string>().size() == 20);
}

TEST_CASE("experiment payload and replication dump") {
  const DgpSpec spec = builtin_dgp("default");
  CaseParams p;
  p.selection_case = Case::Case3;
  p.a = 0.1;
  ExperimentOptions opt;
  opt.keep_replications = true;
  const std::vector<int> ns = {150, 300};
  const auto rep = run_selection_experiment(spec, p, std::nullopt, ns, 3, 1, opt);
  const json j = experiment_json(rep);
  CHECK(j["kind"] == "selection");
  CHECK(j["selection"].size() == 2);
  CHECK(j["params"]["a"] == 0.1);
  CHECK(j["params"]["alpha"].is_null());

  const std::string csv = replications_csv(rep);
  std::istringstream in(csv);
  std::string line;
  int lines = 0;
  std::getline(in, line);
  CHECK(line.rfind("n,replication,seed,outcome,selected,K", 0) == 0);
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 6);
}

TEST_CASE("atomic write") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "plsel_atomic_test.json";
  write_file_atomic(path.string(), "first");
  write_file_atomic(path.string(), "second");
  std::ifstream in(path);
  std::string s;
  in >> s;
  CHECK(s == "second");
  CHECK_FALSE(fs::exists(fs::path(path.string() + ".tmp")));
  fs::remove(path);
  CHECK_THROWS_AS(write_file_atomic("/nonexistent/dir/out.json", "x"), InvalidArgument);
}
