#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "robustdx/cli.hpp"
#include "support/expect.hpp"

using namespace robustdx;
using nlohmann::json;

namespace {

const std::string kDir = ROBUSTDX_SCENARIO_DIR;

json line_scenario() {
  return json::parse(R"({
    "name": "t",
    "model": {"family": "polynomial", "degree": 1, "grid": [-1, 1]},
    "design": {"counts": [2, 2]},
    "criterion": "D",
    "cov_class": {"variant": "norm_ball", "norm": "spectral", "eta2": 2.0},
    "search": {"budget": 500, "restarts": 2, "seed": 3}
  })");
}

std::string parse_message(const json& j) {
  try {
    (void)parse_scenario(j);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
    return e.what();
  }
  return "";
}

struct Run {
  int code;
  json report;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  json report;
  if (!out.str().empty()) report = json::parse(out.str());
  return {code, report, err.str()};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("scenario parse errors name the offending key") {
  json j = line_scenario();
  j["cov_class"]["eta2"] = -1.0;
  CHECK(parse_message(j).find("cov_class.eta2: eta2 must be positive") != std::string::npos);

  j = line_scenario();
  j["search"]["bogus"] = 1;
  CHECK(parse_message(j).find("bogus") != std::string::npos);

  j = line_scenario();
  j["design"]["counts"] = json::array({2, 2, 2});
  CHECK_FALSE(parse_message(j).empty());

  j = line_scenario();
  j["criterion"] = "Q";
  CHECK(parse_message(j).find("criterion") != std::string::npos);

  j = line_scenario();
  j.erase("cov_class");
  CHECK(parse_message(j).find("cov_class") != std::string::npos);

  CHECK(parse_message(line_scenario()).empty());
}

TEST_CASE("verify-lemma exit codes on the fixtures") {
  CHECK(run({"verify-lemma", kDir + "/ma1_line.json", "--quiet"}).code == kExitPass);
  const Run bad = run({"verify-lemma", kDir + "/input_error_negative_eta2.json"});
  CHECK(bad.code == kExitInputError);
  CHECK(bad.err.find("eta2 must be positive") != std::string::npos);
  const Run fail = run({"verify-lemma", kDir + "/constructed_failure.json", "--quiet"});
  CHECK(fail.code == kExitCertificationFailure);
  CHECK_FALSE(fail.report["results"]["worst_case"]["pass"].get<bool>());
  CHECK(run({"verify-lemma", kDir + "/does_not_exist.json", "--quiet"}).code == kExitInputError);
  CHECK(run({"no-such-command"}).code == kExitInputError);
}

TEST_CASE("optimize reports half weight at the ends of the line") {
  json j = line_scenario();
  j["model"]["grid"] = json{{"lo", -1}, {"hi", 1}, {"points", 21}};
  j["design"] = json{{"method", "optimize"}, {"N", 4}};
  const CommandResult r = execute_command("optimize", parse_scenario(j), {});
  const json& opt = r.record.results["optimization"];
  CHECK(opt["weights"][0].get<double>() == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(opt["weights"][20].get<double>() == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(opt["equivalence_gap"].get<double>() <= 2e-7);
  CHECK(r.exit_code == kExitPass);
}

TEST_CASE("worst-case with budget 0 has gap 0") {
  const CommandResult r = execute_command("worst-case", parse_scenario(line_scenario()), CommandFlags{std::nullopt, 0});
  CHECK(r.record.results["worst_case"]["gap"].get<double>() == 0.0);
  CHECK(r.record.results["worst_case"]["evaluations"].get<long>() == 1);
  CHECK(r.record.results["design_is_minimax"].get<bool>());
}

TEST_CASE("robust-eval with tau2 0 has no psi part, and the CSV mirrors the rows") {
  json j = line_scenario();
  j["robust"] = json{{"tau2", 0.0}, {"loss", "I-robust"}};
  j["model"]["grid"] = json::array({-1, 0, 1});
  j["design"]["counts"] = json::array({2, 1, 2});
  const CommandResult r = execute_command("robust-eval", parse_scenario(j), {});
  REQUIRE(r.record.results["rows"].size() == 1);
  CHECK(r.record.results["rows"][0]["psi_part"].get<double>() == 0.0);
  CHECK(r.csv.rfind("eta2,tau2,cov_part,psi_part,total\n", 0) == 0);

  const auto dir = std::filesystem::temp_directory_path() / "robustdx_cli_test";
  std::filesystem::create_directories(dir);
  const std::string out = (dir / "r.json").string();
  CHECK(run({"robust-eval", kDir + "/i_robust_line.json", "--out", out, "--quiet"}).code == kExitPass);
  const std::string csv = read_file(out + ".csv");
  std::istringstream lines(csv);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
    ++count;
  }
  CHECK(count == 1 + 3 * 3);
  CHECK(json::parse(read_file(out))["results"]["rows"].size() == 9);
  std::filesystem::remove_all(dir);

  CHECK_ERROR_CODE(execute_command("robust-eval", parse_scenario(line_scenario()), {}), ErrorCode::InvalidArgument);
}

TEST_CASE("reports are deterministic for a fixed seed") {
  for (const std::string cmd : {"verify-lemma", "worst-case"}) {
    Run a = run({cmd, kDir + "/spectral_ball_line.json", "--seed", "5", "--quiet"});
    Run b = run({cmd, kDir + "/spectral_ball_line.json", "--seed", "5", "--quiet"});
    a.report.erase("wall_time_s");
    b.report.erase("wall_time_s");
    CHECK(a.report.dump() == b.report.dump());
  }
}

TEST_CASE("report serialization round trips") {
  const CommandResult r = execute_command("verify-lemma", parse_scenario(line_scenario()), {});
  CHECK(report_from_json(to_json(r.record)) == r.record);
  CHECK(report_from_json(json::parse(to_json(r.record).dump())) == r.record);

  const DesignSpace space = DesignSpace::polynomial({-1, 0, 1}, 1);
  const Matrix x = model_matrix(space, ExactDesign({1, 1, 1}));
  SearchOptions search;
  search.budget = 300;
  const WorstCaseReport w = verify_lemma(CovClass(MA1{1.0, 0.3}, 3), Criterion::A(), x, search);
  const WorstCaseReport back = worst_case_from_json(json::parse(to_json(w).dump()));
  CHECK(back.analytic_value == w.analytic_value);
  CHECK(back.searched_value == w.searched_value);
  CHECK(back.gap == w.gap);
  CHECK(back.pass == w.pass);
  CHECK(back.evaluations == w.evaluations);
  CHECK(back.searched_argmax == w.searched_argmax);
}
