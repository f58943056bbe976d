#include "focalflow/verification.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include "json.hpp"

#include "doctest.h"
#include "focalflow/errors.hpp"
#include "focalflow/rng.hpp"

using namespace focalflow;
namespace fs = std::filesystem;
using json = nlohmann::json;

TEST_CASE("the full check suite passes at the default seed") {
  std::vector<CheckResult> results = run_all_checks(4242);
  std::vector<std::string> names = check_names();
  REQUIRE(results.size() == names.size());
  for (size_t i = 0; i < results.size(); ++i) {
    CHECK(results[i].name == names[i]);
    CHECK_MESSAGE(results[i].pass, results[i].name, ": ", results[i].detail);
    CHECK(!results[i].detail.empty());
    // Recorded seed reproduces the check in isolation: suite seed + name.
    CHECK(results[i].seed == Rng(4242).derive(results[i].name).state());
  }
}

TEST_CASE("name filter selects a single check") {
  std::vector<CheckResult> results = run_all_checks(1, {"parseval"});
  REQUIRE(results.size() == 1);
  CHECK(results[0].name == "parseval");
  CHECK_THROWS_AS(run_all_checks(1, {"no-such-check"}), ConfigError);
}

TEST_CASE("energy check fails under a broken normalization") {
  TransformFactory scaled = [](int length) {
    auto inner = orthonormal_dct_factory()(length);
    return [inner](std::span<const double> x) {
      std::vector<double> c = inner(x);
      for (double& v : c) v *= 1.01;
      return c;
    };
  };
  CheckResult bad = check_parseval(7, 5, {8, 16}, scaled);
  CHECK_FALSE(bad.pass);
  CheckResult good = check_parseval(7, 5, {8, 16});
  CHECK(good.pass);
}

TEST_CASE("individual checks pass with small budgets") {
  CHECK(check_prediction_cosine(3, 50).pass);
  CHECK(check_spectral_gain(3, {1, 16, 144}).pass);
  CHECK(check_weighted_gradient(3, 20).pass);
  CHECK(check_fsd_ordering(3, 50000).pass);
  CHECK(check_gradients_fd(3, 50).pass);
  CHECK(check_param_alignment(3, 8).pass);
}

TEST_CASE("check report is valid json with an overall verdict") {
  fs::path path = fs::temp_directory_path() / "focalflow-verify-report.json";
  fs::remove(path);
  std::vector<CheckResult> results = run_all_checks(11, {"parseval", "spectral_gain"});
  write_check_report(path, results);
  std::ifstream in(path);
  json j = json::parse(in);
  CHECK(j.at("all_pass").get<bool>());
  REQUIRE(j.at("checks").size() == 2);
  CHECK(j.at("checks")[0].at("name") == "parseval");
  CHECK(j.at("checks")[0].contains("detail"));
  CHECK(j.at("checks")[0].at("pass").get<bool>());
  CHECK(j.at("checks")[0].at("seed").get<uint64_t>() == results[0].seed);
}
