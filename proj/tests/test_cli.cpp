#include "doctest.h"

#include <algorithm>
#include <complex>
#include <vector>

#include "lvr/cli.hpp"

using namespace lvr::cli;

namespace {

RunConfig parse(std::vector<const char*> args) {
  args.insert(args.begin(), "lvr_cli");
  return parse_args(static_cast<int>(args.size()), args.data());
}

}  // namespace

TEST_CASE("integer lists") {
  CHECK(parse_int_list("1..4") == std::vector<int>{1, 2, 3, 4});
  CHECK(parse_int_list("2,5,7") == std::vector<int>{2, 5, 7});
  CHECK_THROWS_AS(parse_int_list("4..1"), ConfigError);
  CHECK_THROWS_AS(parse_int_list("1,x"), ConfigError);
}

TEST_CASE("flags reach the config") {
  const auto cfg = parse({"pacman-scan", "--p", "3", "--N-list", "1..3", "--lambda-modulus", "0.05", "--lambda-arg", "2.0", "--seed", "9"});
  CHECK(cfg.command == Command::pacman_scan);
  CHECK(cfg.p == 3);
  CHECK(cfg.n_list == std::vector<int>{1, 2, 3});
  CHECK(cfg.lambda_arg == doctest::Approx(2.0));
  CHECK(cfg.seed == 9);
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(parse({}), ConfigError);
  CHECK_THROWS_AS(parse({"no-such-command"}), ConfigError);
  CHECK_THROWS_AS(parse({"fc-eval", "--p", "1"}), ConfigError);
  CHECK_THROWS_AS(parse({"free-energy", "--lambda-arg", "3.1", "--epsilon", "0.1"}), ConfigError);
  CHECK_THROWS_AS(parse({"free-energy", "--beta", "3"}), ConfigError);
  CHECK_THROWS_AS(parse({"lve-sum", "--n-max", "5"}), ConfigError);
  CHECK_THROWS_AS(parse({"jacobian-check", "--lambda-arg", "1.0"}), ConfigError);
  CHECK_THROWS_AS(parse({"z-identity", "--mc-samples", "0"}), ConfigError);
  CHECK_THROWS_AS(parse({"fc-eval", "--bogus", "1"}), ConfigError);
}

TEST_CASE("z-identity summary") {
  const auto r = run(parse({"z-identity", "--p", "2", "--N", "2", "--lambda-modulus", "0.1", "--lambda-arg", "0", "--beta", "2"}));
  CHECK(r.passed());
  CHECK(r.summary["schema_version"] == kSchemaVersion);
  CHECK(r.summary.contains("convention_ledger"));
  CHECK(r.summary["inputs"]["N"] == 2);
  CHECK(r.summary["results"]["relative_gap"].get<double>() <= 1e-4);
  CHECK(r.csv.empty());
}

TEST_CASE("fc-eval residual and closed form") {
  const auto r = run(parse({"fc-eval", "--p", "2", "--z-re", "0.1", "--z-im", "0.05"}));
  CHECK(r.passed());
  const std::complex<double> z(0.1, 0.05);
  const auto expected = 2.0 / (1.0 + std::sqrt(1.0 - 4.0 * z));
  CHECK(r.summary["results"]["T"]["re"].get<double>() == doctest::Approx(expected.real()).epsilon(1e-12));
  CHECK(r.summary["results"]["T"]["im"].get<double>() == doctest::Approx(expected.imag()).epsilon(1e-12));
}

TEST_CASE("pacman-scan CSV and reproducibility") {
  const auto cfg = parse({"pacman-scan", "--p", "2", "--N-list", "1..2", "--lambda-modulus", "0.05", "--lambda-arg", "2.0"});
  const auto a = run(cfg);
  const auto b = run(cfg);
  CHECK(a.summary.dump() == b.summary.dump());
  CHECK(a.csv.rfind("lambda_modulus,lambda_arg,N,F_re,F_im,error,method\r\n", 0) == 0);
  CHECK(std::count(a.csv.begin(), a.csv.end(), '\n') == 3);
}

TEST_CASE("jacobian-check counts failures") {
  const auto r = run(parse({"jacobian-check", "--p", "4", "--lambda-modulus", "3", "--samples", "2000"}));
  CHECK(r.passed());
  CHECK(r.summary["results"]["failures"] == 0);
  CHECK(r.summary["results"]["pairs"] == 2000);
}
