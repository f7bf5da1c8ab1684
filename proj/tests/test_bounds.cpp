#include "doctest.h"

#include <cmath>

#include "lvr/bounds.hpp"

using namespace lvr;

TEST_CASE("pacman sample arguments") {
  const auto args = pacman_args(0.1);
  REQUIRE(args.size() == 5);
  CHECK(args[0] == 0.0);
  for (double a : args) CHECK(std::abs(a) <= kPi - 0.1);
}

TEST_CASE("bound suites on a default sample set") {
  BoundOptions opt;
  opt.pairs_per_spectrum = 4;
  const auto report = verify_bounds(2, 0.2, 3, opt);
  for (const auto& s : report.suites) INFO(s.name, " ", s.fitted_constant, " ", s.holdout_ratio);
  CHECK(report.constants_hold());
  CHECK(report.exponents_decay_as_fast());
  for (const auto& s : report.suites) {
    CHECK(s.fitted_constant > 0.0);
    CHECK(s.n_samples > 0);
  }
  // analytic in lambda: the small-lambda slope of A1 is close to 1
  for (const auto& e : report.exponents) {
    if (e.name == "A1" && e.arg == 0.0) CHECK(e.measured == doctest::Approx(1.0).epsilon(0.1));
  }
}

TEST_CASE("pacman scan is bounded and independent of workers") {
  const auto a = pacman_scan(2, 0.1, 0.05, {0.0, 2.0}, {1, 2, 3}, 2, 1000, 5, 1);
  const auto b = pacman_scan(2, 0.1, 0.05, {0.0, 2.0}, {1, 2, 3}, 2, 1000, 5, 3);
  CHECK(a.bounded());
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].F == b.rows[i].F);
}
