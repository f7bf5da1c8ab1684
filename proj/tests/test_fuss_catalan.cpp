#include "doctest.h"

#include <cmath>
#include <random>

#include "lvr/fuss_catalan.hpp"

using lvr::Complex;
using lvr::ErrorKind;
using lvr::NumericError;
namespace fc = lvr::fc;

namespace {

// Closed form for p = 2 on the cut plane: principal sqrt has Re >= 0, which
// selects the branch with T(0) = 1.
Complex catalan_closed_form(Complex z) {
  if (std::abs(z) < 1e-12) return 1.0 + z;
  return 2.0 / (1.0 + std::sqrt(1.0 - 4.0 * z));
}

double residual(int p, Complex z, Complex t) {
  const Complex ztp = z * lvr::ipow(t, p);
  return std::abs(ztp - t + 1.0) / (1.0 + std::abs(ztp));
}

long long binomial(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("series coefficients from the fixed-point oracle") {
  const auto c2 = fc::fc_series_coeffs(fc::FussCatalanParams(2), 5);
  const std::vector<int> catalan{1, 1, 2, 5, 14, 42};
  REQUIRE(c2.size() == catalan.size());
  for (std::size_t i = 0; i < catalan.size(); ++i) CHECK(c2[i] == catalan[i]);

  const auto c3 = fc::fc_series_coeffs(fc::FussCatalanParams(3), 4);
  const std::vector<int> ternary{1, 1, 3, 12, 55};
  for (std::size_t i = 0; i < ternary.size(); ++i) CHECK(c3[i] == ternary[i]);
  for (int n = 0; n <= 4; ++n) CHECK(c3[n] == binomial(3 * n, n) / (2 * n + 1));

  const auto c0 = fc::fc_series_coeffs(fc::FussCatalanParams(2), 0);
  REQUIRE(c0.size() == 1);
  CHECK(c0[0] == 1);
}

TEST_CASE("p = 2 evaluation matches the closed form") {
  const fc::FussCatalanParams p2(2);
  CHECK(fc::fc_eval(p2, 0.0) == Complex(1.0));
  CHECK(std::abs(fc::fc_eval(p2, 0.1) - 1.1270166537925831) < 1e-12);
  CHECK(std::abs(fc::fc_eval(p2, -1.0) - 0.6180339887498949) < 1e-12);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> radius(-4.0, 4.0);
  std::uniform_real_distribution<double> angle(-lvr::kPi, lvr::kPi);
  for (int k = 0; k < 2000; ++k) {
    const Complex z = std::polar(std::pow(10.0, radius(rng)), angle(rng));
    if (fc::distance_to_cut(2, z) < 1e-6) continue;
    const Complex t = fc::fc_eval(p2, z);
    CHECK(std::abs(t - catalan_closed_form(z)) <= 1e-10 * std::max(1.0, std::abs(t)));
  }
}

TEST_CASE("log-derivative from implicit differentiation") {
  const fc::FussCatalanParams p2(2);
  CHECK(std::abs(fc::fc_log_deriv(p2, 0.0) - 1.0) < 1e-14);
  CHECK(std::abs(fc::fc_log_deriv(fc::FussCatalanParams(3), 0.0) - 1.0) < 1e-14);
  // T/(1 - 2zT) with T from the closed form at z = 0.1.
  const double t = 1.1270166537925831;
  CHECK(std::abs(fc::fc_log_deriv(p2, 0.1) - t / (1.0 - 0.2 * t)) < 1e-12);
  CHECK(std::abs(fc::fc_log_deriv(p2, 0.1) - 1.4550) < 1e-4);

  for (int p = 2; p <= 5; ++p) {
    const fc::FussCatalanParams params(p);
    for (Complex z : {Complex(-3.0, 0.5), Complex(0.05, 0.01), Complex(-0.2, -2.0), Complex(10.0, 4.0)}) {
      const double h = 1e-5 * std::max(1.0, std::abs(z));
      const Complex fd = (fc::fc_eval(params, z + h) - fc::fc_eval(params, z - h)) / (2.0 * h);
      const Complex e = fc::fc_log_deriv(params, z);
      CHECK(std::abs(e - fd / fc::fc_eval(params, z)) <= 1e-6 * std::abs(e));
    }
  }
  CHECK_THROWS_AS(fc::fc_log_deriv(p2, Complex(0.25, 1e-7)), NumericError);
}

TEST_CASE("cut proximity and branch-point errors") {
  const fc::FussCatalanParams p2(2);
  try {
    fc::fc_eval(p2, Complex(1.0, 1e-10));
    FAIL("expected CutProximity");
  } catch (const NumericError& e) {
    CHECK(e.kind() == ErrorKind::CutProximity);
  }
  CHECK_NOTHROW(fc::fc_eval(p2, Complex(1.0, 1e-6)));
  try {
    fc::fc_log_deriv(p2, Complex(0.25, 1e-7));
    FAIL("expected BranchPointProximity");
  } catch (const NumericError& e) {
    CHECK(e.kind() == ErrorKind::BranchPointProximity);
  }
  CHECK_THROWS_AS(fc::FussCatalanParams(1), NumericError);
}

TEST_CASE("residual, conjugation symmetry and series consistency for p up to 6") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> radius(-3.0, 5.0);
  std::uniform_real_distribution<double> angle(-lvr::kPi, lvr::kPi);
  for (int p = 2; p <= 6; ++p) {
    const fc::FussCatalanParams params(p);
    const double b = fc::branch_point(p);
    CHECK(b > 0.0);
    CHECK(b <= 1.0);
    const auto exact = fc::fc_series_coeffs(params, 40);
    for (int k = 0; k < 300; ++k) {
      const Complex z = std::polar(std::pow(10.0, radius(rng)), angle(rng));
      if (fc::distance_to_cut(p, z) < 1e-6) continue;
      const Complex t = fc::fc_eval(params, z);
      CHECK(residual(p, z, t) <= 1e-12);
      CHECK(std::abs(fc::fc_eval(params, std::conj(z)) - std::conj(t)) <= 1e-12 * std::abs(t));
    }
    for (int k = 0; k < 100; ++k) {
      const Complex z = std::polar(0.5 * b * std::sqrt(k / 100.0), angle(rng));
      Complex series{0.0};
      for (int n = 40; n >= 0; --n) series = series * z + exact[n].convert_to<double>();
      CHECK(std::abs(fc::fc_eval(params, z) - series) <= 1e-10);
    }
  }
}

TEST_CASE("ray evaluation agrees with pointwise evaluation") {
  const fc::FussCatalanParams p3(3);
  std::vector<double> radii;
  for (int k = 0; k < 500; ++k) radii.push_back(1e-3 * std::pow(1.03, k));
  for (Complex dir : {Complex(-1.0, 0.0), std::polar(1.0, 0.3), std::polar(1.0, -2.5)}) {
    const auto values = fc::fc_eval_on_ray(p3, dir, radii);
    for (std::size_t k = 0; k < radii.size(); k += 7) {
      CHECK(std::abs(values[k] - fc::fc_eval(p3, radii[k] * dir)) <= 1e-12 * std::abs(values[k]));
    }
  }
}

TEST_CASE("cut geometry and distances") {
  const fc::FussCatalanParams p2(2);
  const auto geo = fc::cut_geometry(p2, 1.0);
  CHECK(geo.ray_angles.size() == 2);
  CHECK(geo.ray_start_radius == doctest::Approx(0.5));
  CHECK(fc::fc_cut_distance(p2, 1.0, 0.0) == doctest::Approx(0.5));
  CHECK(fc::fc_cut_distance(p2, 1.0, Complex(0.0, 2.0)) < 1e-14);
  CHECK(fc::fc_cut_distance(p2, 1.0, Complex(0.0, -2.0)) < 1e-14);

  const fc::FussCatalanParams p3(3);
  CHECK(fc::cut_geometry(p3, Complex(0.0, 0.3)).ray_angles.size() == 4);
  for (double u = -1.0; u <= 1.0; u += 0.125) CHECK(fc::fc_cut_distance(p3, 1.0, u) > 0.0);

  // A point on a cut ray of h_lambda maps onto the cut of T_p.
  const Complex lambda = std::polar(0.05, 1.1);
  const auto g3 = fc::cut_geometry(p3, lambda);
  for (double theta : g3.ray_angles) {
    const Complex u = std::polar(1.5 * g3.ray_start_radius, theta);
    const Complex z = -lambda * lvr::ipow(u, 4);
    CHECK(fc::distance_to_cut(3, z) < 1e-12);
    CHECK(z.real() >= fc::branch_point(3));
  }
}

TEST_CASE("ray sweep starting far from the origin stays on the principal branch") {
  for (int p = 2; p <= 5; ++p) {
    const lvr::fc::FussCatalanParams params(p);
    for (double first : {0.3, 1.79139, 7.0, 50.0}) {
      const std::vector<double> radii{first, first, 1.01 * first, 3.0 * first};
      const auto batch = lvr::fc::fc_eval_on_ray(params, -1.0, radii);
      for (std::size_t k = 0; k < radii.size(); ++k) {
        const Complex point = lvr::fc::fc_eval(params, -radii[k]);
        CHECK(std::abs(batch[k] - point) <= 1e-12 * std::abs(point));
        CHECK(batch[k].real() > 0.0);
      }
    }
  }
}
