#include "doctest.h"

#include <cmath>

#include "lvr/partition_oracle.hpp"
#include "lvr/quadrature.hpp"

using lvr::Complex;
using lvr::Coupling;
using lvr::EnsembleSpec;
using lvr::PartitionMethod;
using lvr::Rational;

namespace {

double to_double(const Rational& q) { return q.convert_to<double>(); }

// int exp(-x^2 - lam x^4) / int exp(-x^2) by composite Gauss-Legendre on [-8, 8]
double scalar_z(double lam, int p) {
  const auto gl = lvr::gauss_legendre(40);
  double num = 0.0, den = 0.0;
  for (int panel = 0; panel < 64; ++panel) {
    const double a = -8.0 + 0.25 * panel;
    for (int k = 0; k < 40; ++k) {
      const double x = a + 0.125 * (gl.nodes[k] + 1.0);
      const double w = 0.125 * gl.weights[k] * std::exp(-x * x);
      num += w * std::exp(-lam * std::pow(x, 2 * p));
      den += w;
    }
  }
  return num / den;
}

}  // namespace

TEST_CASE("Wick moments") {
  for (int n = 1; n <= 8; ++n) {
    CHECK(lvr::gaussian_moment_exact(n, 0, 2) == Rational(n));
    CHECK(lvr::gaussian_moment_exact(n, 1, 2) == Rational(n, 2));
    CHECK(lvr::gaussian_moment_exact(n, 1, 1) == Rational(n + 1, 4));
    // GUE fourth moment sigma^4 (2N^3 + N), sigma^2 = 1/(2N)
    CHECK(lvr::gaussian_moment_exact(n, 2, 2) == Rational(2 * n * n * n + n, 4 * n * n));
  }
  CHECK(lvr::gaussian_moment_exact(1, 2, 2) == Rational(3, 4));
  // scalar case: E[x^(2k)] = (2k-1)!! sigma^(2k) with sigma^2 = 1/2
  CHECK(lvr::gaussian_moment_exact(1, 6, 2) == Rational(10395, 64));
  CHECK(lvr::gaussian_moment_exact(1, 3, 1) == Rational(15, 8));
  CHECK_THROWS_AS(lvr::gaussian_moment_exact(9, 1, 2), lvr::NumericError);
  CHECK_THROWS_AS(lvr::gaussian_moment_exact(2, 7, 2), lvr::NumericError);
}

TEST_CASE("sampled moments match the pairing oracle") {
  for (int beta : {1, 2}) {
    for (int n = 1; n <= 4; ++n) {
      const EnsembleSpec spec(n, beta);
      auto rng = lvr::derive_stream(100 + n, beta);
      double s2 = 0, s2sq = 0, s4 = 0, s4sq = 0;
      const int m = 100000;
      for (int k = 0; k < m; ++k) {
        const auto h = lvr::sample_gaussian(spec, rng).entries();
        const double t2 = (h * h).trace().real();
        const double t4 = (h * h * h * h).trace().real();
        s2 += t2;
        s2sq += t2 * t2;
        s4 += t4;
        s4sq += t4 * t4;
      }
      const double m2 = s2 / m, m4 = s4 / m;
      const double se2 = std::sqrt((s2sq / m - m2 * m2) / m), se4 = std::sqrt((s4sq / m - m4 * m4) / m);
      CHECK(std::abs(m2 - to_double(lvr::gaussian_moment_exact(n, 1, beta))) <= 4 * se2);
      CHECK(std::abs(m4 - to_double(lvr::gaussian_moment_exact(n, 2, beta))) <= 4 * se4);
    }
  }
}

TEST_CASE("direct partition function") {
  CHECK(lvr::z_direct(Coupling(0.0, 2), EnsembleSpec(2, 2), PartitionMethod::quadrature).value == Complex(1.0));
  const auto z = lvr::z_direct(Coupling(0.1, 2), EnsembleSpec(1, 2), PartitionMethod::quadrature);
  CHECK(std::abs(z.value - scalar_z(0.1, 2)) <= 1e-10);
  const auto z3 = lvr::z_direct(Coupling(0.1, 3), EnsembleSpec(1, 1), PartitionMethod::quadrature);
  CHECK(std::abs(z3.value - scalar_z(0.1, 3)) <= 1e-9);
}

TEST_CASE("change of variables: z_lvr equals z_direct") {
  struct Case {
    Complex lambda;
    int p, n, beta;
  };
  for (const Case& cs : {Case{0.1, 2, 2, 2}, Case{std::polar(0.05, 3 * lvr::kPi / 4), 3, 2, 2}, Case{0.1, 2, 2, 1},
                         Case{std::polar(0.1, -3 * lvr::kPi / 4), 2, 1, 1}, Case{std::polar(0.02, 3 * lvr::kPi / 4), 2, 3, 2}}) {
    const Coupling c(cs.lambda, cs.p);
    const EnsembleSpec spec(cs.n, cs.beta);
    const auto direct = lvr::z_direct(c, spec, PartitionMethod::quadrature);
    const auto lvr_z = lvr::z_lvr(c, spec, PartitionMethod::quadrature);
    CHECK(std::abs(direct.value - lvr_z.value) <= 1e-4 * std::abs(direct.value));
  }
}

TEST_CASE("Monte Carlo agrees with quadrature") {
  const Coupling c(0.1, 2);
  const EnsembleSpec spec(2, 2);
  lvr::PartitionOptions opt;
  opt.mc_samples = 50000;
  opt.seed = 3;
  const auto q = lvr::z_direct(c, spec, PartitionMethod::quadrature);
  const auto mc = lvr::z_direct(c, spec, PartitionMethod::monte_carlo, opt);
  const auto mc_lvr = lvr::z_lvr(c, spec, PartitionMethod::monte_carlo, opt);
  CHECK(std::abs(mc.value - q.value) <= 3 * mc.error);
  CHECK(std::abs(mc_lvr.value - q.value) <= 3 * mc_lvr.error);
  CHECK_THROWS_AS(lvr::z_direct(Coupling(std::polar(0.1, 1.0), 2), spec, PartitionMethod::monte_carlo), lvr::NumericError);

  // same seed, different worker counts
  opt.workers = 3;
  CHECK(lvr::z_direct(c, spec, PartitionMethod::monte_carlo, opt).value == mc.value);
}

TEST_CASE("free energy small-lambda slope") {
  CHECK(lvr::free_energy(Coupling(0.0, 2), EnsembleSpec(1, 2), PartitionMethod::quadrature).value == Complex(0.0));
  const auto f = lvr::free_energy(Coupling(0.01, 2), EnsembleSpec(1, 2), PartitionMethod::quadrature);
  CHECK(std::abs(f.value.real() + 0.01 * 0.75) <= 0.05 * 0.0075);
  // (1 - Z)/lambda -> N E[Tr H^(2p)]
  const EnsembleSpec spec(2, 1);
  const double exact = 2 * to_double(lvr::gaussian_moment_exact(2, 2, 1));
  auto slope = [&](double lam) { return (1.0 - lvr::z_direct(Coupling(lam, 2), spec, PartitionMethod::quadrature).value.real()) / lam; };
  const double richardson = 2 * slope(5e-4) - slope(1e-3);
  CHECK(std::abs(richardson - exact) <= 1e-2 * exact);
}
