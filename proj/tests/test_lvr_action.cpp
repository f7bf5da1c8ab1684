#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "lvr/lvr_action.hpp"

using lvr::Complex;
using lvr::Coupling;
using lvr::EnsembleSpec;
using lvr::HermitianMatrix;
using lvr::MapKind;
using lvr::MatrixC;

namespace {

// Real coordinates of a matrix in the hermitian_basis ordering.
std::vector<double> coordinates(const MatrixC& m, int beta) {
  const int n = static_cast<int>(m.rows());
  std::vector<double> c;
  for (int i = 0; i < n; ++i) c.push_back(m(i, i).real());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      c.push_back(m(i, j).real());
      if (beta == 2) c.push_back(m(i, j).imag());
    }
  }
  return c;
}

MatrixC apply_h(const Coupling& c, const MatrixC& k) {
  const auto s = lvr::eigh(HermitianMatrix(k));
  std::vector<Complex> hv;
  for (int i = 0; i < s.dim(); ++i) hv.push_back(lvr::eval_map(MapKind::h, c, s.eigenvalues[i]));
  return s.reconstruct(hv);
}

double fd_jacobian_det(const Coupling& c, const MatrixC& k, int beta) {
  const auto basis = lvr::hermitian_basis(static_cast<int>(k.rows()), beta);
  const int d = static_cast<int>(basis.size());
  const double step = 1e-5;
  Eigen::MatrixXd jac(d, d);
  for (int b = 0; b < d; ++b) {
    const auto plus = coordinates(apply_h(c, k + step * basis[b]), beta);
    const auto minus = coordinates(apply_h(c, k - step * basis[b]), beta);
    for (int a = 0; a < d; ++a) jac(a, b) = (plus[a] - minus[a]) / (2 * step);
  }
  return jac.determinant();
}

double fd_directional(const Coupling& c, const EnsembleSpec& spec, const MatrixC& k, const MatrixC& e) {
  const double step = 1e-5;
  auto s_at = [&](const MatrixC& m) { return lvr::action_S(c, spec, lvr::eigh(HermitianMatrix(m))).total.real(); };
  return (s_at(k + step * e) - s_at(k - step * e)) / (2 * step);
}

}  // namespace

TEST_CASE("action vanishes at lambda = 0 and reduces to log h' for N = 1") {
  const std::vector<double> kappa{0.3, -1.1};
  const auto zero = lvr::action_S(Coupling(0.0, 2), 2, kappa);
  CHECK(zero.total == Complex(0.0));
  const Coupling c(0.1, 3);
  for (int beta : {1, 2}) {
    const auto a = lvr::action_S(c, beta, std::vector<double>{0.8});
    CHECK(std::abs(a.total - std::log(lvr::eval_h_prime(c, 0.8))) <= 1e-14);
    CHECK(std::abs(a.single_trace_part + a.double_trace_part - a.total) <= 1e-15);
  }
  CHECK(lvr::action_S(c, 2, kappa).single_trace_part == Complex(0.0));
}

TEST_CASE("exp(S) equals the finite-difference Jacobian determinant") {
  auto rng = lvr::derive_stream(21, 0);
  for (int p : {2, 3}) {
    for (int beta : {1, 2}) {
      for (int n = 1; n <= 3; ++n) {
        for (double lam : {0.05, 0.2}) {
          const Coupling c(lam, p);
          const EnsembleSpec spec(n, beta);
          const auto k = lvr::sample_gaussian(spec, rng);
          const double det = fd_jacobian_det(c, k.entries(), beta);
          const auto s = lvr::action_S(c, spec, lvr::eigh(k));
          CHECK(std::abs(s.total.imag()) <= 1e-10);
          CHECK(std::abs(std::exp(s.total.real()) - det) <= 1e-5 * std::abs(det));
        }
      }
    }
  }
}

TEST_CASE("action split") {
  const Coupling c(std::polar(0.05, 1.0), 2);
  const std::vector<double> kappa{-0.7, 0.1, 1.3};
  const auto s = lvr::SpectralData::diagonal(kappa);
  const auto split = lvr::action_split(c, s);
  const auto total = lvr::action_S(c, 2, kappa).total;
  CHECK(std::abs(split.s1 + split.s2 - total) <= 1e-14);
  Complex independent{0.0};
  for (double ki : kappa) {
    for (double kj : kappa) {
      const Complex ratio = ki == kj ? lvr::eval_h_prime(c, ki) : (lvr::eval_map(MapKind::h, c, ki) - lvr::eval_map(MapKind::h, c, kj)) / (ki - kj);
      independent += std::log(ratio / lvr::eval_map(MapKind::f, c, kj));
    }
  }
  CHECK(std::abs(split.s2 - independent) <= 1e-10);
  const auto zero = lvr::action_split(Coupling(0.0, 2), s);
  CHECK(zero.s1 == Complex(0.0));
  CHECK(zero.s2 == Complex(0.0));
}

TEST_CASE("resolvent entries") {
  const std::vector<double> kappa{-2.0, 0.0, 2.0};
  const auto s = lvr::SpectralData::diagonal(kappa);
  const auto zero = lvr::resolvent_entries(Coupling(0.0, 2), s);
  CHECK((zero.values - MatrixC::Ones(3, 3)).norm() == 0.0);
  const Coupling c(0.1, 2);
  const auto res = lvr::resolvent_entries(c, s);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(res.values(i, i) - 1.0 / lvr::eval_h_prime(c, kappa[i])) <= 1e-14);
  CHECK((res.values - res.values.transpose()).norm() == 0.0);
  CHECK(res.bound_ratio > 0.0);
  CHECK(res.bound_ratio < 10.0);
}

TEST_CASE("corner operator") {
  const std::vector<double> kappa{-0.5, 0.4};
  const auto s = lvr::SpectralData::diagonal(kappa);
  const Complex u(0.3, 1.0), v(-1.0, 0.2);
  const auto o = lvr::corner_operator(Coupling(0.0, 2), s, u, v);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const Complex a = 1.0 / (u - kappa[i]), b = 1.0 / (u - kappa[j]);
      CHECK(std::abs(o(i, j) - (a * b / (v - kappa[i]) + a * b / (v - kappa[j]))) <= 1e-14);
    }
  }
  CHECK_THROWS_AS(lvr::corner_operator(Coupling(0.1, 2), s, 0.4, v), lvr::NumericError);

  const auto gamma = lvr::build_keyhole(0.5, Coupling(0.1, 2, 0.2));
  for (const auto& node : gamma.nodes) CHECK(lvr::derivative_corner_norm(s, node.u) <= 2.0 / (gamma.r * std::sin(gamma.psi)) + 1e-12);
}

TEST_CASE("sigma by contour matches the eigenvalue formula") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> x(-1.5, 1.5);
  for (const Coupling& c : {Coupling(0.05, 2), Coupling(std::polar(0.1, 2.5), 3, 0.2), Coupling(0.0, 2)}) {
    std::vector<double> kappa{x(rng), x(rng), x(rng)};
    const auto s = lvr::SpectralData::diagonal(kappa);
    const auto gamma = lvr::build_keyhole(s.spectral_radius(), c);
    const auto sigma = lvr::sigma_contour(c, gamma, s);
    const auto direct = lvr::divided_differences(c, kappa);
    CHECK((sigma - (direct - MatrixC::Ones(3, 3))).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("action gradient matches finite differences") {
  auto rng = lvr::derive_stream(8, 1);
  for (int beta : {1, 2}) {
    for (int n : {1, 2, 3}) {
      const Coupling c(0.05 * n, 2 + (n % 2));
      const EnsembleSpec spec(n, beta);
      const auto k = lvr::sample_gaussian(spec, rng);
      const auto s = lvr::eigh(k);
      const MatrixC g = lvr::action_gradient(c, spec, s);
      for (const MatrixC& e : lvr::hermitian_basis(n, beta)) {
        const Complex analytic = (g * e).trace();
        const double fd = fd_directional(c, spec, k.entries(), e);
        CHECK(std::abs(analytic.imag()) <= 1e-10);
        CHECK(std::abs(analytic.real() - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
  // N = 1: dS/dk = h''/h'
  const Coupling c(0.1, 2);
  const auto s = lvr::SpectralData::diagonal(std::vector<double>{0.6});
  const Complex g = lvr::action_gradient(c, EnsembleSpec(1, 2), s)(0, 0);
  const double step = 1e-5;
  const Complex fd = (std::log(lvr::eval_h_prime(c, 0.6 + step)) - std::log(lvr::eval_h_prime(c, 0.6 - step))) / (2 * step);
  CHECK(std::abs(g - fd) <= 1e-8);
}

TEST_CASE("Jacobian factors are positive for lambda > 0") {
  const auto report = lvr::jacobian_check(2, 1.0, std::vector<double>{-1.0, 2.0});
  CHECK(report.overall_positive);
  const auto same = lvr::jacobian_check(3, 0.5, std::vector<double>{0.7, 0.7});
  CHECK(same.overall_positive);
  // the (0,1) factor of a coincident pair is h'(a)
  CHECK(same.factor_list[1].ratio == doctest::Approx(lvr::eval_h_prime(Coupling(0.5, 3), 0.7).real()).epsilon(1e-12));
  // same-sign product of factors reproduces the divided difference
  const auto pair = lvr::jacobian_check(2, 0.3, std::vector<double>{0.4, 1.9});
  const Coupling c(0.3, 2);
  const Complex dd = (lvr::eval_map(MapKind::h, c, 0.4) - lvr::eval_map(MapKind::h, c, 1.9)) / (0.4 - 1.9);
  CHECK(pair.factor_list[1].ratio == doctest::Approx(dd.real()).epsilon(1e-12));
}
