#include "doctest.h"

#include <cmath>
#include <vector>

#include "lvr/matrix_core.hpp"
#include "lvr/parallel.hpp"

using lvr::EnsembleSpec;
using lvr::HermitianMatrix;
using lvr::MatrixC;
using lvr::MatrixR;

namespace {

struct MeanVar {
  double mean = 0.0;
  double se = 0.0;
};

template <typename Fn>
MeanVar sample_mean(int n, Fn&& draw) {
  double s = 0.0, s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double v = draw();
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  return {mean, std::sqrt(std::max(0.0, s2 / n - mean * mean) / n)};
}

}  // namespace

TEST_CASE("eigh on small reference matrices") {
  MatrixC d = MatrixC::Zero(3, 3);
  d(0, 0) = 3;
  d(1, 1) = 1;
  d(2, 2) = 2;
  auto s = lvr::eigh(HermitianMatrix(d));
  CHECK(s.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(s.eigenvalues[1] == doctest::Approx(2.0));
  CHECK(s.eigenvalues[2] == doctest::Approx(3.0));

  MatrixC x = MatrixC::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1.0;
  s = lvr::eigh(HermitianMatrix(x));
  CHECK(s.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(s.eigenvalues[1] == doctest::Approx(1.0));

  MatrixC bad = MatrixC::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(HermitianMatrix{bad}, lvr::NumericError);
}

TEST_CASE("eigh residual and unitarity on random matrices") {
  for (int beta : {1, 2}) {
    auto rng = lvr::derive_stream(11, beta);
    for (int n = 1; n <= 6; ++n) {
      const auto m = lvr::sample_gaussian(EnsembleSpec(n, beta), rng);
      const auto s = lvr::eigh(m);
      const MatrixC lam = s.eigenvalues.cast<lvr::Complex>().asDiagonal();
      CHECK((m.entries() * s.eigenvectors - s.eigenvectors * lam).norm() <= 1e-10 * m.entries().norm());
      CHECK((s.eigenvectors.adjoint() * s.eigenvectors - MatrixC::Identity(n, n)).norm() <= 1e-10);
      for (int i = 1; i < n; ++i) CHECK(s.eigenvalues[i - 1] <= s.eigenvalues[i]);
      if (beta == 1) CHECK(s.eigenvectors.imag().norm() == 0.0);
    }
  }
}

TEST_CASE("sampled second moments match the weight exp(-N Tr H^2)") {
  for (int beta : {1, 2}) {
    for (int n : {1, 3}) {
      auto rng = lvr::derive_stream(5, 10 * n + beta);
      const EnsembleSpec spec(n, beta);
      const auto est = sample_mean(100000, [&] { return lvr::sample_gaussian(spec, rng).entries().squaredNorm(); });
      const double expected = beta == 2 ? n / 2.0 : (n + 1) / 4.0;
      CHECK(std::abs(est.mean - expected) <= 4 * est.se);
    }
  }
}

TEST_CASE("sampling is deterministic per stream") {
  auto a = lvr::derive_stream(42, 3);
  auto b = lvr::derive_stream(42, 3);
  auto c = lvr::derive_stream(42, 4);
  const EnsembleSpec spec(3, 2);
  const auto ma = lvr::sample_gaussian(spec, a).entries();
  CHECK(ma == lvr::sample_gaussian(spec, b).entries());
  CHECK(ma != lvr::sample_gaussian(spec, c).entries());
}

TEST_CASE("replicas follow the interpolated covariance") {
  const EnsembleSpec spec(2, 2);
  auto rng = lvr::derive_stream(9, 0);

  MatrixR ones = MatrixR::Ones(2, 2);
  const auto same = lvr::sample_replicas(spec, ones, rng);
  CHECK(same[0].entries() == same[1].entries());

  for (double rho : {0.0, 0.5}) {
    MatrixR x(2, 2);
    x << 1.0, rho, rho, 1.0;
    // E[(K1)_00 (K2)_00] = rho / (2N)
    const auto est = sample_mean(100000, [&] {
      const auto k = lvr::sample_replicas(spec, x, rng);
      return k[0].entries()(0, 0).real() * k[1].entries()(0, 0).real();
    });
    CHECK(std::abs(est.mean - rho / (2.0 * spec.N)) <= 4 * est.se);
  }

  MatrixR indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(lvr::sample_replicas(spec, indefinite, rng), lvr::NumericError);
}

TEST_CASE("semidefinite Cholesky reproduces the matrix") {
  MatrixR x(3, 3);
  x << 1.0, 0.5, 0.2, 0.5, 1.0, 0.2, 0.2, 0.2, 1.0;
  const MatrixR l = lvr::semidefinite_cholesky(x);
  CHECK((l * l.transpose() - x).norm() <= 1e-14);
  CHECK(l(0, 1) == 0.0);
}

TEST_CASE("vandermonde") {
  CHECK(lvr::vandermonde(std::vector<double>{0, 1}, 2) == 1.0);
  CHECK(lvr::vandermonde(std::vector<double>{0, 1, 2}, 2) == 4.0);
  CHECK(lvr::vandermonde(std::vector<double>{0, 2}, 1) == 2.0);
}

TEST_CASE("hermitian basis dimension") {
  CHECK(lvr::hermitian_basis(3, 2).size() == 9);
  CHECK(lvr::hermitian_basis(3, 1).size() == 6);
}

TEST_CASE("parallel blocks are independent of the worker count") {
  auto run = [](int workers) {
    auto blocks = lvr::parallel_blocks(16, workers, [](std::size_t b) {
      auto rng = lvr::derive_stream(77, b);
      return lvr::sample_gaussian(EnsembleSpec(2, 2), rng).entries().squaredNorm();
    });
    double s = 0.0;
    for (double v : blocks) s += v;
    return s;
  };
  CHECK(run(1) == run(3));
}
