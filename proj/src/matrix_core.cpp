#include "lvr/matrix_core.hpp"

#include <cmath>
#include <sstream>

namespace lvr {

EnsembleSpec::EnsembleSpec(int n, int b) : N(n), beta(b) {
  if (n < 1) throw NumericError(ErrorKind::InvalidArgument, "ensemble size N must be >= 1");
  if (b != 1 && b != 2) throw NumericError(ErrorKind::InvalidArgument, "beta must be 1 or 2");
}

HermitianMatrix::HermitianMatrix(const MatrixC& m, double tolerance) {
  if (m.rows() != m.cols() || m.rows() == 0) throw NumericError(ErrorKind::NonHermitian, "matrix must be square and non-empty");
  const double scale = std::max(1.0, m.norm());
  const double defect = (m - m.adjoint()).norm();
  if (defect > tolerance * scale) {
    std::ostringstream msg;
    msg << "||M - M^dagger|| = " << defect;
    throw NumericError(ErrorKind::NonHermitian, msg.str());
  }
  m_ = 0.5 * (m + m.adjoint());
}

MatrixC SpectralData::reconstruct(std::span<const Complex> values) const {
  Eigen::Map<const Eigen::VectorXcd> d(values.data(), static_cast<Eigen::Index>(values.size()));
  return eigenvectors * d.asDiagonal() * eigenvectors.adjoint();
}

SpectralData SpectralData::diagonal(std::span<const double> eigs) {
  SpectralData s;
  s.eigenvalues = Eigen::Map<const VectorR>(eigs.data(), static_cast<Eigen::Index>(eigs.size()));
  s.eigenvectors = MatrixC::Identity(s.eigenvalues.size(), s.eigenvalues.size());
  return s;
}

SpectralData eigh(const HermitianMatrix& m) {
  SpectralData out;
  if (m.is_real()) {
    Eigen::SelfAdjointEigenSolver<MatrixR> solver(m.entries().real());
    if (solver.info() != Eigen::Success) throw NumericError(ErrorKind::NonConvergence, "eigh failed");
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixC> solver(m.entries());
    if (solver.info() != Eigen::Success) throw NumericError(ErrorKind::NonConvergence, "eigh failed");
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors();
  }
  return out;
}

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t offset) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(offset), static_cast<std::uint32_t>(offset >> 32)};
  return RngStream(seq);
}

HermitianMatrix sample_gaussian(const EnsembleSpec& spec, RngStream& rng) {
  const int n = spec.N;
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd_diag = std::sqrt(1.0 / (2.0 * n));
  const double sd_off = std::sqrt(1.0 / (4.0 * n));
  MatrixC m(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = sd_diag * normal(rng);
    for (int j = i + 1; j < n; ++j) {
      const double re = sd_off * normal(rng);
      const double im = spec.beta == 2 ? sd_off * normal(rng) : 0.0;
      m(i, j) = Complex(re, im);
      m(j, i) = Complex(re, -im);
    }
  }
  return HermitianMatrix(m);
}

MatrixR semidefinite_cholesky(const MatrixR& x, double tolerance) {
  const Eigen::Index n = x.rows();
  MatrixR l = MatrixR::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = x(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d < -tolerance) throw NumericError(ErrorKind::NotPSD, "negative pivot in semidefinite Cholesky");
    if (d <= tolerance) continue;  // column stays zero
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = x(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

std::vector<HermitianMatrix> sample_replicas(const EnsembleSpec& spec, const MatrixR& x, RngStream& rng) {
  if (x.rows() != x.cols()) throw NumericError(ErrorKind::InvalidArgument, "x must be square");
  const Eigen::Index n = x.rows();
  Eigen::SelfAdjointEigenSolver<MatrixR> solver(x, Eigen::EigenvaluesOnly);
  if (n > 0 && solver.eigenvalues().minCoeff() < -1e-12) {
    std::ostringstream msg;
    msg << "interpolation matrix has eigenvalue " << solver.eigenvalues().minCoeff();
    throw NumericError(ErrorKind::NotPSD, msg.str());
  }
  const MatrixR l = semidefinite_cholesky(x);
  std::vector<MatrixC> g;
  g.reserve(n);
  for (Eigen::Index a = 0; a < n; ++a) g.push_back(sample_gaussian(spec, rng).entries());
  std::vector<HermitianMatrix> out;
  out.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    MatrixC k = MatrixC::Zero(spec.N, spec.N);
    for (Eigen::Index a = 0; a <= i; ++a) {
      if (l(i, a) != 0.0) k += l(i, a) * g[a];
    }
    out.emplace_back(k);
  }
  return out;
}

double vandermonde(std::span<const double> eigs, int beta) {
  double v = 1.0;
  for (std::size_t i = 0; i < eigs.size(); ++i) {
    for (std::size_t j = i + 1; j < eigs.size(); ++j) v *= std::pow(std::abs(eigs[i] - eigs[j]), beta);
  }
  return v;
}

std::vector<MatrixC> hermitian_basis(int N, int beta) {
  std::vector<MatrixC> basis;
  for (int i = 0; i < N; ++i) {
    MatrixC e = MatrixC::Zero(N, N);
    e(i, i) = 1.0;
    basis.push_back(e);
  }
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      MatrixC e = MatrixC::Zero(N, N);
      e(i, j) = e(j, i) = 1.0;
      basis.push_back(e);
      if (beta == 2) {
        MatrixC f = MatrixC::Zero(N, N);
        f(i, j) = kI;
        f(j, i) = -kI;
        basis.push_back(f);
      }
    }
  }
  return basis;
}

}  // namespace lvr
