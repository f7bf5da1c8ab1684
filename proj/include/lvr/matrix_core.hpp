#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "lvr/common.hpp"

namespace lvr {

using MatrixC = Eigen::MatrixXcd;
using MatrixR = Eigen::MatrixXd;
using VectorR = Eigen::VectorXd;

/// Gaussian ensemble with weight exp(-N Tr H^2). For beta = 2 the element
/// covariance is E[H_ij H_kl] = delta_il delta_jk / (2N); for beta = 1
/// (real symmetric) E[H_ii^2] = 1/(2N) and E[H_ij^2] = 1/(4N), i != j.
struct EnsembleSpec {
  int N = 1;
  int beta = 2;

  EnsembleSpec() = default;
  EnsembleSpec(int n, int b);
};

/// N x N Hermitian matrix; real symmetric when built for beta = 1.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  /// Validates hermiticity to a relative tolerance and symmetrizes away
  /// round-off. Throws NonHermitian.
  explicit HermitianMatrix(const MatrixC& m, double tolerance = 1e-12);

  const MatrixC& entries() const noexcept { return m_; }
  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  bool is_real() const { return m_.imag().cwiseAbs().maxCoeff() == 0.0; }

 private:
  MatrixC m_;
};

/// Eigenvalues ascending with orthonormal eigenvectors as columns.
struct SpectralData {
  VectorR eigenvalues;
  MatrixC eigenvectors;

  int dim() const noexcept { return static_cast<int>(eigenvalues.size()); }
  double spectral_radius() const { return eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff() : 0.0; }

  /// V diag(values) V^dagger.
  MatrixC reconstruct(std::span<const Complex> values) const;
  /// Diagonal spectral data for a given list of eigenvalues.
  static SpectralData diagonal(std::span<const double> eigs);
};

SpectralData eigh(const HermitianMatrix& m);

using RngStream = std::mt19937_64;

/// Independent stream for a fixed integer offset from a master seed.
RngStream derive_stream(std::uint64_t master_seed, std::uint64_t offset);

HermitianMatrix sample_gaussian(const EnsembleSpec& spec, RngStream& rng);

/// Replicas K_1..K_n with Cov((K_i)_ab, (K_j)_cd) = x_ij times the single
/// matrix covariance, built as K_i = sum_a L_ia G_a with L the lower Cholesky
/// factor of x. Throws NotPSD if x has an eigenvalue below -1e-12.
std::vector<HermitianMatrix> sample_replicas(const EnsembleSpec& spec, const MatrixR& x, RngStream& rng);

/// Lower-triangular factor of a positive semidefinite matrix; pivots below
/// tolerance are clipped to zero.
MatrixR semidefinite_cholesky(const MatrixR& x, double tolerance = 1e-12);

/// prod_{i<j} |mu_i - mu_j|^beta.
double vandermonde(std::span<const double> eigs, int beta);

/// Real coordinate basis of the Hermitian (beta = 2, N^2 directions) or real
/// symmetric (beta = 1, N(N+1)/2 directions) matrices: e_ii, e_ij + e_ji and,
/// for beta = 2, i(e_ij - e_ji).
std::vector<MatrixC> hermitian_basis(int N, int beta);

}  // namespace lvr
