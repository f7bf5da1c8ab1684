#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lvr/common.hpp"
#include "lvr/matrix_core.hpp"
#include "lvr/scalar_maps.hpp"

namespace lvr {

using Rational = boost::multiprecision::cpp_rational;

enum class PartitionMethod { quadrature, monte_carlo };

const char* to_string(PartitionMethod m);

struct PartitionOptions {
  int quad_nodes = 64;           // starting nodes per eigenvalue, doubled until converged
  double quad_tolerance = 1e-6;  // relative change between doublings
  long mc_samples = 100000;
  std::uint64_t seed = 1;
  int workers = 1;
};

/// Z normalized so that Z(lambda = 0) = 1 by the same method.
struct PartitionEstimate {
  Complex value;
  PartitionMethod method = PartitionMethod::quadrature;
  double error = 0.0;  // last doubling change, or Monte Carlo standard error
  long n_points = 0;   // nodes per eigenvalue, or samples
};

/// Eigenvalue contour angle used for the direct and LVR integrals: the
/// eigenvalues are integrated along mu = e^{i phi} x with
/// phi = -arg(lambda) / (2p + 2), so exp(-N mu^2) and exp(-N lambda mu^(2p))
/// carry opposite phases of size |arg lambda| / (p + 1).
double direct_rotation_angle(const Coupling& c);

/// E[exp(-N lambda Tr H^(2p))] under exp(-N Tr H^2).
/// Quadrature needs N <= 3; Monte Carlo needs real lambda >= 0.
PartitionEstimate z_direct(const Coupling& c, const EnsembleSpec& spec, PartitionMethod method, const PartitionOptions& opt = {});

/// E[exp S(lambda, K)] under exp(-N Tr K^2).
PartitionEstimate z_lvr(const Coupling& c, const EnsembleSpec& spec, PartitionMethod method, const PartitionOptions& opt = {});

/// Batch function of eigenvalues: xs holds m rows of N values.
using EigenBatchFn = std::function<void(std::span<const double> xs, std::size_t m, std::vector<Complex>& out)>;

/// E[f(eigenvalues of K)] under exp(-N Tr K^2) (quadrature, N <= 3), with
/// the same node doubling as z_lvr. The error is the last doubling change.
PartitionEstimate eigenvalue_average(const EnsembleSpec& spec, const EigenBatchFn& f, const PartitionOptions& opt = {});

struct FreeEnergy {
  Complex value;
  double error = 0.0;
};

/// N^(-2) log z_direct.
FreeEnergy free_energy(const Coupling& c, const EnsembleSpec& spec, PartitionMethod method, const PartitionOptions& opt = {});

/// E[Tr H^(2k)] by summing over all Wick pairings; k <= 6, N <= 8.
Rational gaussian_moment_exact(int N, int k, int beta);

}  // namespace lvr
