#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lvr/common.hpp"

namespace lvr {

/// Held-out samples may exceed the fitted constant by at most this factor.
inline constexpr double kHoldoutFactor = 1.5;
/// Relative window for measured against predicted scaling exponents.
inline constexpr double kExponentWindow = 0.15;

/// One bound |value| <= C * reference checked over a sample set. C is the
/// largest ratio over the training samples (moderate |lambda| and spectra);
/// the held-out samples (smallest |lambda|, largest spectra) must stay below
/// kHoldoutFactor * C.
struct BoundSuite {
  std::string name;
  double fitted_constant = 0.0;
  double holdout_ratio = 0.0;  // held-out sup / fitted_constant
  long n_samples = 0;
  bool holds = false;
};

/// Log-log slope of a quantity against |lambda| along one arg lambda.
struct ExponentFit {
  std::string name;
  double arg = 0.0;
  double measured = 0.0;
  double slope_stderr = 0.0;
  double predicted = 0.0;
  bool within_window = false;   // |measured - predicted| <= window * predicted
  bool decays_as_fast = false;  // measured >= (1 - window) * predicted
  std::vector<double> moduli;
  std::vector<double> values;
};

struct BoundOptions {
  std::vector<double> moduli{1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  std::vector<double> radii{0.5, 2.0, 8.0};
  long n_spectra = 1000;
  int pairs_per_spectrum = 32;
  int workers = 1;
};

struct BoundReport {
  int p = 2;
  double epsilon = 0.1;
  std::vector<double> args;
  std::vector<BoundSuite> suites;
  std::vector<ExponentFit> exponents;

  bool constants_hold() const;
  bool exponents_within_window() const;
  bool exponents_decay_as_fast() const;
};

/// arg lambda samples {0, +-pi/2, +-(pi - 2 epsilon)}.
std::vector<double> pacman_args(double epsilon);

/// The g-bound, the resolvent and corner-operator bounds, the
/// contour resolvent bound and the contour factor, each with one fitted
/// constant; scaling exponents of the contour factor and of the single
/// vertex amplitude and A1 (N = 1, quadrature).
BoundReport verify_bounds(int p, double epsilon, std::uint64_t seed, const BoundOptions& opt = {});

struct ScanRow {
  int N = 1;
  double arg = 0.0;
  Complex F;
  double error = 0.0;
  std::string method;
};

struct ScanTrend {
  double arg = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  bool no_growth = false;  // slope <= 2 stderr
};

struct PacmanScan {
  std::vector<ScanRow> rows;
  std::vector<ScanTrend> trends;
  double max_abs_F = 0.0;
  bool bounded() const;
};

/// |F(lambda, N)| at |lambda| = modulus for each arg and N. Quadrature for
/// N <= 3; Monte Carlo for larger N at arg 0 only (other rows skipped).
PacmanScan pacman_scan(int p, double epsilon, double modulus, const std::vector<double>& args, const std::vector<int>& ns, int beta,
                       long mc_samples, std::uint64_t seed, int workers);

}  // namespace lvr
