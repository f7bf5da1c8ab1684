#pragma once

#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "lvr/common.hpp"
#include "lvr/matrix_core.hpp"
#include "lvr/scalar_maps.hpp"

namespace lvr {

struct ContourNode {
  Complex u;
  Complex du;  // quadrature weight times the oriented tangent
};

/// Counterclockwise boundary of {|u| < r} union the two sectors
/// {|u| < R, min(|arg u|, |pi - arg u|) < psi}, discretized by composite
/// Gauss-Legendre panels.
///
/// The contour carries the coupling it was built for and the values
/// g(u_k) du_k / (2 pi i) at its nodes, so repeated traces against it only
/// cost one sum per resolvent product.
class KeyholeContour {
 public:
  double R = 0.0;
  double r = 0.0;
  double psi = 0.0;
  int panel_order = 0;
  std::vector<ContourNode> nodes;

  const Coupling& coupling() const { return coupling_; }
  /// g(u_k) du_k / (2 pi i), one entry per node.
  const std::vector<Complex>& g_weights() const { return g_weights_; }

  /// (1/2 pi i) sum_k phi_k du_k / prod_m (u_k - poles_m), where phi_k are
  /// per-node values (or 1 if empty).
  Complex integrate(std::span<const Complex> weighted_values, std::span<const double> poles) const;
  Complex integrate(std::span<const Complex> weighted_values, std::initializer_list<double> poles) const {
    return integrate(weighted_values, std::span<const double>(poles.begin(), poles.size()));
  }

  /// du_k / (2 pi i) for each node.
  std::vector<Complex> cauchy_weights() const;

  /// (1/2 pi i) sum_k du_k / (u_k - a).
  Complex cauchy(Complex a) const;

 private:
  friend KeyholeContour build_keyhole(double, const Coupling&, int);
  explicit KeyholeContour(const Coupling& c) : coupling_(c) {}

  Coupling coupling_;
  std::vector<Complex> g_weights_;
};

/// Cauchy-identity tolerance used for the build-time self-test and by
/// holo_apply.
inline constexpr double kCauchyTolerance = 1e-10;

/// R = max(2 spectral_radius, 2r); psi = min(epsilon / 2, half the smallest
/// angle between a cut ray of h_lambda and the real axis); r = 1 unless the
/// first cut ray starts within 1.5 of the origin, in which case
/// r = rho_c / 1.5. The panel order is doubled from n_nodes / panels until
/// the Cauchy and g self-tests pass.
KeyholeContour build_keyhole(double spectral_radius, const Coupling& c, int n_nodes = 512);

/// Exact Euclidean distance from a set of real points to the contour. Throws
/// SpectrumTooLarge if some |mu| > R/2.
double min_spectrum_distance(const KeyholeContour& gamma, std::span<const double> eigenvalues);

/// (1/2 pi i) oint phi(u) (u - K)^(-1) du in the eigenbasis of K, rotated back.
MatrixC holo_apply(const std::function<Complex(Complex)>& phi, const KeyholeContour& gamma, const SpectralData& s);

}  // namespace lvr
