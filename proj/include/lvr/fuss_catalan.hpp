#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <span>
#include <vector>

#include "lvr/common.hpp"

// The Fuss-Catalan function T_p(z): the solution of z T^p - T + 1 = 0 with
// T_p(0) = 1, analytic on the plane cut along [b_p, +inf), where
// b_p = (p-1)^(p-1) / p^p is its branch point.

namespace lvr::fc {

/// Interaction half-order; the model interaction is lambda Tr H^(2p).
class FussCatalanParams {
 public:
  explicit FussCatalanParams(int p);
  int p() const noexcept { return p_; }

 private:
  int p_;
};

/// Points closer than this to the cut are rejected rather than evaluated.
inline constexpr double kCutTolerance = 1e-8;

/// E_p is not evaluated closer than this to the branch point.
inline constexpr double kBranchPointTolerance = 1e-6;

double branch_point(int p);

/// Cut locus of the scalar map h_lambda in the u-plane: 2p-2 rays
/// u = rho e^{i theta_k}, rho >= ray_start_radius.
struct CutGeometry {
  double branch_point = 0.0;
  std::vector<double> ray_angles;
  double ray_start_radius = 0.0;
};

CutGeometry cut_geometry(const FussCatalanParams& params, Complex lambda);

/// Exact power-series coefficients c_0..c_{n_max}, by fixed-point iteration
/// of T <- 1 + z T^p on truncated series.
std::vector<boost::multiprecision::cpp_int> fc_series_coeffs(const FussCatalanParams& params, int n_max);

/// Principal branch of T_p. Throws CutProximity within kCutTolerance of the
/// cut and NonConvergence if the continuation budget is exhausted.
Complex fc_eval(const FussCatalanParams& params, Complex z);

/// E_p(z) = T_p'(z) / T_p(z) = T^(p-1) / (1 - p z T^(p-1)).
Complex fc_log_deriv(const FussCatalanParams& params, Complex z);

/// Same as fc_log_deriv but reuses an already computed T_p(z).
Complex fc_log_deriv_from_value(int p, Complex z, Complex t);

/// Distance from u to the union of the cut rays of h_lambda.
double fc_cut_distance(const FussCatalanParams& params, Complex lambda, Complex u);

/// Distance from z to the cut [b_p, +inf) of T_p itself.
double distance_to_cut(int p, Complex z);

/// Evaluates T_p at z_k = radii[k] * direction for ascending radii, carrying
/// the branch from one point to the next. Much cheaper than repeated fc_eval
/// for dense sets of points on one ray.
std::vector<Complex> fc_eval_on_ray(const FussCatalanParams& params, Complex direction,
                                    std::span<const double> radii);

/// Newton polish of T_p at z from a seed. Returns false if Newton does not
/// converge; does not check the branch.
bool fc_newton(int p, Complex z, Complex& t, int max_iter = 50);

}  // namespace lvr::fc
