#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lvr/common.hpp"
#include "lvr/contour.hpp"
#include "lvr/matrix_core.hpp"
#include "lvr/scalar_maps.hpp"

namespace lvr {

/// Eigenvalue gaps below this use the derivative limit h'.
inline constexpr double kCoincidenceThreshold = 1e-9;

struct ActionValue {
  Complex total;
  Complex single_trace_part;  // (1 - beta/2) sum_i log h'(kappa_i)
  Complex double_trace_part;  // (beta/2) sum_{i,j} log D_ij
};

struct ActionOptions {
  /// Follow every log term along the arc |lambda| e^{i t arg lambda},
  /// t in [0, 1], and throw LogBranchAmbiguity on any winding.
  bool track_branch = false;
  int branch_steps = 64;
};

/// Divided differences D_ij = (h(kappa_i) - h(kappa_j)) / (kappa_i - kappa_j),
/// D_ii = h'(kappa_i). Real kappa only.
MatrixC divided_differences(const Coupling& c, std::span<const double> kappa);

/// S = (1 - beta/2) sum_i log h'(kappa_i) + (beta/2) sum_{i,j} log D_ij.
/// exp(S) is the Jacobian of K -> h(K) on the real coordinates.
ActionValue action_S(const Coupling& c, const EnsembleSpec& spec, const SpectralData& s, const ActionOptions& opt = {});
ActionValue action_S(const Coupling& c, int beta, std::span<const double> kappa, const ActionOptions& opt = {});

/// S1 = (N/2) sum_i log T_p(-lambda kappa_i^(2p-2)); S2 = S - S1 (beta = 2).
struct ActionSplit {
  Complex s1;
  Complex s2;
};
ActionSplit action_split(const Coupling& c, const SpectralData& s);

struct ResolventEntries {
  MatrixC values;         // 1 / D_ij
  MatrixR lambda_bounds;  // max(1, |lambda|^(1/2p) |kappa_i|^(1-1/p), same for j)
  double bound_ratio = 0.0;  // max_ij |values_ij| / lambda_bounds_ij
};
ResolventEntries resolvent_entries(const Coupling& c, const SpectralData& s);

/// Corner operator entries between insertions at u_k and u_k1:
/// R_ij [ 1/((u_k-k_i)(u_k1-k_i)(u_k-k_j)) + 1/((u_k-k_i)(u_k-k_j)(u_k1-k_j)) ].
MatrixC corner_operator(const Coupling& c, const SpectralData& s, Complex u_k, Complex u_k1);
MatrixC corner_operator(const ResolventEntries& res, const SpectralData& s, Complex u_k, Complex u_k1);

/// max_ij |1/(u - kappa_i) + 1/(u - kappa_j)|.
double derivative_corner_norm(const SpectralData& s, Complex u);

/// Sigma_ij = (1/2 pi i) oint g(u) / ((u - kappa_i)(u - kappa_j)) du on gamma.
MatrixC sigma_contour(const Coupling& c, const KeyholeContour& gamma, const SpectralData& s);

/// G with dS = Tr(G dK), i.e. G_ab = dS/dK_ba, from the contour kernel.
MatrixC action_gradient(const Coupling& c, const EnsembleSpec& spec, const SpectralData& s, const KeyholeContour& gamma);
/// Builds a contour around the spectrum first.
MatrixC action_gradient(const Coupling& c, const EnsembleSpec& spec, const SpectralData& s);

struct JacobianFactor {
  int i = 0;
  int j = 0;
  bool mixed_sign = false;
  double ratio = 0.0;       // (h_i - h_j) / (s_i - s_j)
  double sum_factor = 0.0;  // (s_i + s_j) / (h_i + h_j), same-sign pairs
  double poly_factor = 0.0; // (1 + lambda sum_k a^k b^(p-1-k))^(-1), same-sign pairs
  bool positive = false;
};

struct JacobianReport {
  bool overall_positive = true;
  std::vector<JacobianFactor> factor_list;
};

/// Positivity of every pair factor of the Jacobian for real lambda > 0.
JacobianReport jacobian_check(int p, double lambda_pos, std::span<const double> eigs);

}  // namespace lvr
