#pragma once

#include <vector>

namespace lvr {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// Gauss-Hermite rule for the weight exp(-x^2) on the real line
/// (Golub-Welsch).
QuadratureRule gauss_hermite(int n);

/// Ordinary least-squares line fit y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lvr
