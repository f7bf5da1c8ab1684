#include "lvr/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "lvr/common.hpp"

namespace lvr {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CutProximity: return "CutProximity";
    case ErrorKind::BranchPointProximity: return "BranchPointProximity";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::BranchViolation: return "BranchViolation";
    case ErrorKind::CutCrossing: return "CutCrossing";
    case ErrorKind::CutCollision: return "CutCollision";
    case ErrorKind::SpectrumTooLarge: return "SpectrumTooLarge";
    case ErrorKind::QuadratureDivergence: return "QuadratureDivergence";
    case ErrorKind::NonHermitian: return "NonHermitian";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::LogBranchAmbiguity: return "LogBranchAmbiguity";
    case ErrorKind::PoleCollision: return "PoleCollision";
    case ErrorKind::VarianceBlowup: return "VarianceBlowup";
    case ErrorKind::QuadratureUnderResolved: return "QuadratureUnderResolved";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::StepInstability: return "StepInstability";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw NumericError(ErrorKind::InvalidArgument, "gauss_legendre needs n >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Returns (P_n(x), P_n'(x)) by the three-term recurrence.
  auto legendre = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw NumericError(ErrorKind::InvalidArgument, "gauss_hermite needs n >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

  // Orthonormal Hermite recurrence at x, rescaled to stay finite: returns
  // p_n / p_{n-1} and log of 1 / sum_{k<n} p_k^2 (the Christoffel weight).
  auto recurrence = [n](double x) {
    double prev = 0.0, cur = std::pow(kPi, -0.25), sum = 0.0, log_scale = 0.0;
    for (int k = 0; k < n; ++k) {
      sum += cur * cur;
      const double next = x * std::sqrt(2.0 / (k + 1)) * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
      prev = cur;
      cur = next;
      if (std::abs(cur) > 1e150) {
        cur *= 1e-150;
        prev *= 1e-150;
        sum *= 1e-300;
        log_scale += 150.0 * std::log(10.0);
      }
    }
    return std::pair{cur / prev, -std::log(sum) - 2.0 * log_scale};
  };

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    double x = solver.eigenvalues()[k];
    for (int iter = 0; iter < 3; ++iter) x -= recurrence(x).first / std::sqrt(2.0 * n);
    rule.nodes[k] = x;
    rule.weights[k] = std::exp(recurrence(x).second);
  }
  // Symmetrize away round-off so odd moments vanish to machine precision.
  for (int k = 0; k < n / 2; ++k) {
    const double x = 0.5 * (rule.nodes[n - 1 - k] - rule.nodes[k]);
    const double w = 0.5 * (rule.weights[n - 1 - k] + rule.weights[k]);
    rule.nodes[k] = -x;
    rule.nodes[n - 1 - k] = x;
    rule.weights[k] = rule.weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw NumericError(ErrorKind::InvalidArgument, "fit_line needs >= 2 points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_stderr = std::sqrt(rss / (n - 2) / sxx);
  }
  return fit;
}

}  // namespace lvr
