#include "lvr/fuss_catalan.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace lvr::fc {

namespace {

constexpr int kSeriesTerms = 40;
constexpr int kStepBudget = 4096;

// c_n = binom(pn, n) / ((p-1)n + 1), via lgamma; only used to seed Newton.
std::vector<double> series_coeffs_double(int p) {
  std::vector<double> c(kSeriesTerms + 1);
  c[0] = 1.0;
  for (int n = 1; n <= kSeriesTerms; ++n) {
    c[n] = std::exp(std::lgamma(p * n + 1.0) - std::lgamma(n + 1.0) - std::lgamma((p - 1.0) * n + 2.0));
  }
  return c;
}

constexpr int kCachedOrders = 32;

const std::vector<double>& cached_series(int p) {
  static const auto table = [] {
    std::array<std::vector<double>, kCachedOrders + 1> t;
    for (int q = 2; q <= kCachedOrders; ++q) t[q] = series_coeffs_double(q);
    return t;
  }();
  return table[p];
}

Complex series_seed(int p, Complex z) {
  std::vector<double> local;
  if (p > kCachedOrders) local = series_coeffs_double(p);
  const auto& c = p > kCachedOrders ? local : cached_series(p);
  Complex acc{0.0};
  for (int n = kSeriesTerms; n >= 0; --n) acc = acc * z + c[n];
  return acc;
}

Complex derivative(int p, Complex z, Complex t) {
  const Complex tp1 = ipow(t, p - 1);
  return tp1 * t / (1.0 - static_cast<double>(p) * z * tp1);
}

// Carries the principal branch from (z0, t0) to z1 along the straight
// segment, with a tangent predictor and Newton corrector. Steps that need a
// large correction are halved; near the branch point this keeps Newton on the
// continued root.
constexpr double kMaxRelativeChange = 0.3;

Complex continue_segment(int p, Complex z0, Complex t0, Complex z1) {
  const double length = std::abs(z1 - z0);
  if (length == 0.0) return t0;
  const Complex dir = (z1 - z0) / length;
  double s = 0.0;
  Complex t = t0;
  double step = std::max(std::abs(z0), 0.25 * branch_point(p));
  step = std::min(step, length);
  for (int count = 0; count < kStepBudget; ++count) {
    const Complex z = z0 + s * dir;
    const double s_next = std::min(s + step, length);
    const Complex z_next = z0 + s_next * dir;
    const Complex t_pred = t + derivative(p, z, t) * (z_next - z);
    Complex t_new = t_pred;
    const bool converged = fc_newton(p, z_next, t_new, 30);
    const double change = std::abs(t_pred - t);
    const double correction = std::abs(t_new - t_pred);
    // Large predicted changes are refused outright: Newton from a far-off
    // predictor can land on another root and still pass the correction test.
    if (converged && std::isfinite(t_new.real()) && change <= kMaxRelativeChange * std::abs(t) &&
        correction <= 0.2 * change + 1e-13 * std::abs(t_new)) {
      s = s_next;
      t = t_new;
      if (s >= length) return t;
      step = std::min(2.0 * step, std::max(std::abs(z_next), 0.25 * branch_point(p)));
    } else {
      step *= 0.5;
      if (step < 1e-15 * (1.0 + std::abs(z))) break;
    }
  }
  std::ostringstream msg;
  msg << "continuation of T_" << p << " to z=" << z1 << " exhausted its step budget";
  throw NumericError(ErrorKind::NonConvergence, msg.str());
}

void check_cut(int p, Complex z) {
  if (distance_to_cut(p, z) < kCutTolerance) {
    std::ostringstream msg;
    msg << "z=" << z << " is within " << kCutTolerance << " of the cut [" << branch_point(p) << ", inf)";
    throw NumericError(ErrorKind::CutProximity, msg.str());
  }
}

}  // namespace

FussCatalanParams::FussCatalanParams(int p) : p_(p) {
  if (p < 2) throw NumericError(ErrorKind::InvalidArgument, "Fuss-Catalan order p must be >= 2");
}

double branch_point(int p) { return std::pow(p - 1.0, p - 1.0) / std::pow(static_cast<double>(p), p); }

CutGeometry cut_geometry(const FussCatalanParams& params, Complex lambda) {
  const int p = params.p();
  CutGeometry geo;
  geo.branch_point = branch_point(p);
  if (lambda == 0.0) return geo;
  for (int k = -p + 2; k <= p - 1; ++k) {
    geo.ray_angles.push_back((kPi - std::arg(lambda)) / (2.0 * p - 2.0) + k * kPi / (p - 1.0));
  }
  geo.ray_start_radius = std::pow(std::abs(lambda), -1.0 / (2.0 * p - 2.0)) * std::sqrt(p - 1.0) /
                         std::pow(static_cast<double>(p), p / (2.0 * p - 2.0));
  return geo;
}

std::vector<boost::multiprecision::cpp_int> fc_series_coeffs(const FussCatalanParams& params, int n_max) {
  using boost::multiprecision::cpp_int;
  if (n_max < 0) throw NumericError(ErrorKind::InvalidArgument, "n_max must be >= 0");
  const int p = params.p();
  const std::size_t len = static_cast<std::size_t>(n_max) + 1;
  std::vector<cpp_int> t(len, 0);
  t[0] = 1;
  // Each pass fixes one more coefficient.
  for (int pass = 0; pass < n_max; ++pass) {
    std::vector<cpp_int> power(len, 0);
    power[0] = 1;
    for (int k = 0; k < p; ++k) {
      std::vector<cpp_int> next(len, 0);
      for (std::size_t i = 0; i < len; ++i) {
        if (power[i] == 0) continue;
        for (std::size_t j = 0; i + j < len; ++j) next[i + j] += power[i] * t[j];
      }
      power = std::move(next);
    }
    std::vector<cpp_int> updated(len, 0);
    updated[0] = 1;
    for (std::size_t i = 1; i < len; ++i) updated[i] = power[i - 1];
    t = std::move(updated);
  }
  return t;
}

bool fc_newton(int p, Complex z, Complex& t, int max_iter) {
  for (int iter = 0; iter < max_iter; ++iter) {
    const Complex tp1 = ipow(t, p - 1);
    const Complex f = z * tp1 * t - t + 1.0;
    const Complex df = static_cast<double>(p) * z * tp1 - 1.0;
    if (df == 0.0) return false;
    const Complex dt = f / df;
    t -= dt;
    if (!std::isfinite(t.real()) || !std::isfinite(t.imag())) return false;
    if (std::abs(dt) <= 4e-16 * std::abs(t)) return true;
  }
  return false;
}

double distance_to_cut(int p, Complex z) {
  const double b = branch_point(p);
  if (z.real() >= b) return std::abs(z.imag());
  return std::abs(z - b);
}

Complex fc_eval(const FussCatalanParams& params, Complex z) {
  const int p = params.p();
  if (z == 0.0) return 1.0;
  check_cut(p, z);
  const double b = branch_point(p);
  const double r = std::abs(z);
  if (r <= 0.5 * b) {
    Complex t = series_seed(p, z);
    if (!fc_newton(p, z, t)) throw NumericError(ErrorKind::NonConvergence, "Newton failed inside the series disk");
    return t;
  }
  const Complex z0 = z * (0.5 * b / r);
  Complex t0 = series_seed(p, z0);
  fc_newton(p, z0, t0);
  return continue_segment(p, z0, t0, z);
}

Complex fc_log_deriv_from_value(int p, Complex z, Complex t) {
  const Complex tp1 = ipow(t, p - 1);
  const Complex denom = 1.0 - static_cast<double>(p) * z * tp1;
  if (std::abs(z - branch_point(p)) < kBranchPointTolerance || std::abs(denom) < 1e-6) {
    std::ostringstream msg;
    msg << "z=" << z << " too close to the branch point " << branch_point(p);
    throw NumericError(ErrorKind::BranchPointProximity, msg.str());
  }
  return tp1 / denom;
}

Complex fc_log_deriv(const FussCatalanParams& params, Complex z) {
  return fc_log_deriv_from_value(params.p(), z, fc_eval(params, z));
}

double fc_cut_distance(const FussCatalanParams& params, Complex lambda, Complex u) {
  if (lambda == 0.0) throw NumericError(ErrorKind::InvalidArgument, "cut distance needs lambda != 0");
  const auto geo = cut_geometry(params, lambda);
  double best = std::numeric_limits<double>::infinity();
  for (double theta : geo.ray_angles) {
    const Complex rotated = u * std::polar(1.0, -theta);
    const double d = rotated.real() <= geo.ray_start_radius ? std::abs(rotated - geo.ray_start_radius)
                                                            : std::abs(rotated.imag());
    best = std::min(best, d);
  }
  return best;
}

std::vector<Complex> fc_eval_on_ray(const FussCatalanParams& params, Complex direction,
                                    std::span<const double> radii) {
  const int p = params.p();
  direction /= std::abs(direction);
  std::vector<Complex> out(radii.size());
  if (radii.empty()) return out;
  Complex z_prev = 0.0;
  Complex t_prev = 1.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (k > 0 && radii[k] < radii[k - 1]) throw NumericError(ErrorKind::InvalidArgument, "radii must ascend");
    const Complex z = radii[k] * direction;
    if (z == z_prev) {
      out[k] = t_prev;
      continue;
    }
    check_cut(p, z);
    Complex t = t_prev + derivative(p, z_prev, t_prev) * (z - z_prev);
    // A cheap single-shot corrector is tried first; fall back to the stepped
    // continuation when the correction is not small.
    const Complex pred = t;
    if (!(std::abs(pred - t_prev) <= kMaxRelativeChange * std::abs(t_prev) && fc_newton(p, z, t, 30) &&
          std::abs(t - pred) <= 0.2 * std::abs(pred - t_prev) + 1e-13 * std::abs(t))) {
      t = (z_prev == 0.0) ? fc_eval(params, z) : continue_segment(p, z_prev, t_prev, z);
    }
    out[k] = t;
    z_prev = z;
    t_prev = t;
  }
  return out;
}

}  // namespace lvr::fc
