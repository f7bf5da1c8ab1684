#include "lvr/scalar_maps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lvr/quadrature.hpp"

namespace lvr {

namespace {

constexpr double kSqrtBranchTolerance = 1e-12;

Complex principal_sqrt(Complex w) {
  if (w.real() < 0.0 && std::abs(w.imag()) <= kSqrtBranchTolerance * std::abs(w)) {
    std::ostringstream msg;
    msg << "square-root argument " << w << " lies on the negative real axis";
    throw NumericError(ErrorKind::BranchViolation, msg.str());
  }
  return std::sqrt(w);
}

Complex fc_argument(const Coupling& c, Complex u) { return -c.lambda() * ipow(u, 2 * c.p() - 2); }

HValue h_from_t(int p, Complex u, Complex w, Complex t) {
  const Complex f = principal_sqrt(t);
  if (w == 0.0) return {u * f, f};
  const Complex e = fc::fc_log_deriv_from_value(p, w, t);
  return {u * f, f * (1.0 + (p - 1.0) * w * e)};
}

}  // namespace

Coupling::Coupling(Complex lambda, int p, double epsilon, double eta)
    : lambda_(lambda), p_(p), epsilon_(epsilon), eta_(eta) {
  if (p < 2) throw NumericError(ErrorKind::InvalidArgument, "p must be >= 2");
  if (!(epsilon > 0.0 && epsilon < kPi)) throw NumericError(ErrorKind::InvalidArgument, "epsilon must lie in (0, pi)");
  if (!(eta > 0.0)) throw NumericError(ErrorKind::InvalidArgument, "eta must be positive");
  if (lambda == 0.0) return;
  if (std::abs(lambda) > eta * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "|lambda| = " << std::abs(lambda) << " exceeds the pacman radius eta = " << eta;
    throw NumericError(ErrorKind::InvalidArgument, msg.str());
  }
  if (std::abs(std::arg(lambda)) > kPi - epsilon + 1e-12) {
    std::ostringstream msg;
    msg << "|arg lambda| = " << std::abs(std::arg(lambda)) << " exceeds pi - epsilon";
    throw NumericError(ErrorKind::InvalidArgument, msg.str());
  }
}

Complex eval_map(MapKind kind, const Coupling& c, Complex u) {
  if (c.is_zero()) {
    switch (kind) {
      case MapKind::f: return 1.0;
      case MapKind::g: return 0.0;
      default: return u;
    }
  }
  const int p = c.p();
  switch (kind) {
    case MapKind::k: return u * principal_sqrt(1.0 + c.lambda() * ipow(u, 2 * p - 2));
    case MapKind::f: return principal_sqrt(fc::fc_eval(c.fc_params(), fc_argument(c, u)));
    case MapKind::h: return u * principal_sqrt(fc::fc_eval(c.fc_params(), fc_argument(c, u)));
    case MapKind::g: {
      // T - 1 = w T^p, so sqrt(T) - 1 = w T^p / (sqrt(T) + 1) without cancellation.
      const Complex w = fc_argument(c, u);
      const Complex t = fc::fc_eval(c.fc_params(), w);
      return u * w * ipow(t, p) / (principal_sqrt(t) + 1.0);
    }
  }
  return 0.0;
}

HValue eval_h_with_derivative(const Coupling& c, Complex u) {
  if (c.is_zero()) return {u, 1.0};
  const Complex w = fc_argument(c, u);
  return h_from_t(c.p(), u, w, fc::fc_eval(c.fc_params(), w));
}

Complex eval_h_prime(const Coupling& c, Complex u) { return eval_h_with_derivative(c, u).dh; }

Complex eval_e(const Coupling& c, Complex t, Complex u) {
  const Complex w = -t * ipow(u, 2 * c.p() - 2);
  return fc::fc_log_deriv(c.fc_params(), w);
}

Complex g_integral_rep(const Coupling& c, Complex u, int t_nodes) {
  if (c.is_zero()) return 0.0;
  const int p = c.p();
  const auto rule = gauss_legendre(t_nodes);
  const Complex upow = ipow(u, 2 * p - 2);
  Complex sum{0.0};
  for (int k = 0; k < t_nodes; ++k) {
    const Complex t = c.lambda() * (0.5 * (rule.nodes[k] + 1.0));
    const Complex w = -t * upow;
    Complex tv;
    try {
      tv = fc::fc_eval(c.fc_params(), w);
    } catch (const NumericError& e) {
      if (e.kind() != ErrorKind::CutProximity) throw;
      std::ostringstream msg;
      msg << "t-segment node " << t << " puts -t u^(2p-2) on the cut for u=" << u;
      throw NumericError(ErrorKind::CutCrossing, msg.str());
    }
    const Complex e = fc::fc_log_deriv_from_value(p, w, tv);
    sum += 0.5 * rule.weights[k] * e * principal_sqrt(tv);
  }
  return -0.5 * c.lambda() * ipow(u, 2 * p - 1) * sum;
}

double inverse_residual(const Coupling& c, Complex z) {
  if (c.is_zero()) return 0.0;
  const Complex hk = eval_map(MapKind::h, c, eval_map(MapKind::k, c, z));
  const Complex kh = eval_map(MapKind::k, c, eval_map(MapKind::h, c, z));
  return std::max(std::abs(hk - z), std::abs(kh - z));
}

std::vector<HValue> eval_h_real_batch(const Coupling& c, std::span<const double> xs) {
  std::vector<HValue> out(xs.size());
  if (c.is_zero()) {
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = {xs[i], 1.0};
    return out;
  }
  const int p = c.p();
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(xs[a]) < std::abs(xs[b]); });
  std::vector<double> radii(xs.size());
  const double mod = std::abs(c.lambda());
  for (std::size_t k = 0; k < order.size(); ++k) radii[k] = mod * std::pow(std::abs(xs[order[k]]), 2 * p - 2);
  const Complex direction = -c.lambda() / mod;
  const auto ts = fc::fc_eval_on_ray(c.fc_params(), direction, radii);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double x = xs[order[k]];
    out[order[k]] = h_from_t(p, x, radii[k] * direction, ts[k]);
  }
  return out;
}

}  // namespace lvr
