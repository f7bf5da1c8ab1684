#pragma once

#include <span>
#include <vector>

#include "lvr/common.hpp"
#include "lvr/fuss_catalan.hpp"

namespace lvr {

/// Complex coupling lambda in the pacman domain
/// {0 < |lambda| <= eta, |arg lambda| <= pi - epsilon}, together with the
/// interaction half-order p. lambda = 0 is accepted and makes every map the
/// identity.
class Coupling {
 public:
  Coupling(Complex lambda, int p, double epsilon = 0.1, double eta = 1.0);

  static Coupling from_polar(double modulus, double arg, int p, double epsilon = 0.1, double eta = 1.0) {
    return Coupling(std::polar(modulus, arg), p, epsilon, eta);
  }

  Complex lambda() const noexcept { return lambda_; }
  int p() const noexcept { return p_; }
  double epsilon() const noexcept { return epsilon_; }
  double eta() const noexcept { return eta_; }
  bool is_zero() const noexcept { return lambda_ == 0.0; }
  fc::FussCatalanParams fc_params() const { return fc::FussCatalanParams(p_); }

  /// Same epsilon, eta and p with a different coupling value.
  Coupling with_lambda(Complex lambda) const { return Coupling(lambda, p_, epsilon_, eta_); }

 private:
  Complex lambda_;
  int p_;
  double epsilon_;
  double eta_;
};

enum class MapKind { f, h, k, g };

/// f(u) = sqrt(T_p(-lambda u^(2p-2))), h = u f, k(u) = u sqrt(1 + lambda u^(2p-2)),
/// g = h - u. Principal square roots throughout.
Complex eval_map(MapKind kind, const Coupling& c, Complex u);

/// h'(u) = f(u) (1 + (p-1) w E_p(w)) with w = -lambda u^(2p-2).
Complex eval_h_prime(const Coupling& c, Complex u);

/// e_t(u) = E_p(-t u^(2p-2)).
Complex eval_e(const Coupling& c, Complex t, Complex u);

/// g_lambda(u) = -1/2 int_0^lambda dt u^(2p-1) e_t(u) f_t(u) along the straight
/// segment [0, lambda], Gauss-Legendre with t_nodes nodes.
Complex g_integral_rep(const Coupling& c, Complex u, int t_nodes);

/// max(|h(k(z)) - z|, |k(h(z)) - z|).
double inverse_residual(const Coupling& c, Complex z);

/// h and h' at one point.
struct HValue {
  Complex h;
  Complex dh;
};

/// h and h' at many real points; points are swept along the single ray of
/// T_p arguments -lambda x^(2p-2) in order of |x|.
std::vector<HValue> eval_h_real_batch(const Coupling& c, std::span<const double> xs);

HValue eval_h_with_derivative(const Coupling& c, Complex u);

}  // namespace lvr
