#include "lvr/lvr_action.hpp"

#include <cmath>
#include <sstream>

namespace lvr {

namespace {

std::vector<double> eigen_list(const SpectralData& s) {
  return std::vector<double>(s.eigenvalues.data(), s.eigenvalues.data() + s.eigenvalues.size());
}

MatrixC divided_from_values(std::span<const double> kappa, const std::vector<HValue>& hv) {
  const auto n = static_cast<Eigen::Index>(kappa.size());
  MatrixC d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = hv[i].dh;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double gap = kappa[i] - kappa[j];
      d(i, j) = std::abs(gap) < kCoincidenceThreshold ? 0.5 * (hv[i].dh + hv[j].dh) : (hv[i].h - hv[j].h) / gap;
      d(j, i) = d(i, j);
    }
  }
  return d;
}

// Sum of the log terms of the action for a given divided-difference matrix:
// single = (1 - beta/2) sum log D_ii, double = (beta/2) sum_{i,j} log D_ij.
ActionValue assemble(const MatrixC& d, int beta) {
  Complex diag{0.0}, off{0.0};
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    diag += std::log(d(i, i));
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) off += std::log(d(i, j));
  }
  ActionValue a;
  a.single_trace_part = (1.0 - beta / 2.0) * diag;
  a.double_trace_part = (beta / 2.0) * (diag + 2.0 * off);
  a.total = a.single_trace_part + a.double_trace_part;
  return a;
}

void track_branches(const Coupling& c, std::span<const double> kappa, const MatrixC& final_d, int steps) {
  const double mod = std::abs(c.lambda());
  const double arg = std::arg(c.lambda());
  const auto n = final_d.rows();
  // at t = 0 lambda is real positive and every D_ij is positive
  MatrixR unwrapped = MatrixR::Zero(n, n);
  MatrixC prev = divided_from_values(kappa, eval_h_real_batch(c.with_lambda(mod), kappa));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) unwrapped(i, j) = std::arg(prev(i, j));
  for (int k = 1; k <= steps; ++k) {
    const Complex lam = std::polar(mod, arg * k / steps);
    const MatrixC cur = k == steps ? final_d : divided_from_values(kappa, eval_h_real_batch(c.with_lambda(lam), kappa));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        const double step = std::arg(cur(i, j) / prev(i, j));
        if (std::abs(step) > kPi / 2) {
          std::ostringstream msg;
          msg << "log term (" << i << "," << j << ") jumps by " << step << " between arc steps";
          throw NumericError(ErrorKind::LogBranchAmbiguity, msg.str());
        }
        unwrapped(i, j) += step;
      }
    }
    prev = cur;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      if (std::abs(unwrapped(i, j) - std::arg(final_d(i, j))) > 1.0) {
        std::ostringstream msg;
        msg << "log term (" << i << "," << j << ") winds around the origin along the arg-lambda arc";
        throw NumericError(ErrorKind::LogBranchAmbiguity, msg.str());
      }
    }
  }
}

// 1/(u_k - kappa_i) for every node and eigenvalue.
std::vector<std::vector<Complex>> node_reciprocals(const KeyholeContour& gamma, const SpectralData& s) {
  std::vector<std::vector<Complex>> inv(s.dim(), std::vector<Complex>(gamma.nodes.size()));
  for (int i = 0; i < s.dim(); ++i) {
    for (std::size_t k = 0; k < gamma.nodes.size(); ++k) {
      const Complex d = gamma.nodes[k].u - s.eigenvalues[i];
      inv[i][k] = std::conj(d) / std::norm(d);
    }
  }
  return inv;
}

void require_matching_contour(const Coupling& c, const KeyholeContour& gamma, const SpectralData& s,
                              const std::vector<std::vector<Complex>>& inv) {
  if (gamma.coupling().lambda() != c.lambda() || gamma.coupling().p() != c.p()) {
    throw NumericError(ErrorKind::InvalidArgument, "contour was built for a different coupling");
  }
  for (int i = 0; i < s.dim(); ++i) {
    const double mu = s.eigenvalues[i];
    if (std::abs(mu) > gamma.R / 2.0) {
      std::ostringstream msg;
      msg << "eigenvalue " << mu << " outside the contour range R/2 = " << gamma.R / 2.0;
      throw NumericError(ErrorKind::SpectrumTooLarge, msg.str());
    }
    Complex cauchy{0.0};
    for (std::size_t k = 0; k < gamma.nodes.size(); ++k) cauchy += gamma.nodes[k].du * inv[i][k];
    cauchy /= 2.0 * kPi * kI;
    if (!(std::abs(cauchy - 1.0) <= 1e-8)) throw NumericError(ErrorKind::QuadratureDivergence, "Cauchy self-test failed at an eigenvalue");
  }
}

MatrixC sigma_from(const KeyholeContour& gamma, const std::vector<std::vector<Complex>>& inv) {
  const auto n = static_cast<Eigen::Index>(inv.size());
  const auto& gw = gamma.g_weights();
  MatrixC sigma(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      Complex sum{0.0};
      for (std::size_t k = 0; k < gw.size(); ++k) sum += gw[k] * inv[i][k] * inv[j][k];
      sigma(i, j) = sum;
      sigma(j, i) = sum;
    }
  }
  return sigma;
}

}  // namespace

MatrixC divided_differences(const Coupling& c, std::span<const double> kappa) {
  return divided_from_values(kappa, eval_h_real_batch(c, kappa));
}

ActionValue action_S(const Coupling& c, int beta, std::span<const double> kappa, const ActionOptions& opt) {
  if (beta != 1 && beta != 2) throw NumericError(ErrorKind::InvalidArgument, "beta must be 1 or 2");
  if (c.is_zero()) return {0.0, 0.0, 0.0};
  const MatrixC d = divided_differences(c, kappa);
  if (opt.track_branch && c.lambda().imag() != 0.0) track_branches(c, kappa, d, opt.branch_steps);
  return assemble(d, beta);
}

ActionValue action_S(const Coupling& c, const EnsembleSpec& spec, const SpectralData& s, const ActionOptions& opt) {
  const auto kappa = eigen_list(s);
  return action_S(c, spec.beta, kappa, opt);
}

ActionSplit action_split(const Coupling& c, const SpectralData& s) {
  if (c.is_zero()) return {0.0, 0.0};
  const auto kappa = eigen_list(s);
  const int n = s.dim();
  Complex s1{0.0};
  for (double k : kappa) s1 += std::log(fc::fc_eval(c.fc_params(), -c.lambda() * ipow(k, 2 * c.p() - 2)));
  s1 *= n / 2.0;
  const ActionValue total = action_S(c, 2, kappa);
  return {s1, total.total - s1};
}

ResolventEntries resolvent_entries(const Coupling& c, const SpectralData& s) {
  const int n = s.dim();
  const auto kappa = eigen_list(s);
  ResolventEntries out;
  out.values = divided_differences(c, kappa).cwiseInverse();
  out.lambda_bounds.resize(n, n);
  const double scale = std::pow(std::abs(c.lambda()), 1.0 / (2.0 * c.p()));
  const double expo = 1.0 - 1.0 / c.p();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double bi = scale * std::pow(std::abs(kappa[i]), expo);
      const double bj = scale * std::pow(std::abs(kappa[j]), expo);
      out.lambda_bounds(i, j) = std::max({1.0, bi, bj});
      out.bound_ratio = std::max(out.bound_ratio, std::abs(out.values(i, j)) / out.lambda_bounds(i, j));
    }
  }
  return out;
}

MatrixC corner_operator(const ResolventEntries& res, const SpectralData& s, Complex u_k, Complex u_k1) {
  const int n = s.dim();
  std::vector<Complex> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    const double mu = s.eigenvalues[i];
    if (std::abs(u_k - mu) < 1e-12 || std::abs(u_k1 - mu) < 1e-12) {
      throw NumericError(ErrorKind::PoleCollision, "corner insertion point coincides with an eigenvalue");
    }
    a[i] = 1.0 / (u_k - mu);
    b[i] = 1.0 / (u_k1 - mu);
  }
  MatrixC o(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) o(i, j) = res.values(i, j) * a[i] * a[j] * (b[i] + b[j]);
  return o;
}

MatrixC corner_operator(const Coupling& c, const SpectralData& s, Complex u_k, Complex u_k1) {
  return corner_operator(resolvent_entries(c, s), s, u_k, u_k1);
}

double derivative_corner_norm(const SpectralData& s, Complex u) {
  double best = 0.0;
  for (int i = 0; i < s.dim(); ++i)
    for (int j = 0; j < s.dim(); ++j)
      best = std::max(best, std::abs(1.0 / (u - s.eigenvalues[i]) + 1.0 / (u - s.eigenvalues[j])));
  return best;
}

MatrixC sigma_contour(const Coupling& c, const KeyholeContour& gamma, const SpectralData& s) {
  const int n = s.dim();
  if (c.is_zero()) return MatrixC::Zero(n, n);
  const auto inv = node_reciprocals(gamma, s);
  require_matching_contour(c, gamma, s, inv);
  return sigma_from(gamma, inv);
}

MatrixC action_gradient(const Coupling& c, const EnsembleSpec& spec, const SpectralData& s, const KeyholeContour& gamma) {
  const int n = s.dim();
  if (c.is_zero()) return MatrixC::Zero(n, n);
  const auto inv = node_reciprocals(gamma, s);
  require_matching_contour(c, gamma, s, inv);
  const MatrixC resolvent = (MatrixC::Ones(n, n) + sigma_from(gamma, inv)).cwiseInverse();
  const auto& gw = gamma.g_weights();
  const int beta = spec.beta;
  std::vector<Complex> f(n, 0.0);
  std::vector<Complex> sq(gw.size());
  for (int i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < gw.size(); ++k) sq[k] = gw[k] * inv[i][k] * inv[i][k];
    for (int j = 0; j < n; ++j) {
      Complex d2{0.0};
      for (std::size_t k = 0; k < gw.size(); ++k) d2 += sq[k] * inv[j][k];
      f[i] += static_cast<double>(beta) * resolvent(i, j) * d2;
    }
    if (beta != 2) {
      Complex d3{0.0};
      for (std::size_t k = 0; k < gw.size(); ++k) d3 += sq[k] * inv[i][k];
      f[i] += (2.0 - beta) * resolvent(i, i) * d3;
    }
  }
  return s.reconstruct(f);
}

MatrixC action_gradient(const Coupling& c, const EnsembleSpec& spec, const SpectralData& s) {
  if (c.is_zero()) return MatrixC::Zero(s.dim(), s.dim());
  return action_gradient(c, spec, s, build_keyhole(s.spectral_radius(), c));
}

JacobianReport jacobian_check(int p, double lambda_pos, std::span<const double> eigs) {
  if (!(lambda_pos > 0.0)) throw NumericError(ErrorKind::InvalidArgument, "jacobian_check needs lambda > 0");
  const fc::FussCatalanParams params(p);
  const int n = static_cast<int>(eigs.size());
  std::vector<double> t(n), f(n), h(n), a(n);
  for (int i = 0; i < n; ++i) {
    t[i] = fc::fc_eval(params, -lambda_pos * std::pow(eigs[i], 2 * p - 2)).real();
    f[i] = std::sqrt(t[i]);
    h[i] = eigs[i] * f[i];
    a[i] = eigs[i] * eigs[i] * t[i];
  }
  JacobianReport report;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      JacobianFactor fac;
      fac.i = i;
      fac.j = j;
      const double si = eigs[i], sj = eigs[j];
      fac.mixed_sign = (si < 0.0 && sj > 0.0) || (si > 0.0 && sj < 0.0);
      if (fac.mixed_sign) {
        fac.ratio = (h[i] - h[j]) / (si - sj);
        fac.positive = fac.ratio > 0.0;
      } else {
        double poly = 0.0;
        for (int k = 0; k < p; ++k) poly += std::pow(a[i], k) * std::pow(a[j], p - 1 - k);
        fac.poly_factor = 1.0 / (1.0 + lambda_pos * poly);
        fac.sum_factor = (si + sj == 0.0) ? 1.0 / f[i] : (si + sj) / (h[i] + h[j]);
        fac.ratio = fac.poly_factor * fac.sum_factor;
        fac.positive = fac.poly_factor > 0.0 && fac.sum_factor > 0.0;
      }
      report.overall_positive = report.overall_positive && fac.positive;
      report.factor_list.push_back(fac);
    }
  }
  return report;
}

}  // namespace lvr
