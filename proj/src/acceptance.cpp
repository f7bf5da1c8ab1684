#include "lvr/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>

#include "lvr/bounds.hpp"
#include "lvr/contour.hpp"
#include "lvr/fuss_catalan.hpp"
#include "lvr/lve_expansion.hpp"
#include "lvr/lvr_action.hpp"
#include "lvr/partition_oracle.hpp"
#include "lvr/quadrature.hpp"

namespace lvr {

namespace {

struct Outcome {
  bool passed = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& line) {
    passed = passed && ok;
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + line);
  }
  void note(const std::string& line) { details.push_back("     " + line); }
};

template <typename... Args>
std::string fmt(Args&&... args) {
  std::ostringstream out;
  out << std::setprecision(4);
  (out << ... << args);
  return out.str();
}

// Hermitian matrix with prescribed spectrum and a random eigenbasis.
MatrixC with_spectrum(const std::vector<double>& eigs, int beta, RngStream& rng) {
  const int n = static_cast<int>(eigs.size());
  const auto basis = eigh(sample_gaussian(EnsembleSpec(n, beta), rng)).eigenvectors;
  MatrixC d = MatrixC::Zero(n, n);
  for (int i = 0; i < n; ++i) d(i, i) = eigs[i];
  return basis * d * basis.adjoint();
}

// Real coordinates in hermitian_basis order.
std::vector<double> coordinates(const MatrixC& m, int beta) {
  const int n = static_cast<int>(m.rows());
  std::vector<double> c;
  for (int i = 0; i < n; ++i) c.push_back(m(i, i).real());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      c.push_back(m(i, j).real());
      if (beta == 2) c.push_back(m(i, j).imag());
    }
  }
  return c;
}

MatrixC apply_h(const Coupling& c, const MatrixC& k) {
  const auto s = eigh(HermitianMatrix(k));
  std::vector<Complex> hv;
  for (int i = 0; i < s.dim(); ++i) hv.push_back(eval_map(MapKind::h, c, s.eigenvalues[i]));
  return s.reconstruct(hv);
}

Outcome fuss_catalan_correctness() {
  Outcome out;
  for (int p = 2; p <= 6; ++p) {
    const fc::FussCatalanParams params(p);
    double worst = 0.0, worst_closed = 0.0;
    int points = 0;
    for (int i = 0; i < 100; ++i) {
      const double r = std::pow(10.0, -3.0 + 6.0 * i / 99.0);
      for (int j = 0; j < 100; ++j) {
        const Complex z = std::polar(r, -kPi + 2 * kPi * (j + 0.5) / 100);
        const Complex t = fc::fc_eval(params, z);
        worst = std::max(worst, std::abs(z * ipow(t, p) - t + 1.0));
        if (p == 2) worst_closed = std::max(worst_closed, std::abs(t - 2.0 / (1.0 + std::sqrt(1.0 - 4.0 * z))));
        ++points;
      }
    }
    out.require(worst <= 1e-10, fmt("p=", p, ": max residual ", worst, " over ", points, " points (<= 1e-10)"));
    if (p == 2) out.require(worst_closed <= 1e-10, fmt("p=2: max |T - closed form| ", worst_closed, " (<= 1e-10)"));
  }
  return out;
}

Outcome inverse_identity() {
  Outcome out;
  const std::vector<double> moduli{1e-3, 1e-2, 1e-1};
  for (int p = 2; p <= 5; ++p) {
    double worst = 0.0, smallest_radius = 2.0;
    long points = 0, on_cut = 0;
    for (double mod : moduli) {
      // p = 2: the full |z| <= 2 disk. p >= 3: k itself branches at
      // |z| = |lambda|^(-1/(2p-2)), so the disk is cut to half that radius.
      const double radius = p == 2 ? 2.0 : std::min(2.0, 0.5 * std::pow(mod, -1.0 / (2 * p - 2)));
      smallest_radius = std::min(smallest_radius, radius);
      for (double arg : pacman_args(0.1)) {
        const Coupling c = Coupling::from_polar(mod, arg, p, 0.1);
        for (int i = -30; i <= 30; ++i) {
          for (int j = -30; j <= 30; ++j) {
            const Complex z(radius * i / 30.0, radius * j / 30.0);
            if (std::abs(z) > radius) continue;
            try {
              worst = std::max(worst, inverse_residual(c, z));
              ++points;
            } catch (const NumericError&) {
              ++on_cut;  // z on a cut ray of h or k
            }
          }
        }
      }
    }
    out.require(worst <= 1e-9, fmt("p=", p, ": max inverse residual ", worst, " over ", points, " points, ", on_cut,
                                   " on cuts, radius >= ", smallest_radius, " (<= 1e-9)"));
  }
  return out;
}

Outcome holomorphic_calculus() {
  Outcome out;
  auto rng = derive_stream(303, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto args = pacman_args(0.1);
  double cauchy = 0.0, monomial = 0.0, sigma = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 3;
    const double mod = 0.01 + 0.19 * unif(rng);
    const Coupling c = Coupling::from_polar(mod, args[trial % args.size()], 2 + trial % 2, 0.1);
    std::vector<double> eigs(n);
    for (auto& e : eigs) e = -2.0 + 4.0 * unif(rng);
    std::sort(eigs.begin(), eigs.end());
    const auto s = SpectralData::diagonal(eigs);
    const auto gamma = build_keyhole(s.spectral_radius(), c);
    for (double mu : eigs) cauchy = std::max(cauchy, std::abs(gamma.cauchy(mu) - 1.0));
    for (Complex a : {Complex(gamma.R + 1.0), Complex(0.0, 1.5 * gamma.R), Complex(-1.3 * gamma.R, 0.2)})
      cauchy = std::max(cauchy, std::abs(gamma.cauchy(a)));

    const MatrixC k = with_spectrum(eigs, 2, rng);
    const auto sk = eigh(HermitianMatrix(k));
    const MatrixC cube = holo_apply([](Complex u) { return u * u * u; }, gamma, sk);
    const MatrixC k3 = k * k * k;
    monomial = std::max(monomial, (cube - k3).norm() / std::max(1.0, k3.norm()));

    // divided differences of g from the scalar map alone
    const MatrixC sig = sigma_contour(c, gamma, s);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Complex direct = std::abs(eigs[i] - eigs[j]) < 1e-9
                                   ? eval_h_prime(c, eigs[i]) - 1.0
                                   : (eval_map(MapKind::g, c, eigs[i]) - eval_map(MapKind::g, c, eigs[j])) / (eigs[i] - eigs[j]);
        sigma = std::max(sigma, std::abs(sig(i, j) - direct));
      }
    }
  }
  out.require(cauchy <= 1e-8, fmt("Cauchy identity max error ", cauchy, " (<= 1e-8)"));
  out.require(monomial <= 1e-8, fmt("u^3 reproduction max relative error ", monomial, " (<= 1e-8)"));
  out.require(sigma <= 1e-6, fmt("sigma_contour vs divided differences of g, max error ", sigma, " over 100 spectra (<= 1e-6)"));
  return out;
}

Outcome jacobian_identity() {
  Outcome out;
  auto rng = derive_stream(404, 0);
  double worst = 0.0;
  int cases = 0;
  for (int p : {2, 3}) {
    for (int beta : {1, 2}) {
      for (int n = 1; n <= 3; ++n) {
        for (double lam : {0.01, 0.1, 0.2}) {
          const Coupling c(lam, p);
          const auto k = sample_gaussian(EnsembleSpec(n, beta), rng).entries();
          const auto basis = hermitian_basis(n, beta);
          const int d = static_cast<int>(basis.size());
          const double step = 1e-5;
          Eigen::MatrixXd jac(d, d);
          for (int b = 0; b < d; ++b) {
            const auto plus = coordinates(apply_h(c, k + step * basis[b]), beta);
            const auto minus = coordinates(apply_h(c, k - step * basis[b]), beta);
            for (int a = 0; a < d; ++a) jac(a, b) = (plus[a] - minus[a]) / (2 * step);
          }
          const double det = jac.determinant();
          const auto s = action_S(c, EnsembleSpec(n, beta), eigh(HermitianMatrix(k)));
          worst = std::max(worst, std::abs(std::exp(s.total) - det) / std::abs(det));
          ++cases;
        }
      }
    }
  }
  out.require(worst <= 1e-5, fmt("max relative |exp S - det| ", worst, " over ", cases, " cases (<= 1e-5)"));
  return out;
}

Outcome positivity() {
  Outcome out;
  auto rng = derive_stream(505, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  long failures = 0, factors = 0;
  for (long k = 0; k < 100000; ++k) {
    const int p = 2 + static_cast<int>(k % 4);
    const double lam = std::pow(10.0, -3.0 + 4.0 * unif(rng));
    double si = std::pow(10.0, -2.0 + 3.5 * unif(rng)) * (unif(rng) < 0.5 ? -1.0 : 1.0);
    double sj = std::pow(10.0, -2.0 + 3.5 * unif(rng)) * (unif(rng) < 0.5 ? -1.0 : 1.0);
    if (k % 10 == 0) sj = -si;
    const auto report = jacobian_check(p, lam, std::vector<double>{si, sj});
    factors += static_cast<long>(report.factor_list.size());
    if (!report.overall_positive) ++failures;
  }
  out.require(failures == 0, fmt(failures, " non-positive pairs among 100000 (", factors, " factors)"));
  return out;
}

Outcome change_of_variables(int workers) {
  Outcome out;
  double worst = 0.0;
  int cases = 0;
  PartitionOptions opt;
  opt.workers = workers;
  for (int p : {2, 3}) {
    for (int n = 1; n <= 3; ++n) {
      for (int beta : {1, 2}) {
        for (double mod : {0.02, 0.1}) {
          for (double theta : {0.0, 3 * kPi / 4, -3 * kPi / 4}) {
            const Coupling c = Coupling::from_polar(mod, theta, p);
            const EnsembleSpec spec(n, beta);
            const auto direct = z_direct(c, spec, PartitionMethod::quadrature, opt);
            const auto lvr_z = z_lvr(c, spec, PartitionMethod::quadrature, opt);
            worst = std::max(worst, std::abs(direct.value - lvr_z.value) / std::abs(direct.value));
            ++cases;
          }
        }
      }
    }
  }
  out.require(worst <= 1e-4, fmt("quadrature: max |z_lvr - z_direct| / |z_direct| ", worst, " over ", cases, " cases (<= 1e-4)"));
  for (int p : {2, 3}) {
    for (double lam : {0.02, 0.1}) {
      PartitionOptions a = opt, b = opt;
      a.mc_samples = b.mc_samples = 200000;
      a.seed = 11;
      b.seed = 12;
      const auto direct = z_direct(Coupling(lam, p), EnsembleSpec(4, 2), PartitionMethod::monte_carlo, a);
      const auto lvr_z = z_lvr(Coupling(lam, p), EnsembleSpec(4, 2), PartitionMethod::monte_carlo, b);
      const double gap = std::abs(direct.value - lvr_z.value);
      const double combined = std::hypot(direct.error, lvr_z.error);
      out.require(gap <= 3 * combined, fmt("Monte Carlo N=4 p=", p, " lambda=", lam, ": |gap| ", gap, " vs 3 sigma ", 3 * combined));
    }
  }
  return out;
}

Outcome perturbative_slope() {
  Outcome out;
  PartitionOptions opt;
  opt.quad_tolerance = 1e-10;
  for (int p : {2, 3}) {
    for (int n : {1, 2}) {
      for (int beta : {1, 2}) {
        const EnsembleSpec spec(n, beta);
        auto slope = [&](double lam) { return free_energy(Coupling(lam, p), spec, PartitionMethod::quadrature, opt).value.real() / lam; };
        const double s1 = slope(1e-3), s2 = slope(5e-4), s3 = slope(2.5e-4);
        const double r1 = 2 * s2 - s1, r2 = 2 * s3 - s2;
        const double extrapolated = (4 * r2 - r1) / 3;
        const double exact = -gaussian_moment_exact(n, p, beta).convert_to<double>() / n;
        const double rel = std::abs(extrapolated - exact) / std::abs(exact);
        out.require(rel <= 1e-2, fmt("p=", p, " N=", n, " beta=", beta, ": dF/dlambda ", extrapolated, " vs ", exact, " (rel ", rel, ")"));
      }
    }
  }
  return out;
}

Outcome bound_suites(int workers) {
  Outcome out;
  BoundOptions bo;
  bo.workers = workers;
  for (int p : {2, 3}) {
    for (double eps : {0.1, 0.3}) {
      const auto report = verify_bounds(p, eps, 8, bo);
      for (const auto& s : report.suites) {
        out.require(s.holds, fmt("p=", p, " eps=", eps, " ", s.name, ": C = ", s.fitted_constant, ", held-out ratio ", s.holdout_ratio,
                                 " (<= ", kHoldoutFactor, ")"));
      }
      for (const auto& e : report.exponents) {
        if (e.arg != 0.0) continue;
        out.require(e.within_window, fmt("p=", p, " eps=", eps, " ", e.name, " exponent ", e.measured, " vs ", e.predicted, " (+-",
                                         100 * kExponentWindow, "%)"));
      }
      double lo = 1e300, hi = 0.0;
      bool all_window = true;
      for (const auto& e : report.exponents) {
        lo = std::min(lo, e.measured / e.predicted);
        hi = std::max(hi, e.measured / e.predicted);
        all_window = all_window && e.within_window;
      }
      out.require(all_window, fmt("p=", p, " eps=", eps, ": measured / predicted exponents over all args in [", lo, ", ", hi, "]"));
    }
  }
  return out;
}

Outcome pacman_boundedness(int workers) {
  Outcome out;
  for (int p : {2, 3}) {
    const auto scan = pacman_scan(p, 0.1, 0.05, pacman_args(0.1), {1, 2, 3, 4, 5, 6}, 2, 200000, 9, workers);
    for (const auto& row : scan.rows) {
      out.note(fmt("p=", p, " N=", row.N, " arg=", row.arg, " F=", row.F.real(), (row.F.imag() < 0 ? "" : "+"), row.F.imag(), "i  err ",
                   row.error, " ", row.method));
    }
    for (const auto& t : scan.trends) {
      out.require(t.no_growth, fmt("p=", p, " arg=", t.arg, ": slope of |F| vs N ", t.slope, " +- ", t.slope_stderr));
    }
    out.note(fmt("p=", p, ": max |F| = ", scan.max_abs_F));
  }
  return out;
}

Outcome lve_truncation(int workers) {
  Outcome out;
  const EnsembleSpec spec(2, 2);
  AmplitudeParams prm;
  prm.n_w = 2000;
  prm.n_mc = 16;
  prm.seed = 10;
  prm.workers = workers;
  std::vector<double> gaps, errors;
  for (double lam : {0.05, 0.025, 0.0125}) {
    const Coupling c(lam, 2);
    const auto f = free_energy(c, spec, PartitionMethod::quadrature);
    const auto lve = lve_truncated_F(c, spec, 2, prm);
    gaps.push_back(std::abs(f.value - lve.value));
    errors.push_back(std::hypot(f.error, lve.error));
    out.note(fmt("lambda=", lam, ": F=", f.value.real(), " LVE(n<=2)=", lve.value.real(), " gap ", gaps.back(), " error ", errors.back()));
  }
  out.require(gaps[0] > gaps[1] && gaps[1] > gaps[2], fmt("gap decreases monotonically: ", gaps[0], " > ", gaps[1], " > ", gaps[2]));
  out.require(gaps[2] <= 3 * errors[2], fmt("lambda=0.0125: gap ", gaps[2], " <= 3 errors ", 3 * errors[2]));
  return out;
}

Outcome combinatorics() {
  Outcome out;
  for (int n = 1; n <= 7; ++n) {
    long expected = 1;
    for (int k = 0; k < n - 2; ++k) expected *= n;
    const auto count = static_cast<long>(enumerate_trees(n).size());
    out.require(count == expected, fmt("n=", n, ": ", count, " trees (n^(n-2) = ", expected, ")"));
  }
  auto rng = derive_stream(1111, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double min_eig = 1.0;
  long matrices = 0;
  for (int n = 2; n <= 6; ++n) {
    for (const auto& t : enumerate_trees(n)) {
      for (int k = 0; k < 1000; ++k) {
        std::vector<double> w(n - 1);
        for (auto& v : w) v = unif(rng);
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<MatrixR>(bkar_x_matrix(t, w), Eigen::EigenvaluesOnly).eigenvalues()[0]);
        ++matrices;
      }
    }
  }
  out.require(min_eig >= -1e-12, fmt("min eigenvalue ", min_eig, " over ", matrices, " interpolation matrices (>= -1e-12)"));
  return out;
}

Outcome gradient_check() {
  Outcome out;
  auto rng = derive_stream(1212, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 2 + trial % 2, beta = 1 + (trial / 2) % 2, n = 1 + (trial / 4) % 3;
    const double mod = 0.01 + 0.19 * unif(rng);
    const double arg = (2.0 * unif(rng) - 1.0) * (kPi - 0.2);
    const Coupling c = Coupling::from_polar(mod, arg, p, 0.1);
    const EnsembleSpec spec(n, beta);
    const MatrixC k = sample_gaussian(spec, rng).entries();
    const MatrixC g = action_gradient(c, spec, eigh(HermitianMatrix(k)));
    const double step = 1e-5;
    auto s_at = [&](const MatrixC& m) { return action_S(c, spec, eigh(HermitianMatrix(m))).total; };
    double err = 0.0, scale = 0.0;
    for (const auto& e : hermitian_basis(n, beta)) {
      const Complex fd = (s_at(k + step * e) - s_at(k - step * e)) / (2 * step);
      const Complex an = (g * e).trace();
      err = std::max(err, std::abs(fd - an));
      scale = std::max(scale, std::abs(an));
    }
    worst = std::max(worst, err / scale);
  }
  out.require(worst <= 1e-5, fmt("max relative gradient error ", worst, " over 100 configurations (<= 1e-5)"));
  return out;
}

struct Spec {
  const char* title;
  double budget;
  std::function<Outcome(const AcceptanceOptions&)> body;
};

const std::vector<Spec>& criteria() {
  static const std::vector<Spec> list{
      {"Fuss-Catalan correctness", 10, [](const AcceptanceOptions&) { return fuss_catalan_correctness(); }},
      {"inverse-pair identity", 10, [](const AcceptanceOptions&) { return inverse_identity(); }},
      {"holomorphic calculus", 30, [](const AcceptanceOptions&) { return holomorphic_calculus(); }},
      {"Jacobian-determinant identity", 60, [](const AcceptanceOptions&) { return jacobian_identity(); }},
      {"Jacobian positivity", 30, [](const AcceptanceOptions&) { return positivity(); }},
      {"change-of-variables identity", 300, [](const AcceptanceOptions& o) { return change_of_variables(o.workers); }},
      {"perturbative slope", 120, [](const AcceptanceOptions&) { return perturbative_slope(); }},
      {"bound suites with fitted constants", 300, [](const AcceptanceOptions& o) { return bound_suites(o.workers); }},
      {"pacman boundedness scan", 300, [](const AcceptanceOptions& o) { return pacman_boundedness(o.workers); }},
      {"LVE truncation convergence", 600, [](const AcceptanceOptions& o) { return lve_truncation(o.workers); }},
      {"combinatorial exactness", 60, [](const AcceptanceOptions&) { return combinatorics(); }},
      {"gradient check", 60, [](const AcceptanceOptions&) { return gradient_check(); }},
  };
  return list;
}

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& opt) {
  if (id < 1 || id > kCriterionCount) throw NumericError(ErrorKind::OutOfRange, "criterion ids run from 1 to 12");
  const auto& spec = criteria()[id - 1];
  CriterionResult r;
  r.id = id;
  r.title = spec.title;
  r.budget_seconds = spec.budget;
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = spec.body(opt);
  } catch (const std::exception& e) {
    outcome.require(false, std::string("error: ") + e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  outcome.require(r.seconds < r.budget_seconds, fmt("runtime ", r.seconds, " s (< ", r.budget_seconds, " s)"));
  r.passed = outcome.passed;
  r.details = std::move(outcome.details);
  return r;
}

}  // namespace lvr
