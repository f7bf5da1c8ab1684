#include "lvr/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "lvr/contour.hpp"
#include "lvr/lve_expansion.hpp"
#include "lvr/lvr_action.hpp"
#include "lvr/parallel.hpp"
#include "lvr/partition_oracle.hpp"
#include "lvr/quadrature.hpp"

namespace lvr {

namespace {

struct Sup {
  double train = 0.0;
  double held = 0.0;
  long n = 0;

  void add(double ratio, bool held_out) {
    (held_out ? held : train) = std::max(held_out ? held : train, ratio);
    ++n;
  }
  void merge(const Sup& o) {
    train = std::max(train, o.train);
    held = std::max(held, o.held);
    n += o.n;
  }
  BoundSuite finish(const std::string& name) const {
    BoundSuite s;
    s.name = name;
    s.fitted_constant = train;
    s.holdout_ratio = train > 0.0 ? held / train : 0.0;
    s.n_samples = n;
    s.holds = std::isfinite(train) && train > 0.0 && s.holdout_ratio <= kHoldoutFactor;
    return s;
  }
};

ExponentFit fit_exponent(const std::string& name, double arg, double predicted, const std::vector<double>& moduli,
                         const std::vector<double>& values) {
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < moduli.size(); ++k) {
    lx.push_back(std::log(moduli[k]));
    ly.push_back(std::log(values[k]));
  }
  const LineFit line = fit_line(lx, ly);
  ExponentFit e;
  e.name = name;
  e.arg = arg;
  e.measured = line.slope;
  e.slope_stderr = line.slope_stderr;
  e.predicted = predicted;
  e.within_window = std::abs(line.slope - predicted) <= kExponentWindow * predicted;
  e.decays_as_fast = line.slope >= (1.0 - kExponentWindow) * predicted;
  e.moduli = moduli;
  e.values = values;
  return e;
}

struct GroupResult {
  Sup g_bound, resolvent, corner, contour_res;
};

}  // namespace

bool BoundReport::constants_hold() const {
  return std::all_of(suites.begin(), suites.end(), [](const BoundSuite& s) { return s.holds; });
}

bool BoundReport::exponents_within_window() const {
  return std::all_of(exponents.begin(), exponents.end(), [](const ExponentFit& e) { return e.within_window; });
}

bool BoundReport::exponents_decay_as_fast() const {
  return std::all_of(exponents.begin(), exponents.end(), [](const ExponentFit& e) { return e.decays_as_fast; });
}

std::vector<double> pacman_args(double epsilon) {
  return {0.0, kPi / 2, -kPi / 2, kPi - 2 * epsilon, -(kPi - 2 * epsilon)};
}

BoundReport verify_bounds(int p, double epsilon, std::uint64_t seed, const BoundOptions& opt) {
  if (opt.moduli.size() < 3 || opt.radii.empty()) throw NumericError(ErrorKind::InvalidArgument, "need at least three moduli and one radius");
  BoundReport report;
  report.p = p;
  report.epsilon = epsilon;
  report.args = pacman_args(epsilon);
  const auto& args = report.args;
  const std::size_t n_mod = opt.moduli.size(), n_rad = opt.radii.size();
  const std::size_t n_groups = args.size() * n_mod * n_rad;
  const long spectra_per_group = std::max<long>(1, (opt.n_spectra + static_cast<long>(n_groups) - 1) / static_cast<long>(n_groups));
  const double g_expo = 1.0 + 1.0 / (2.0 * p) - 1.0 / (2.0 * p * p);
  const double quarter = 1.0 / (4.0 * p * p);

  const auto groups = parallel_blocks(n_groups, opt.workers, [&](std::size_t gi) {
    const std::size_t ai = gi / (n_mod * n_rad), mi = (gi / n_rad) % n_mod, ri = gi % n_rad;
    const bool held = mi == 0 || ri + 1 == n_rad;
    const double mod = opt.moduli[mi], rho = opt.radii[ri];
    const Coupling c = Coupling::from_polar(mod, args[ai], p, epsilon);
    const auto gamma = build_keyhole(rho, c);
    GroupResult out;

    for (std::size_t k = 0; k < gamma.nodes.size(); ++k) {
      const Complex u = gamma.nodes[k].u;
      const Complex g = gamma.g_weights()[k] * (2.0 * kPi * kI) / gamma.nodes[k].du;
      out.g_bound.add(std::abs(g) / (std::pow(mod, quarter) * std::pow(std::abs(u), g_expo)), held);
      for (int m = 0; m <= 40; ++m) {
        const double mu = gamma.R / 2.0 * (m / 20.0 - 1.0);
        const double ref = std::min(1.0 / (1.0 + std::abs(u)), 1.0 / (1.0 + std::abs(mu)));
        out.contour_res.add(1.0 / std::abs(u - mu) / ref, held);
      }
    }

    auto rng = derive_stream(seed, gi);
    std::uniform_int_distribution<int> dim(1, 3);
    std::uniform_real_distribution<double> eig(-rho, rho);
    std::uniform_int_distribution<std::size_t> node(0, gamma.nodes.size() - 1);
    for (long sp = 0; sp < spectra_per_group; ++sp) {
      std::vector<double> kappa(dim(rng));
      for (auto& v : kappa) v = eig(rng);
      std::sort(kappa.begin(), kappa.end());
      const auto s = SpectralData::diagonal(kappa);
      const auto res = resolvent_entries(c, s);
      out.resolvent.add(res.bound_ratio, held);
      for (int q = 0; q < opt.pairs_per_spectrum; ++q) {
        const Complex uk = gamma.nodes[node(rng)].u, uk1 = gamma.nodes[node(rng)].u;
        const double ref = std::pow(1.0 + std::abs(uk), -1.0 - 1.0 / p) / (1.0 + std::abs(uk1));
        out.corner.add(corner_operator(res, s, uk, uk1).cwiseAbs().maxCoeff() / ref, held);
      }
    }
    return out;
  });
  GroupResult total;
  for (const auto& g : groups) {
    total.g_bound.merge(g.g_bound);
    total.resolvent.merge(g.resolvent);
    total.corner.merge(g.corner);
    total.contour_res.merge(g.contour_res);
  }
  report.suites.push_back(total.g_bound.finish("g-bound"));
  report.suites.push_back(total.resolvent.finish("resolvent-bound"));
  report.suites.push_back(total.corner.finish("corner-bound"));
  report.suites.push_back(total.contour_res.finish("contour-resolvent"));

  // contour factor and single vertex amplitudes along each arg
  const double sv_expo = 1.0 / (2.0 * p * (2.0 * p - 2.0));
  const double a1_expo = 1.0 / (2.0 * p - 2.0);
  struct SweepPoint {
    double factor;
    double a0, a1;
  };
  const auto sweep = parallel_blocks(args.size() * n_mod, opt.workers, [&](std::size_t k) {
    const Coupling c = Coupling::from_polar(opt.moduli[k % n_mod], args[k / n_mod], p, epsilon);
    const auto gamma = build_keyhole(2.0, c);
    double factor = 0.0;
    for (std::size_t j = 0; j < gamma.nodes.size(); ++j) {
      const double gabs = std::abs(gamma.g_weights()[j]) * 2.0 * kPi;  // |g| |du|
      factor += gabs * std::pow(1.0 + std::abs(gamma.nodes[j].u), -2.0 - 1.0 / p);
    }
    const auto sv = single_vertex_amplitude(c, EnsembleSpec(1, 2), PartitionMethod::quadrature);
    return SweepPoint{factor, std::abs(sv.total.value), std::abs(sv.a1.value)};
  });
  Sup factor_sup, a0_sup, a1_sup;
  for (std::size_t ai = 0; ai < args.size(); ++ai) {
    std::vector<double> f, a0, a1;
    for (std::size_t mi = 0; mi < n_mod; ++mi) {
      const auto& pt = sweep[ai * n_mod + mi];
      const double mod = opt.moduli[mi];
      factor_sup.add(pt.factor / std::pow(mod, quarter), mi == 0);
      a0_sup.add(pt.a0 / std::pow(mod, sv_expo), mi == 0);
      a1_sup.add(pt.a1 / std::pow(mod, a1_expo), mi == 0);
      f.push_back(pt.factor);
      a0.push_back(pt.a0);
      a1.push_back(pt.a1);
    }
    report.exponents.push_back(fit_exponent("contour-factor", args[ai], quarter, opt.moduli, f));
    report.exponents.push_back(fit_exponent("single-vertex", args[ai], sv_expo, opt.moduli, a0));
    report.exponents.push_back(fit_exponent("A1", args[ai], a1_expo, opt.moduli, a1));
  }
  report.suites.push_back(factor_sup.finish("contour-factor"));
  report.suites.push_back(a0_sup.finish("single-vertex"));
  report.suites.push_back(a1_sup.finish("A1"));
  return report;
}

bool PacmanScan::bounded() const {
  return std::all_of(trends.begin(), trends.end(), [](const ScanTrend& t) { return t.no_growth; });
}

PacmanScan pacman_scan(int p, double epsilon, double modulus, const std::vector<double>& args, const std::vector<int>& ns, int beta,
                       long mc_samples, std::uint64_t seed, int workers) {
  PacmanScan scan;
  for (double arg : args) {
    const Coupling c = Coupling::from_polar(modulus, arg, p, epsilon);
    std::vector<double> xs, ys;
    for (int n : ns) {
      PartitionOptions opt;
      opt.mc_samples = mc_samples;
      opt.seed = seed;
      opt.workers = workers;
      PartitionMethod method = PartitionMethod::quadrature;
      if (n > 3) {
        if (arg != 0.0) continue;
        method = PartitionMethod::monte_carlo;
      }
      const auto f = free_energy(c, EnsembleSpec(n, beta), method, opt);
      scan.rows.push_back({n, arg, f.value, f.error, to_string(method)});
      scan.max_abs_F = std::max(scan.max_abs_F, std::abs(f.value));
      xs.push_back(n);
      ys.push_back(std::abs(f.value));
    }
    if (xs.size() >= 3) {
      const LineFit line = fit_line(xs, ys);
      scan.trends.push_back({arg, line.slope, line.slope_stderr, line.slope <= 2.0 * line.slope_stderr});
    }
  }
  return scan;
}

}  // namespace lvr
