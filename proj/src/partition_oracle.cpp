#include "lvr/partition_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "lvr/lvr_action.hpp"
#include "lvr/parallel.hpp"
#include "lvr/quadrature.hpp"

namespace lvr {

namespace {

constexpr long kMaxGridPoints = 2200000;
constexpr long kMcBlock = 4096;

const QuadratureRule& cached_hermite(int n) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_hermite(n)).first;
  return it->second;
}

const QuadratureRule& cached_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
  return it->second;
}

// Evaluates a batch of grid points: xs holds M rows of N eigenvalues (row
// major), idx the matching 1-D node indices (beta = 2 grids only).
using BatchIntegrand = std::function<void(std::span<const double> xs, std::span<const int> idx, std::size_t m, std::vector<Complex>& out)>;

struct GridSums {
  Complex numerator{0.0};
  Complex denominator{0.0};
};

long ipow_long(long base, int e) {
  long r = 1;
  for (int k = 0; k < e; ++k) r *= base;
  return r;
}

// Sums of W(x) F(x) and W(x) over the eigenvalue grid, where W is the
// Gaussian-Vandermonde weight along mu = e^{i phi} x with constant phases
// dropped (they cancel in the ratio).
//
// beta = 2: tensor Gauss-Hermite for exp(-N cos(2 phi) x^2) with the phase
// exp(-i N sin(2 phi) x^2) and Delta(x)^2 in W.
// beta = 1: x sorted ascending, parametrized by x_1 = y and gaps
// d_k = x_{k+1} - x_k >= 0 with Gauss-Legendre on y in [-L, L] and
// d_k in [0, 2L], so |Delta| is the polynomial prod (x_j - x_i).
GridSums grid_sums(int N, int beta, int n, double phi, const BatchIntegrand& f, int workers) {
  const double a = N * std::cos(2 * phi);
  const Complex rot = std::exp(Complex(0.0, 2 * phi));
  const long per_block = ipow_long(n, N - 1);

  std::vector<double> x1d(n), w1d(n), y1d(n), wy(n), d1d(n), wd(n);
  std::vector<Complex> phase1d(n);
  if (beta == 2) {
    const auto& gh = cached_hermite(n);
    for (int k = 0; k < n; ++k) {
      x1d[k] = gh.nodes[k] / std::sqrt(a);
      w1d[k] = gh.weights[k];
      phase1d[k] = std::exp(Complex(0.0, -N * std::sin(2 * phi) * x1d[k] * x1d[k]));
    }
  } else {
    const auto& gl = cached_legendre(n);
    const double L = std::sqrt(40.0 / a);
    for (int k = 0; k < n; ++k) {
      y1d[k] = L * gl.nodes[k];
      wy[k] = L * gl.weights[k];
      d1d[k] = L * (gl.nodes[k] + 1.0);
      wd[k] = L * gl.weights[k];
    }
  }

  auto block = [&](std::size_t b) {
    std::vector<double> xs(per_block * N);
    std::vector<int> idx(per_block * N);
    std::vector<Complex> weight(per_block);
    std::vector<int> digits(N);
    for (long m = 0; m < per_block; ++m) {
      digits[0] = static_cast<int>(b);
      long rest = m;
      for (int i = N - 1; i >= 1; --i) {
        digits[i] = static_cast<int>(rest % n);
        rest /= n;
      }
      double* x = &xs[m * N];
      Complex w;
      if (beta == 2) {
        double wr = 1.0;
        Complex ph = 1.0;
        for (int i = 0; i < N; ++i) {
          x[i] = x1d[digits[i]];
          wr *= w1d[digits[i]];
          ph *= phase1d[digits[i]];
        }
        double vdm = 1.0;
        for (int i = 0; i < N; ++i)
          for (int j = i + 1; j < N; ++j) vdm *= (x[j] - x[i]) * (x[j] - x[i]);
        w = wr * vdm * ph;
      } else {
        double wr = wy[digits[0]];
        x[0] = y1d[digits[0]];
        for (int i = 1; i < N; ++i) {
          x[i] = x[i - 1] + d1d[digits[i]];
          wr *= wd[digits[i]];
        }
        double vdm = 1.0, sq = 0.0;
        for (int i = 0; i < N; ++i) {
          sq += x[i] * x[i];
          for (int j = i + 1; j < N; ++j) vdm *= (x[j] - x[i]);
        }
        w = wr * vdm * std::exp(-static_cast<double>(N) * rot * sq);
      }
      weight[m] = w;
      for (int i = 0; i < N; ++i) idx[m * N + i] = digits[i];
    }
    std::vector<Complex> values(per_block);
    f(xs, idx, per_block, values);
    GridSums s;
    for (long m = 0; m < per_block; ++m) {
      s.numerator += weight[m] * values[m];
      s.denominator += weight[m];
    }
    return s;
  };

  const auto blocks = parallel_blocks(static_cast<std::size_t>(n), workers, block);
  GridSums total;
  for (const auto& s : blocks) {
    total.numerator += s.numerator;
    total.denominator += s.denominator;
  }
  return total;
}

PartitionEstimate doubled_quadrature(const EnsembleSpec& spec, const PartitionOptions& opt,
                                     const std::function<Complex(int)>& ratio_at) {
  if (spec.N > 3) throw NumericError(ErrorKind::InvalidArgument, "quadrature supports N <= 3");
  int n = opt.quad_nodes;
  if (n < 2) throw NumericError(ErrorKind::InvalidArgument, "quad_nodes must be >= 2");
  Complex prev = ratio_at(n);
  while (ipow_long(2L * n, spec.N) <= kMaxGridPoints) {
    n *= 2;
    const Complex cur = ratio_at(n);
    const double change = std::abs(cur - prev);
    if (change <= opt.quad_tolerance * std::abs(cur) + 1e-15) return {cur, PartitionMethod::quadrature, std::max(change, 1e-16), n};
    prev = cur;
  }
  std::ostringstream msg;
  msg << "quadrature did not converge to relative " << opt.quad_tolerance << " within " << kMaxGridPoints << " grid points";
  throw NumericError(ErrorKind::QuadratureUnderResolved, msg.str());
}

void require_real_nonnegative(const Coupling& c) {
  if (c.lambda().imag() != 0.0 || c.lambda().real() < 0.0) {
    throw NumericError(ErrorKind::InvalidArgument, "Monte Carlo estimates need real lambda >= 0");
  }
}

PartitionEstimate monte_carlo(const EnsembleSpec& spec, const PartitionOptions& opt,
                              const std::function<double(const HermitianMatrix&)>& sample_value) {
  if (opt.mc_samples < 2) throw NumericError(ErrorKind::InvalidArgument, "mc_samples must be >= 2");
  const long n_blocks = (opt.mc_samples + kMcBlock - 1) / kMcBlock;
  struct Acc {
    double sum = 0.0, sum_sq = 0.0;
    long count = 0;
  };
  const auto blocks = parallel_blocks(static_cast<std::size_t>(n_blocks), opt.workers, [&](std::size_t b) {
    auto rng = derive_stream(opt.seed, b);
    const long count = std::min(kMcBlock, opt.mc_samples - static_cast<long>(b) * kMcBlock);
    Acc acc;
    for (long k = 0; k < count; ++k) {
      const double v = sample_value(sample_gaussian(spec, rng));
      acc.sum += v;
      acc.sum_sq += v * v;
    }
    acc.count = count;
    return acc;
  });
  Acc total;
  for (const auto& a : blocks) {
    total.sum += a.sum;
    total.sum_sq += a.sum_sq;
    total.count += a.count;
  }
  const double mean = total.sum / total.count;
  const double var = std::max(0.0, (total.sum_sq / total.count - mean * mean) * total.count / (total.count - 1.0));
  const double se = std::sqrt(var / total.count);
  if (!(se <= 0.1 * std::abs(mean))) {
    std::ostringstream msg;
    msg << "Monte Carlo relative standard error " << se / std::abs(mean) << " exceeds 10%";
    throw NumericError(ErrorKind::VarianceBlowup, msg.str());
  }
  return {mean, PartitionMethod::monte_carlo, std::max(se, 1e-300), total.count};
}

double trace_power(const HermitianMatrix& h, int power) {
  const auto s = eigh(h);
  double t = 0.0;
  for (int i = 0; i < s.dim(); ++i) t += ipow(s.eigenvalues[i], power);
  return t;
}

// prod_i h'(x_i) prod_{i<j} D_ij^beta, the Jacobian exp(S).
Complex jacobian_from_values(const HValue* hv, const double* x, int N, int beta) {
  Complex prod = 1.0;
  for (int i = 0; i < N; ++i) {
    prod *= hv[i].dh;
    for (int j = i + 1; j < N; ++j) {
      const double gap = x[i] - x[j];
      const Complex d = std::abs(gap) < kCoincidenceThreshold ? 0.5 * (hv[i].dh + hv[j].dh) : (hv[i].h - hv[j].h) / gap;
      prod *= beta == 2 ? d * d : d;
    }
  }
  return prod;
}

}  // namespace

const char* to_string(PartitionMethod m) { return m == PartitionMethod::quadrature ? "quadrature" : "monte_carlo"; }

double direct_rotation_angle(const Coupling& c) {
  if (c.is_zero()) return 0.0;
  // equal and opposite phases on the Gaussian and the lambda term
  return -std::arg(c.lambda()) / (2.0 * c.p() + 2.0);
}

PartitionEstimate z_direct(const Coupling& c, const EnsembleSpec& spec, PartitionMethod method, const PartitionOptions& opt) {
  if (c.is_zero()) return {1.0, method, 1e-16, 0};
  const int N = spec.N, p = c.p();
  if (method == PartitionMethod::monte_carlo) {
    require_real_nonnegative(c);
    const double lam = c.lambda().real();
    return monte_carlo(spec, opt, [&](const HermitianMatrix& h) { return std::exp(-N * lam * trace_power(h, 2 * p)); });
  }
  const double phi = direct_rotation_angle(c);
  const Complex coupling = static_cast<double>(N) * c.lambda() * std::exp(Complex(0.0, 2.0 * p * phi));
  BatchIntegrand f = [&](std::span<const double> xs, std::span<const int>, std::size_t m, std::vector<Complex>& out) {
    for (std::size_t k = 0; k < m; ++k) {
      double s = 0.0;
      for (int i = 0; i < N; ++i) s += ipow(xs[k * N + i], 2 * p);
      out[k] = std::exp(-coupling * s);
    }
  };
  return doubled_quadrature(spec, opt, [&](int n) {
    const auto sums = grid_sums(N, spec.beta, n, phi, f, opt.workers);
    return sums.numerator / sums.denominator;
  });
}

PartitionEstimate z_lvr(const Coupling& c, const EnsembleSpec& spec, PartitionMethod method, const PartitionOptions& opt) {
  if (c.is_zero()) return {1.0, method, 1e-16, 0};
  const int N = spec.N, beta = spec.beta;
  if (method == PartitionMethod::monte_carlo) {
    require_real_nonnegative(c);
    return monte_carlo(spec, opt, [&](const HermitianMatrix& k) { return std::exp(action_S(c, spec, eigh(k)).total.real()); });
  }
  // Same rotated line as z_direct. On kappa = e^{i phi} x the Jacobian for
  // lambda equals the real-axis Jacobian for lambda e^{i (2p-2) phi}.
  const double phi = direct_rotation_angle(c);
  const Coupling rotated(c.lambda() * std::exp(Complex(0.0, (2.0 * c.p() - 2.0) * phi)), c.p(), std::min(c.epsilon(), 0.1), c.eta());
  return doubled_quadrature(spec, opt, [&](int n) {
    BatchIntegrand f;
    std::vector<HValue> table;
    if (beta == 2) {
      // tensor grid: h is only ever needed at the n one-dimensional nodes
      const auto& gh = cached_hermite(n);
      std::vector<double> x1d(n);
      for (int k = 0; k < n; ++k) x1d[k] = gh.nodes[k] / std::sqrt(N * std::cos(2 * phi));
      table = eval_h_real_batch(rotated, x1d);
      f = [&](std::span<const double> xs, std::span<const int> idx, std::size_t m, std::vector<Complex>& out) {
        std::vector<HValue> hv(N);
        for (std::size_t k = 0; k < m; ++k) {
          for (int i = 0; i < N; ++i) hv[i] = table[idx[k * N + i]];
          out[k] = jacobian_from_values(hv.data(), &xs[k * N], N, beta);
        }
      };
    } else {
      f = [&](std::span<const double> xs, std::span<const int>, std::size_t m, std::vector<Complex>& out) {
        const auto hv = eval_h_real_batch(rotated, xs);
        for (std::size_t k = 0; k < m; ++k) out[k] = jacobian_from_values(&hv[k * N], &xs[k * N], N, beta);
      };
    }
    const auto sums = grid_sums(N, beta, n, phi, f, opt.workers);
    return sums.numerator / sums.denominator;
  });
}

PartitionEstimate eigenvalue_average(const EnsembleSpec& spec, const EigenBatchFn& f, const PartitionOptions& opt) {
  BatchIntegrand g = [&](std::span<const double> xs, std::span<const int>, std::size_t m, std::vector<Complex>& out) { f(xs, m, out); };
  return doubled_quadrature(spec, opt, [&](int n) {
    const auto sums = grid_sums(spec.N, spec.beta, n, 0.0, g, opt.workers);
    return sums.numerator / sums.denominator;
  });
}

FreeEnergy free_energy(const Coupling& c, const EnsembleSpec& spec, PartitionMethod method, const PartitionOptions& opt) {
  if (c.is_zero()) return {0.0, 0.0};
  const auto z = z_direct(c, spec, method, opt);
  const double rel = z.error / std::abs(z.value);
  if (!(rel < 0.5)) throw NumericError(ErrorKind::VarianceBlowup, "partition function too uncertain for a logarithm");
  const double n2 = static_cast<double>(spec.N) * spec.N;
  return {std::log(z.value) / n2, rel / n2};
}

Rational gaussian_moment_exact(int N, int k, int beta) {
  if (N < 1 || N > 8 || k < 0 || k > 6) throw NumericError(ErrorKind::OutOfRange, "gaussian_moment_exact needs 1 <= N <= 8 and 0 <= k <= 6");
  if (beta != 1 && beta != 2) throw NumericError(ErrorKind::InvalidArgument, "beta must be 1 or 2");
  if (k == 0) return Rational(N);
  const int slots = 2 * k;
  // slot a carries H_{i_a, i_{a+1}}; index variables i_0..i_{2k-1}
  using Parent = std::array<int, 12>;
  auto find = [](Parent& par, int v) {
    while (par[v] != v) v = par[v] = par[par[v]];
    return v;
  };
  auto unite = [&](Parent& par, int a, int b) { par[find(par, a)] = find(par, b); };

  std::vector<long long> counts(slots + 1, 0);  // number of pairings with c index loops
  std::function<void(std::array<bool, 12>&, Parent&)> recurse = [&](std::array<bool, 12>& used, Parent& par) {
    int a = 0;
    while (a < slots && used[a]) ++a;
    if (a == slots) {
      int comps = 0;
      for (int v = 0; v < slots; ++v) comps += find(par, v) == v;
      ++counts[comps];
      return;
    }
    used[a] = true;
    for (int b = a + 1; b < slots; ++b) {
      if (used[b]) continue;
      used[b] = true;
      const int a1 = (a + 1) % slots, b1 = (b + 1) % slots;
      Parent straight = par;
      unite(straight, a, b1);
      unite(straight, a1, b);
      recurse(used, straight);
      if (beta == 1) {
        Parent twisted = par;
        unite(twisted, a, b);
        unite(twisted, a1, b1);
        recurse(used, twisted);
      }
      used[b] = false;
    }
    used[a] = false;
  };
  std::array<bool, 12> used{};
  Parent par{};
  for (int v = 0; v < slots; ++v) par[v] = v;
  recurse(used, par);

  boost::multiprecision::cpp_int numerator = 0;
  for (int comps = 0; comps <= slots; ++comps) {
    boost::multiprecision::cpp_int term = counts[comps];
    for (int e = 0; e < comps; ++e) term *= N;
    numerator += term;
  }
  boost::multiprecision::cpp_int denominator = 1;
  for (int e = 0; e < k; ++e) denominator *= (beta == 2 ? 2 : 4) * N;
  return Rational(numerator, denominator);
}

}  // namespace lvr
