#include "lvr/lve_expansion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>

#include "lvr/contour.hpp"
#include "lvr/lvr_action.hpp"
#include "lvr/parallel.hpp"

namespace lvr {

namespace {

constexpr long kMcBlock = 4096;
constexpr double kRichardsonTolerance = 1e-5;

std::uint64_t tree_tag(const LabeledTree& t) {
  std::uint64_t tag = static_cast<std::uint64_t>(t.n);
  for (const auto& [i, j] : t.edges) tag = tag * 64 + static_cast<std::uint64_t>(i * 8 + j);
  return tag;
}

// Contours for growing spectral radii, built on demand with radius 2^k.
class ContourCache {
 public:
  explicit ContourCache(const Coupling& c) : c_(c) {}

  const KeyholeContour& covering(double radius) {
    int k = 0;
    while (std::ldexp(1.0, k) < 1.05 * radius) ++k;
    auto it = cache_.find(k);
    if (it == cache_.end()) it = cache_.emplace(k, std::make_unique<KeyholeContour>(build_keyhole(std::ldexp(1.0, k), c_))).first;
    return *it->second;
  }

 private:
  Coupling c_;
  std::map<int, std::unique_ptr<KeyholeContour>> cache_;
};

MatrixC gradient_at(const Coupling& c, const EnsembleSpec& spec, const MatrixC& k, ContourCache& contours) {
  const auto s = eigh(HermitianMatrix(k));
  return action_gradient(c, spec, s, contours.covering(s.spectral_radius()));
}

// d/dt G(K + t E) for a complex direction E = A + iB with A, B Hermitian.
MatrixC directional_derivative(const Coupling& c, const EnsembleSpec& spec, const MatrixC& k, const MatrixC& e, double step,
                               ContourCache& contours) {
  const MatrixC a = 0.5 * (e + e.adjoint());
  const MatrixC b = (e - e.adjoint()) / Complex(0.0, 2.0);
  auto along = [&](const MatrixC& dir) -> MatrixC {
    const double norm = dir.norm();
    if (norm == 0.0) return MatrixC::Zero(k.rows(), k.cols());
    const MatrixC unit = dir / norm;
    const MatrixC plus = gradient_at(c, spec, k + step * unit, contours);
    const MatrixC minus = gradient_at(c, spec, k - step * unit, contours);
    return norm * (plus - minus) / (2.0 * step);
  };
  return along(a) + kI * along(b);
}

struct Moments {
  Complex sum{0.0};
  double sum_sq = 0.0;
  long count = 0;
};

}  // namespace

std::vector<int> LabeledTree::degrees() const {
  std::vector<int> d(n, 0);
  for (const auto& [i, j] : edges) {
    ++d[i];
    ++d[j];
  }
  return d;
}

int LabeledTree::max_degree() const {
  const auto d = degrees();
  return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
}

LabeledTree prufer_decode(int n, const std::vector<int>& code) {
  LabeledTree t;
  t.n = n;
  if (n < 2) return t;
  std::vector<int> degree(n, 1);
  for (int v : code) ++degree[v];
  for (int v : code) {
    int leaf = 0;
    while (degree[leaf] != 1) ++leaf;
    t.edges.emplace_back(std::min(leaf, v), std::max(leaf, v));
    --degree[leaf];
    --degree[v];
  }
  int u = -1, w = -1;
  for (int v = 0; v < n; ++v) {
    if (degree[v] == 1) (u < 0 ? u : w) = v;
  }
  t.edges.emplace_back(u, w);
  std::sort(t.edges.begin(), t.edges.end());
  return t;
}

std::vector<int> prufer_encode(const LabeledTree& t) {
  std::vector<std::vector<int>> adj(t.n);
  for (const auto& [i, j] : t.edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<int> degree(t.n);
  for (int v = 0; v < t.n; ++v) degree[v] = static_cast<int>(adj[v].size());
  std::vector<bool> removed(t.n, false);
  std::vector<int> code;
  for (int step = 0; step + 2 < t.n; ++step) {
    int leaf = 0;
    while (removed[leaf] || degree[leaf] != 1) ++leaf;
    removed[leaf] = true;
    for (int v : adj[leaf]) {
      if (!removed[v]) {
        code.push_back(v);
        --degree[v];
      }
    }
  }
  return code;
}

std::vector<LabeledTree> enumerate_trees(int n) {
  if (n < 1 || n > 7) throw NumericError(ErrorKind::OutOfRange, "enumerate_trees needs 1 <= n <= 7");
  if (n == 1) return {LabeledTree{}};
  std::vector<LabeledTree> out;
  std::vector<int> code(n - 2, 0);
  while (true) {
    out.push_back(prufer_decode(n, code));
    int pos = n - 3;
    while (pos >= 0 && code[pos] == n - 1) code[pos--] = 0;
    if (pos < 0) break;
    ++code[pos];
  }
  return out;
}

MatrixR bkar_x_matrix(const LabeledTree& t, const std::vector<double>& w) {
  if (w.size() != t.edges.size()) throw NumericError(ErrorKind::InvalidArgument, "one weakening parameter per edge");
  std::vector<std::vector<std::pair<int, double>>> adj(t.n);
  for (std::size_t e = 0; e < t.edges.size(); ++e) {
    if (!(w[e] >= 0.0 && w[e] <= 1.0)) throw NumericError(ErrorKind::InvalidArgument, "weakening parameters lie in [0, 1]");
    adj[t.edges[e].first].emplace_back(t.edges[e].second, w[e]);
    adj[t.edges[e].second].emplace_back(t.edges[e].first, w[e]);
  }
  MatrixR x = MatrixR::Zero(t.n, t.n);
  for (int root = 0; root < t.n; ++root) {
    // path minimum by depth-first search from root
    std::vector<int> stack{root};
    std::vector<double> best(t.n, -1.0);
    best[root] = 1.0;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& [u, wt] : adj[v]) {
        if (best[u] < 0.0) {
          best[u] = std::min(best[v], wt);
          stack.push_back(u);
        }
      }
    }
    for (int j = 0; j < t.n; ++j) x(root, j) = std::max(best[j], 0.0);
  }
  return x;
}

SingleVertex single_vertex_amplitude(const Coupling& c, const EnsembleSpec& spec, PartitionMethod method, const AmplitudeParams& params) {
  if (spec.beta != 2) throw NumericError(ErrorKind::InvalidArgument, "single_vertex_amplitude is defined for beta = 2");
  const double norm = 1.0 / (static_cast<double>(spec.N) * spec.N);
  SingleVertex out;
  if (c.is_zero()) return out;
  const int n = spec.N;
  const int p = c.p();
  auto s1_of = [&](std::span<const double> kappa) {
    Complex s1{0.0};
    for (double k : kappa) s1 += std::log(fc::fc_eval(c.fc_params(), -c.lambda() * ipow(k, 2 * p - 2)));
    return s1 * (n / 2.0);
  };

  if (method == PartitionMethod::quadrature) {
    const auto total = eigenvalue_average(
        spec,
        [&](std::span<const double> xs, std::size_t m, std::vector<Complex>& vals) {
          for (std::size_t r = 0; r < m; ++r) vals[r] = action_S(c, 2, xs.subspan(r * n, n)).total;
        },
        params.quad);
    const auto s1 = eigenvalue_average(
        spec,
        [&](std::span<const double> xs, std::size_t m, std::vector<Complex>& vals) {
          for (std::size_t r = 0; r < m; ++r) vals[r] = s1_of(xs.subspan(r * n, n));
        },
        params.quad);
    out.total = {norm * total.value, norm * total.error, 0, total.n_points, LabeledTree{}};
    out.a1 = {norm * s1.value, norm * s1.error, 0, s1.n_points, LabeledTree{}};
    out.a2 = {out.total.value - out.a1.value, out.total.std_error + out.a1.std_error, 0, total.n_points, LabeledTree{}};
    return out;
  }

  const long samples = params.n_mc;
  if (samples < 2) throw NumericError(ErrorKind::InvalidArgument, "n_mc must be >= 2");
  struct Acc {
    Moments total, s1, s2;
  };
  const long n_blocks = (samples + kMcBlock - 1) / kMcBlock;
  const auto blocks = parallel_blocks(static_cast<std::size_t>(n_blocks), params.workers, [&](std::size_t b) {
    auto rng = derive_stream(params.seed, b);
    const long count = std::min(kMcBlock, samples - static_cast<long>(b) * kMcBlock);
    Acc acc;
    for (long k = 0; k < count; ++k) {
      const auto s = eigh(sample_gaussian(spec, rng));
      const std::vector<double> kappa(s.eigenvalues.data(), s.eigenvalues.data() + n);
      const Complex tot = action_S(c, 2, kappa).total;
      const Complex a = s1_of(kappa);
      for (auto [m, v] : {std::pair<Moments*, Complex>{&acc.total, tot}, {&acc.s1, a}, {&acc.s2, tot - a}}) {
        m->sum += v;
        m->sum_sq += std::norm(v);
        ++m->count;
      }
    }
    return acc;
  });
  Acc sum;
  for (const auto& a : blocks) {
    for (auto [dst, src] : {std::pair<Moments*, const Moments*>{&sum.total, &a.total}, {&sum.s1, &a.s1}, {&sum.s2, &a.s2}}) {
      dst->sum += src->sum;
      dst->sum_sq += src->sum_sq;
      dst->count += src->count;
    }
  }
  auto finish = [&](const Moments& m) {
    const Complex mean = m.sum / static_cast<double>(m.count);
    const double var = std::max(0.0, (m.sum_sq / m.count - std::norm(mean)) * m.count / (m.count - 1.0));
    return AmplitudeEstimate{norm * mean, norm * std::sqrt(var / m.count), 0, m.count, LabeledTree{}};
  };
  out.total = finish(sum.total);
  out.a1 = finish(sum.s1);
  out.a2 = finish(sum.s2);
  return out;
}

AmplitudeEstimate tree_amplitude(const Coupling& c, const EnsembleSpec& spec, const LabeledTree& t, const AmplitudeParams& params) {
  if (t.n == 1) {
    const auto method = spec.N <= 3 ? PartitionMethod::quadrature : PartitionMethod::monte_carlo;
    auto a = single_vertex_amplitude(c, spec, method, params).total;
    a.tree = t;
    return a;
  }
  if (t.n > 3 || spec.N > 3 || t.max_degree() > 2) {
    std::ostringstream msg;
    msg << "tree amplitudes need n <= 3, N <= 3 and degree <= 2 (n = " << t.n << ", N = " << spec.N << ", degree " << t.max_degree() << ")";
    throw NumericError(ErrorKind::BudgetExceeded, msg.str());
  }
  if (static_cast<int>(t.edges.size()) != t.n - 1) throw NumericError(ErrorKind::InvalidArgument, "not a spanning tree");
  if (params.n_w < 2 || params.n_mc < 1) throw NumericError(ErrorKind::InvalidArgument, "need n_w >= 2 and n_mc >= 1");
  if (!(params.fd_step > 0.0)) throw NumericError(ErrorKind::InvalidArgument, "fd_step must be positive");

  AmplitudeEstimate out;
  out.tree = t;
  out.n_w_samples = params.n_w;
  out.n_mc_samples = params.n_mc;
  if (c.is_zero()) return out;

  const int n_edges = t.n - 1;
  const auto deg = t.degrees();
  int centre = -1, leaf_a = -1, leaf_b = -1;
  if (t.n == 3) {
    centre = static_cast<int>(std::find(deg.begin(), deg.end(), 2) - deg.begin());
    for (int v = 0; v < 3; ++v) {
      if (v == centre) continue;
      (leaf_a < 0 ? leaf_a : leaf_b) = v;
    }
  }

  // the step is validated once per run, on the first replica draw
  auto check_step = [&](const MatrixC& k, const MatrixC& e, ContourCache& contours) {
    const MatrixC d1 = directional_derivative(c, spec, k, e, params.fd_step, contours);
    const MatrixC d2 = directional_derivative(c, spec, k, e, params.fd_step / 2, contours);
    const double scale = d2.norm() + 1e-8 * gradient_at(c, spec, k, contours).norm() * e.norm();
    if (!((d1 - d2).norm() <= kRichardsonTolerance * scale)) {
      std::ostringstream msg;
      msg << "central differences at steps " << params.fd_step << " and " << params.fd_step / 2 << " differ by " << (d1 - d2).norm() / scale;
      throw NumericError(ErrorKind::StepInstability, msg.str());
    }
  };

  const std::uint64_t tag = tree_tag(t) << 32;
  const long n_blocks = (params.n_w + 63) / 64;
  const auto blocks = parallel_blocks(static_cast<std::size_t>(n_blocks), params.workers, [&](std::size_t b) {
    ContourCache contours(c);
    Moments acc;
    const long first = static_cast<long>(b) * 64;
    const long last = std::min(params.n_w, first + 64);
    for (long iw = first; iw < last; ++iw) {
      auto rng = derive_stream(params.seed, tag + static_cast<std::uint64_t>(iw));
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      std::vector<double> w(n_edges);
      for (auto& v : w) v = unif(rng);
      const MatrixR x = bkar_x_matrix(t, w);
      Complex mean{0.0};
      for (long r = 0; r < params.n_mc; ++r) {
        const auto reps = sample_replicas(spec, x, rng);
        if (t.n == 2) {
          const MatrixC g1 = gradient_at(c, spec, reps[0].entries(), contours);
          const MatrixC g2 = gradient_at(c, spec, reps[1].entries(), contours);
          mean += (g1 * g2).trace();
        } else {
          const MatrixC ga = gradient_at(c, spec, reps[leaf_a].entries(), contours);
          const MatrixC gb = gradient_at(c, spec, reps[leaf_b].entries(), contours);
          const MatrixC& km = reps[centre].entries();
          if (iw == 0 && r == 0) check_step(km, gb, contours);
          mean += (ga * directional_derivative(c, spec, km, gb, params.fd_step, contours)).trace();
        }
      }
      mean /= static_cast<double>(params.n_mc);
      acc.sum += mean;
      acc.sum_sq += std::norm(mean);
      ++acc.count;
    }
    return acc;
  });
  Moments total;
  for (const auto& m : blocks) {
    total.sum += m.sum;
    total.sum_sq += m.sum_sq;
    total.count += m.count;
  }
  const double scale = 1.0 / (static_cast<double>(spec.N) * spec.N * std::pow(2.0 * spec.N, n_edges));
  const Complex mean = total.sum / static_cast<double>(total.count);
  const double var = std::max(0.0, (total.sum_sq / total.count - std::norm(mean)) * total.count / (total.count - 1.0));
  out.value = scale * mean;
  out.std_error = scale * std::sqrt(var / total.count);
  return out;
}

LveSum lve_truncated_F(const Coupling& c, const EnsembleSpec& spec, int n_max, const AmplitudeParams& params) {
  if (n_max < 1 || n_max > 3) throw NumericError(ErrorKind::OutOfRange, "lve_truncated_F needs 1 <= n_max <= 3");
  LveSum out;
  double var = 0.0, factorial = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    factorial *= n;
    Complex order{0.0};
    for (const auto& t : enumerate_trees(n)) {
      const auto a = tree_amplitude(c, spec, t, params);
      order += a.value / factorial;
      out.abs_sum += std::abs(a.value) / factorial;
      var += std::pow(a.std_error / factorial, 2);
    }
    out.per_order.push_back(order);
    out.value += order;
  }
  out.error = std::sqrt(var);
  return out;
}

}  // namespace lvr
