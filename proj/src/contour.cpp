#include "lvr/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>


#include "lvr/quadrature.hpp"

namespace lvr {

namespace {

// Panel length over distance to the nearest singularity is kept below
// 1 / kGrading, so each Gauss-Legendre panel sees a Bernstein ellipse of
// parameter above 3.
constexpr double kGrading = 1.5;
constexpr double kMaxArcPanel = kPi / 8;
constexpr int kMaxPanelOrder = 128;

struct Panel {
  bool arc;
  double radius_or_angle;  // arc radius, or ray angle
  double a, b;             // angle range for arcs, radius range for rays (oriented)
};

std::vector<double> ray_breaks(double r, double R, double psi) {
  const double q = 1.0 + std::sin(psi) / kGrading * 2.0;
  std::vector<double> breaks{r};
  while (breaks.back() * q < R) breaks.push_back(breaks.back() * q);
  if (breaks.size() > 1 && R - breaks.back() < 0.3 * (breaks.back() - breaks[breaks.size() - 2])) breaks.pop_back();
  breaks.push_back(R);
  return breaks;
}

// Breaks of [psi, pi - psi], refined geometrically toward both ends where the
// arc approaches the real axis.
std::vector<double> small_arc_breaks(double psi) {
  std::vector<double> half{psi};
  while (half.back() < kPi / 2) {
    const double step = std::min(kMaxArcPanel, 2.0 * std::sin(half.back()) / kGrading);
    half.push_back(std::min(kPi / 2, half.back() + step));
  }
  std::vector<double> breaks = half;
  for (auto it = half.rbegin() + 1; it != half.rend(); ++it) breaks.push_back(kPi - *it);
  return breaks;
}

std::vector<double> outer_arc_breaks(double psi) {
  const int n = std::max(1, static_cast<int>(std::ceil(2.0 * psi / std::min(0.5, 2.0 * std::sin(psi) / kGrading))));
  std::vector<double> breaks;
  for (int k = 0; k <= n; ++k) breaks.push_back(-psi + 2.0 * psi * k / n);
  return breaks;
}

std::vector<Panel> keyhole_panels(double r, double R, double psi) {
  std::vector<Panel> panels;
  const auto rays = ray_breaks(r, R, psi);
  const auto small = small_arc_breaks(psi);
  const auto outer = outer_arc_breaks(psi);
  auto add_arc = [&](double radius, const std::vector<double>& breaks, double offset) {
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) panels.push_back({true, radius, breaks[k] + offset, breaks[k + 1] + offset});
  };
  auto add_ray = [&](double angle, bool outward) {
    if (outward) {
      for (std::size_t k = 0; k + 1 < rays.size(); ++k) panels.push_back({false, angle, rays[k], rays[k + 1]});
    } else {
      for (std::size_t k = rays.size() - 1; k > 0; --k) panels.push_back({false, angle, rays[k], rays[k - 1]});
    }
  };
  add_arc(R, outer, 0.0);
  add_ray(psi, false);
  add_arc(r, small, 0.0);
  add_ray(kPi - psi, true);
  add_arc(R, outer, kPi);
  add_ray(kPi + psi, false);
  add_arc(r, small, kPi);
  add_ray(-psi, true);
  return panels;
}

std::vector<ContourNode> discretize(const std::vector<Panel>& panels, int order) {
  const auto rule = gauss_legendre(order);
  std::vector<ContourNode> nodes;
  nodes.reserve(panels.size() * order);
  for (const Panel& pn : panels) {
    const double mid = 0.5 * (pn.a + pn.b);
    const double half = 0.5 * (pn.b - pn.a);
    for (int k = 0; k < order; ++k) {
      const double s = mid + half * rule.nodes[k];
      const double w = half * rule.weights[k];
      if (pn.arc) {
        const Complex u = std::polar(pn.radius_or_angle, s);
        nodes.push_back({u, kI * u * w});
      } else {
        const Complex dir = std::polar(1.0, pn.radius_or_angle);
        nodes.push_back({s * dir, dir * w});
      }
    }
  }
  return nodes;
}

// g(u) = u w T^p / (sqrt(T) + 1) with w = -lambda u^(2p-2), evaluated per
// contour ray with one continuation sweep per ray.
std::vector<Complex> g_on_nodes(const Coupling& c, const std::vector<Panel>& panels, const std::vector<ContourNode>& nodes,
                                int order) {
  std::vector<Complex> g(nodes.size(), 0.0);
  if (c.is_zero()) return g;
  const int p = c.p();
  auto g_from_t = [p](Complex u, Complex w, Complex t) { return u * w * ipow(t, p) / (std::sqrt(t) + 1.0); };
  const double lam_mod = std::abs(c.lambda());
  std::vector<std::size_t> ray_nodes;
  std::vector<std::vector<std::size_t>> by_ray(4);
  std::vector<double> ray_angles;
  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    for (int k = 0; k < order; ++k) {
      const std::size_t idx = pi * order + k;
      if (panels[pi].arc) {
        g[idx] = eval_map(MapKind::g, c, nodes[idx].u);
        continue;
      }
      auto it = std::find(ray_angles.begin(), ray_angles.end(), panels[pi].radius_or_angle);
      if (it == ray_angles.end()) {
        ray_angles.push_back(panels[pi].radius_or_angle);
        it = ray_angles.end() - 1;
      }
      by_ray[it - ray_angles.begin()].push_back(idx);
    }
  }
  for (std::size_t ray = 0; ray < ray_angles.size(); ++ray) {
    auto& idx = by_ray[ray];
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return std::abs(nodes[a].u) < std::abs(nodes[b].u); });
    std::vector<double> radii;
    radii.reserve(idx.size());
    for (std::size_t i : idx) radii.push_back(lam_mod * std::pow(std::abs(nodes[i].u), 2 * p - 2));
    const Complex dir = -c.lambda() / lam_mod * std::polar(1.0, (2 * p - 2) * ray_angles[ray]);
    const auto ts = fc::fc_eval_on_ray(c.fc_params(), dir, radii);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const Complex u = nodes[idx[k]].u;
      g[idx[k]] = g_from_t(u, radii[k] * dir, ts[k]);
    }
  }
  return g;
}

double point_to_ray(Complex z, double angle, double r0, double r1) {
  const Complex dir = std::polar(1.0, angle);
  const double t = std::clamp((z * std::conj(dir)).real(), std::min(r0, r1), std::max(r0, r1));
  return std::abs(z - t * dir);
}

double point_to_arc(Complex z, double radius, double a, double b) {
  double theta = std::arg(z);
  // bring theta into [a, a + 2 pi)
  while (theta < a) theta += 2 * kPi;
  while (theta >= a + 2 * kPi) theta -= 2 * kPi;
  if (theta <= b) return std::abs(std::abs(z) - radius);
  return std::min(std::abs(z - std::polar(radius, a)), std::abs(z - std::polar(radius, b)));
}

}  // namespace

Complex KeyholeContour::integrate(std::span<const Complex> weighted_values, std::span<const double> poles) const {
  Complex sum{0.0};
  const bool plain = weighted_values.empty();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    Complex term = plain ? nodes[k].du / (2.0 * kPi * kI) : weighted_values[k];
    for (double a : poles) term /= (nodes[k].u - a);
    sum += term;
  }
  return sum;
}

std::vector<Complex> KeyholeContour::cauchy_weights() const {
  std::vector<Complex> w(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) w[k] = nodes[k].du / (2.0 * kPi * kI);
  return w;
}

Complex KeyholeContour::cauchy(Complex a) const {
  Complex sum{0.0};
  for (const auto& n : nodes) sum += n.du / (n.u - a);
  return sum / (2.0 * kPi * kI);
}

KeyholeContour build_keyhole(double spectral_radius, const Coupling& c, int n_nodes) {
  if (!(spectral_radius >= 0.0)) throw NumericError(ErrorKind::InvalidArgument, "spectral radius must be >= 0");
  if (n_nodes < 64) throw NumericError(ErrorKind::InvalidArgument, "n_nodes must be >= 64");

  double r = 1.0;
  double psi = c.epsilon() / 2.0;
  if (!c.is_zero()) {
    const auto geo = fc::cut_geometry(c.fc_params(), c.lambda());
    double gap = kPi;
    for (double theta : geo.ray_angles) {
      const double m = std::remainder(theta, kPi);  // signed angle to the nearest point of the real axis
      gap = std::min(gap, std::abs(m));
    }
    if (!(gap > 1e-12)) throw NumericError(ErrorKind::CutCollision, "a cut ray of h_lambda lies on the real axis");
    psi = std::min(psi, gap / 2.0);
    r = std::min(1.0, geo.ray_start_radius / 1.5);
  }
  const double R = std::max(2.0 * spectral_radius, 2.0 * r);

  KeyholeContour gamma(c);
  gamma.R = R;
  gamma.r = r;
  gamma.psi = psi;

  const auto panels = keyhole_panels(r, R, psi);
  int order = std::max(8, static_cast<int>((n_nodes + panels.size() - 1) / panels.size()));

  // probes sit where the graded panels resolve them: the real axis and the
  // inner disk inside, and at least a panel length away outside.
  const std::vector<Complex> interior{0.0, 0.5 * r, -0.5 * r, Complex(0.0, 0.5 * r), 0.5 * R, -0.5 * R, 0.37 * R};
  const std::vector<Complex> exterior{R + 1.0, Complex(0.0, 1.5 * r), -1.2 * R, Complex(0.75 * R, 1.5 * R * std::tan(psi))};
  const std::vector<Complex> g_points{0.0, 0.5 * r, -0.5 * r, 0.5 * R};

  std::vector<Complex> g_vals;
  for (; order <= kMaxPanelOrder; order *= 2) {
    gamma.nodes = discretize(panels, order);
    gamma.panel_order = order;
    double worst = 0.0;
    for (Complex a : interior) worst = std::max(worst, std::abs(gamma.cauchy(a) - 1.0));
    for (Complex a : exterior) worst = std::max(worst, std::abs(gamma.cauchy(a)));
    if (worst > kCauchyTolerance) continue;
    g_vals = g_on_nodes(c, panels, gamma.nodes, order);
    double g_worst = 0.0;
    for (Complex a : g_points) {
      Complex sum{0.0};
      for (std::size_t k = 0; k < g_vals.size(); ++k) sum += g_vals[k] * gamma.nodes[k].du / (gamma.nodes[k].u - a);
      sum /= 2.0 * kPi * kI;
      const Complex direct = eval_map(MapKind::g, c, a);
      g_worst = std::max(g_worst, std::abs(sum - direct) / std::max(1.0, std::abs(direct)));
    }
    if (g_worst <= kCauchyTolerance) break;
  }
  if (order > kMaxPanelOrder) {
    throw NumericError(ErrorKind::QuadratureDivergence, "keyhole self-test did not pass at the maximal panel order");
  }

  if (!c.is_zero()) {
    for (const auto& n : gamma.nodes) {
      if (!(fc::fc_cut_distance(c.fc_params(), c.lambda(), n.u) > fc::kCutTolerance)) {
        throw NumericError(ErrorKind::CutCollision, "contour node touches a cut ray");
      }
    }
  }
  gamma.g_weights_.resize(gamma.nodes.size());
  for (std::size_t k = 0; k < gamma.nodes.size(); ++k) gamma.g_weights_[k] = g_vals[k] * gamma.nodes[k].du / (2.0 * kPi * kI);
  return gamma;
}

double min_spectrum_distance(const KeyholeContour& gamma, std::span<const double> eigenvalues) {
  const double R = gamma.R, r = gamma.r, psi = gamma.psi;
  double best = std::numeric_limits<double>::infinity();
  for (double mu : eigenvalues) {
    if (std::abs(mu) > R / 2.0 * (1.0 + 1e-14)) {
      std::ostringstream msg;
      msg << "eigenvalue " << mu << " outside the enclosed range |mu| <= R/2 = " << R / 2.0;
      throw NumericError(ErrorKind::SpectrumTooLarge, msg.str());
    }
    const Complex z = mu;
    double d = std::numeric_limits<double>::infinity();
    for (double angle : {psi, kPi - psi, kPi + psi, -psi}) d = std::min(d, point_to_ray(z, angle, r, R));
    d = std::min(d, point_to_arc(z, R, -psi, psi));
    d = std::min(d, point_to_arc(z, R, kPi - psi, kPi + psi));
    d = std::min(d, point_to_arc(z, r, psi, kPi - psi));
    d = std::min(d, point_to_arc(z, r, kPi + psi, 2 * kPi - psi));
    best = std::min(best, d);
  }
  if (best < r * std::sin(psi) * (1.0 - 1e-12)) {
    throw NumericError(ErrorKind::InvalidArgument, "spectrum closer to the keyhole than r sin(psi)");
  }
  return best;
}

MatrixC holo_apply(const std::function<Complex(Complex)>& phi, const KeyholeContour& gamma, const SpectralData& s) {
  const int n = s.dim();
  std::vector<Complex> weighted(gamma.nodes.size());
  for (std::size_t k = 0; k < gamma.nodes.size(); ++k) weighted[k] = phi(gamma.nodes[k].u) * gamma.nodes[k].du / (2.0 * kPi * kI);
  std::vector<Complex> values(n);
  for (int i = 0; i < n; ++i) {
    const double mu = s.eigenvalues[i];
    const Complex self = gamma.cauchy(mu);
    if (!(std::abs(self - 1.0) <= kCauchyTolerance * 100)) {
      std::ostringstream msg;
      msg << "Cauchy self-test at eigenvalue " << mu << " gives " << self;
      throw NumericError(ErrorKind::QuadratureDivergence, msg.str());
    }
    values[i] = gamma.integrate(weighted, {mu});
  }
  return s.reconstruct(values);
}

}  // namespace lvr
