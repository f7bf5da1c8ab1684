#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "lvr/lve_expansion.hpp"

using lvr::Complex;
using lvr::Coupling;
using lvr::EnsembleSpec;
using lvr::LabeledTree;
using lvr::PartitionMethod;

namespace {

bool is_spanning_tree(const LabeledTree& t) {
  if (static_cast<int>(t.edges.size()) != t.n - 1) return false;
  std::vector<int> parent(t.n);
  for (int v = 0; v < t.n; ++v) parent[v] = v;
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& [i, j] : t.edges) {
    if (!(0 <= i && i < j && j < t.n)) return false;
    const int a = find(i), b = find(j);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

}  // namespace

TEST_CASE("labeled trees") {
  CHECK(lvr::enumerate_trees(1).size() == 1);
  CHECK(lvr::enumerate_trees(1)[0].edges.empty());
  CHECK(lvr::enumerate_trees(2).size() == 1);
  long expected = 1;
  for (int n = 2; n <= 7; ++n) {
    const auto trees = lvr::enumerate_trees(n);
    expected = 1;
    for (int k = 0; k < n - 2; ++k) expected *= n;
    CHECK(static_cast<long>(trees.size()) == expected);
    std::set<std::vector<std::pair<int, int>>> seen;
    for (const auto& t : trees) {
      CHECK(is_spanning_tree(t));
      seen.insert(t.edges);
      CHECK(lvr::prufer_decode(n, lvr::prufer_encode(t)) == t);
    }
    CHECK(static_cast<long>(seen.size()) == expected);
  }
  CHECK_THROWS_AS(lvr::enumerate_trees(8), lvr::NumericError);
  CHECK_THROWS_AS(lvr::enumerate_trees(0), lvr::NumericError);
}

TEST_CASE("interpolation matrix") {
  const LabeledTree path{3, {{0, 1}, {1, 2}}};
  const auto x = lvr::bkar_x_matrix(path, {0.5, 0.2});
  CHECK(x(0, 2) == doctest::Approx(0.2));
  CHECK(x(0, 1) == doctest::Approx(0.5));
  CHECK(x(1, 1) == 1.0);
  const LabeledTree forest{4, {{0, 1}, {2, 3}}};
  const auto xf = lvr::bkar_x_matrix(forest, {0.7, 0.4});
  CHECK(xf(0, 2) == 0.0);
  CHECK(xf(3, 2) == doctest::Approx(0.4));
  CHECK(lvr::bkar_x_matrix(path, {1.0, 1.0}).isApprox(lvr::MatrixR::Ones(3, 3)));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int n = 2; n <= 6; ++n) {
    for (const auto& t : lvr::enumerate_trees(n)) {
      for (int k = 0; k < 20; ++k) {
        std::vector<double> w(n - 1);
        for (auto& v : w) v = unif(rng);
        const lvr::MatrixR x = lvr::bkar_x_matrix(t, w);
        CHECK(Eigen::SelfAdjointEigenSolver<lvr::MatrixR>(x).eigenvalues().minCoeff() >= -1e-12);
      }
    }
  }
}

TEST_CASE("amplitudes vanish at zero coupling") {
  const Coupling c(0.0, 2);
  const EnsembleSpec spec(2, 2);
  lvr::AmplitudeParams prm;
  prm.n_w = 8;
  prm.n_mc = 2;
  for (int n = 1; n <= 3; ++n)
    for (const auto& t : lvr::enumerate_trees(n)) CHECK(lvr::tree_amplitude(c, spec, t, prm).value == Complex(0.0));
  CHECK(lvr::lve_truncated_F(c, spec, 2, prm).value == Complex(0.0));
  CHECK_THROWS_AS(lvr::tree_amplitude(Coupling(0.1, 2), spec, lvr::enumerate_trees(4)[0], prm), lvr::NumericError);
  CHECK_THROWS_AS(lvr::tree_amplitude(Coupling(0.1, 2), EnsembleSpec(4, 2), lvr::enumerate_trees(2)[0], prm), lvr::NumericError);
}

TEST_CASE("single vertex split") {
  const Coupling c(0.05, 2);
  const EnsembleSpec spec(2, 2);
  const auto q = lvr::single_vertex_amplitude(c, spec, PartitionMethod::quadrature);
  CHECK(std::abs(q.a1.value + q.a2.value - q.total.value) <= 1e-14);
  lvr::AmplitudeParams prm;
  prm.n_mc = 40000;
  const auto mc = lvr::single_vertex_amplitude(c, spec, PartitionMethod::monte_carlo, prm);
  CHECK(std::abs(mc.total.value - q.total.value) <= 4 * mc.total.std_error);
  CHECK(std::abs(mc.a1.value - q.a1.value) <= 4 * mc.a1.std_error);
  CHECK(lvr::single_vertex_amplitude(Coupling(0.0, 2), spec, PartitionMethod::quadrature).total.value == Complex(0.0));
}

TEST_CASE("two-vertex truncation reproduces the free energy") {
  const Coupling c(0.005, 2);
  const EnsembleSpec spec(2, 2);
  lvr::AmplitudeParams prm;
  prm.n_w = 1000;
  prm.n_mc = 8;
  prm.workers = 2;
  const auto lve = lvr::lve_truncated_F(c, spec, 2, prm);
  const auto f = lvr::free_energy(c, spec, PartitionMethod::quadrature);
  CHECK(std::abs(lve.value - f.value) <= 3 * std::hypot(lve.error, f.error));
  CHECK(lve.per_order.size() == 2);

  prm.workers = 1;
  CHECK(lvr::lve_truncated_F(c, spec, 2, prm).value == lve.value);
}

TEST_CASE("three-vertex trees improve the truncation") {
  const Coupling c(0.2, 2);
  const EnsembleSpec spec(1, 2);
  lvr::AmplitudeParams prm;
  prm.n_w = 2000;
  prm.n_mc = 8;
  prm.workers = 2;
  const auto f = lvr::free_energy(c, spec, PartitionMethod::quadrature).value;
  const auto two = lvr::lve_truncated_F(c, spec, 2, prm);
  const auto three = lvr::lve_truncated_F(c, spec, 3, prm);
  MESSAGE("F = " << f.real() << "  n<=2: " << two.value.real() << " +- " << two.error << "  n<=3: " << three.value.real() << " +- " << three.error);
  CHECK(std::abs(three.value - f) < std::abs(two.value - f));
  CHECK(std::abs(three.value - f) <= 3 * three.error + std::abs(two.value - f) / 3);
}

TEST_CASE("standard error scales like one over root samples") {
  const Coupling c(0.05, 2);
  const EnsembleSpec spec(2, 2);
  const LabeledTree edge{2, {{0, 1}}};
  std::vector<double> lx, ly;
  for (long nw : {100L, 400L, 1600L}) {
    lvr::AmplitudeParams prm;
    prm.n_w = nw;
    prm.n_mc = 1;
    prm.workers = 2;
    lx.push_back(std::log(static_cast<double>(nw)));
    ly.push_back(std::log(lvr::tree_amplitude(c, spec, edge, prm).std_error));
  }
  const double mx = (lx[0] + lx[1] + lx[2]) / 3, my = (ly[0] + ly[1] + ly[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int k = 0; k < 3; ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  CHECK(std::abs(sxy / sxx + 0.5) <= 0.1);
}
