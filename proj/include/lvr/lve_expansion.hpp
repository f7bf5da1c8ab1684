#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lvr/common.hpp"
#include "lvr/matrix_core.hpp"
#include "lvr/partition_oracle.hpp"
#include "lvr/scalar_maps.hpp"

namespace lvr {

/// Labeled tree on vertices 0..n-1; edges stored as (i, j) with i < j.
/// A forest (fewer than n-1 edges) is accepted by bkar_x_matrix only.
struct LabeledTree {
  int n = 1;
  std::vector<std::pair<int, int>> edges;

  std::vector<int> degrees() const;
  int max_degree() const;
  bool operator==(const LabeledTree&) const = default;
};

/// Tree for a Pruefer code over 0..n-1 (length n-2).
LabeledTree prufer_decode(int n, const std::vector<int>& code);
std::vector<int> prufer_encode(const LabeledTree& t);

/// All labeled trees on n vertices, n^(n-2) of them, in Pruefer-code order.
/// n = 1 gives the single empty tree. OutOfRange unless 1 <= n <= 7.
std::vector<LabeledTree> enumerate_trees(int n);

/// x_ii = 1, x_ij = min of w over the path i <-> j, 0 when there is no path.
/// w[k] belongs to t.edges[k].
MatrixR bkar_x_matrix(const LabeledTree& t, const std::vector<double>& w);

struct AmplitudeParams {
  long n_w = 2000;      // weakening-parameter draws
  long n_mc = 16;       // replica draws per w
  double fd_step = 1e-4;
  std::uint64_t seed = 1;
  int workers = 1;
  PartitionOptions quad;  // used for the n = 1 tree
};

struct AmplitudeEstimate {
  Complex value;
  double std_error = 0.0;
  long n_w_samples = 0;
  long n_mc_samples = 0;
  LabeledTree tree;
};

/// A_T = N^(-2) (2N)^(-(n-1)) int dw E_{x(w)}[ d_T prod_i S(K_i) ] where
/// every edge contracts sum_ab d/d(K_i)_ab d/d(K_j)_ba.
/// n = 1 is the single vertex amplitude. Trees need n <= 3, N <= 3 and
/// degree <= 2 (BudgetExceeded otherwise); the degree-2 vertex takes a
/// central difference of the gradient, checked once against half the step
/// (StepInstability).
AmplitudeEstimate tree_amplitude(const Coupling& c, const EnsembleSpec& spec, const LabeledTree& t, const AmplitudeParams& params = {});

struct SingleVertex {
  AmplitudeEstimate total;
  AmplitudeEstimate a1;  // N^(-2) E[S1]
  AmplitudeEstimate a2;  // N^(-2) E[S2]
};

/// N^(-2) E[S(lambda, K)] with its split. Quadrature needs N <= 3; Monte
/// Carlo uses params.n_mc samples. beta = 2 only.
SingleVertex single_vertex_amplitude(const Coupling& c, const EnsembleSpec& spec, PartitionMethod method,
                                     const AmplitudeParams& params = {});

struct LveSum {
  Complex value;
  double error = 0.0;              // root sum square of member errors
  double abs_sum = 0.0;            // sum_n 1/n! sum_T |A_T|
  std::vector<Complex> per_order;  // 1/n! sum_T A_T, n = 1..n_max
};

/// sum_{n <= n_max} 1/n! sum_T A_T, n_max <= 3.
LveSum lve_truncated_F(const Coupling& c, const EnsembleSpec& spec, int n_max, const AmplitudeParams& params = {});

}  // namespace lvr
