#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "ssbm/ssbm.hpp"

namespace ssbm::testing {

// Random signed graph with m distinct links (self-loops allowed) and weights
// in {1, 2, 3} or (0.5, 3) when `real_weights`.
inline SignedGraph random_graph(std::mt19937& rng, std::size_t n, std::size_t m, bool directed,
                                bool real_weights = false) {
  std::uniform_int_distribution<std::size_t> vertex(0, n - 1);
  std::uniform_int_distribution<int> small(1, 3);
  std::uniform_real_distribution<double> real(0.5, 3.0);
  std::bernoulli_distribution negative(0.4);
  std::set<std::pair<std::size_t, std::size_t>> used;
  std::vector<Edge> pos, neg;
  const std::size_t cap = directed ? n * n : n * (n + 1) / 2;
  while (used.size() < std::min(m, cap)) {
    auto i = vertex(rng);
    auto j = vertex(rng);
    if (!directed && i > j) std::swap(i, j);
    if (!used.insert({i, j}).second) continue;
    const double w = real_weights ? real(rng) : small(rng);
    (negative(rng) ? neg : pos).push_back({i, j, w});
  }
  return SignedGraph(n, directed, std::move(pos), std::move(neg));
}

inline Eigen::MatrixXd random_stochastic(std::mt19937& rng, Eigen::Index rows, Eigen::Index cols,
                                         bool whole_matrix) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  }
  if (whole_matrix) {
    m /= m.sum();
  } else {
    for (Eigen::Index i = 0; i < rows; ++i) m.row(i) /= m.row(i).sum();
  }
  return m;
}

inline SsbmParams random_params(std::mt19937& rng, int c, std::size_t n, bool tied = false) {
  SsbmParams p;
  p.omega_pos = random_stochastic(rng, c, c, true);
  p.omega_neg = random_stochastic(rng, c, c, true);
  p.theta = random_stochastic(rng, c, static_cast<Eigen::Index>(n), false);
  p.phi = tied ? p.theta : random_stochastic(rng, c, static_cast<Eigen::Index>(n), false);
  if (tied) {
    p.omega_pos = (0.5 * (p.omega_pos + p.omega_pos.transpose())).eval();
    p.omega_neg = (0.5 * (p.omega_neg + p.omega_neg.transpose())).eval();
  }
  return p;
}

// Two disjoint positive cliques of size k each, vertices 0..k-1 and k..2k-1.
inline SignedGraph two_cliques(std::size_t k) {
  std::vector<Edge> pos;
  for (std::size_t block = 0; block < 2; ++block) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) pos.push_back({block * k + i, block * k + j, 1.0});
    }
  }
  return SignedGraph(2 * k, false, std::move(pos), {});
}

}  // namespace ssbm::testing
