#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ssbm/em.hpp"
#include "ssbm/signed_graph.hpp"

namespace ssbm {

/// `split` keeps positive and negative weights in separate columns;
/// `signed_weights` uses the single block A+ - A-, which adds the two sign
/// patterns coherently when they carry the same partition.
enum class Profile { split, signed_weights };

/// Leading left singular vectors of the signed profile matrix, scaled by
/// their singular values. Row i of the profile matrix lists vertex i's
/// outgoing positive and negative weights, followed (for directed graphs) by
/// its incoming ones, so vertices with similar link profiles land close
/// together. Computed by block subspace iteration on the sparse Gram
/// operator; nothing n x n is ever formed.
Eigen::MatrixXd spectral_embedding(const SignedGraph& g, int dims, std::uint64_t seed,
                                   int iterations = 40, Profile profile = Profile::split);

/// Lloyd's algorithm from a k-means++ start. Deterministic in `seed`.
/// Requires 1 <= k <= rows.
std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                        int max_iters = 100);

/// Random positive parameters (as init_params) with each vertex's
/// centrality damped by `off_weight` in every group except its label.
SsbmParams seeded_params(const SignedGraph& g, const std::vector<int>& labels, int groups,
                         std::uint64_t seed, Mode mode, double off_weight = 0.1);

}  // namespace ssbm
