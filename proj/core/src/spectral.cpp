#include "ssbm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "random.hpp"

namespace ssbm {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// x -> sum over profile blocks B of B B^T x.
class GramOperator {
 public:
  GramOperator(const SignedGraph& g, Profile profile)
      : n_(static_cast<Eigen::Index>(g.vertex_count())),
        directed_(g.directed()),
        pos_(oriented_edges(g, Sign::positive)),
        neg_(oriented_edges(g, Sign::negative)) {
    if (profile == Profile::signed_weights) {
      // One block A+ - A-.
      for (auto e : neg_) {
        e.weight = -e.weight;
        pos_.push_back(e);
      }
      neg_.clear();
    }
  }

  RowMatrix apply(const RowMatrix& x) const {
    RowMatrix out = RowMatrix::Zero(n_, x.cols());
    RowMatrix scratch(n_, x.cols());
    for (const auto* links : {&pos_, &neg_}) {
      if (links->empty()) continue;
      // A A^T x
      scratch.setZero();
      for (const auto& e : *links) scratch.row(idx(e.dst)) += e.weight * x.row(idx(e.src));
      for (const auto& e : *links) out.row(idx(e.src)) += e.weight * scratch.row(idx(e.dst));
      if (!directed_) continue;
      // A^T A x
      scratch.setZero();
      for (const auto& e : *links) scratch.row(idx(e.src)) += e.weight * x.row(idx(e.dst));
      for (const auto& e : *links) out.row(idx(e.dst)) += e.weight * scratch.row(idx(e.src));
    }
    return out;
  }

 private:
  static Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

  Eigen::Index n_;
  bool directed_;
  std::vector<Edge> pos_;
  std::vector<Edge> neg_;
};

RowMatrix orthonormalize(const RowMatrix& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
  return q;
}

}  // namespace

Eigen::MatrixXd spectral_embedding(const SignedGraph& g, int dims, std::uint64_t seed,
                                   int iterations, Profile profile) {
  const auto n = static_cast<Eigen::Index>(g.vertex_count());
  if (dims < 1) throw std::invalid_argument("spectral_embedding: dims must be >= 1");
  if (n == 0) return Eigen::MatrixXd(0, dims);
  const Eigen::Index d = std::min<Eigen::Index>(dims, n);
  const Eigen::Index block = std::min<Eigen::Index>(n, d + 8);

  GramOperator gram(g, profile);
  auto rng = detail::make_rng(seed);
  RowMatrix q(n, block);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < block; ++j) q(i, j) = detail::unit_double(rng) - 0.5;
  }
  q = orthonormalize(q);
  for (int it = 0; it < iterations; ++it) q = orthonormalize(gram.apply(q));

  const Eigen::MatrixXd small = q.transpose() * gram.apply(q);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (small + small.transpose()));
  // Eigenvalues come out ascending; keep the largest d.
  Eigen::MatrixXd out(n, dims);
  out.setZero();
  for (Eigen::Index k = 0; k < d; ++k) {
    const Eigen::Index col = block - 1 - k;
    const double sigma = std::sqrt(std::max(eig.eigenvalues()(col), 0.0));
    out.col(k) = q * eig.eigenvectors().col(col) * sigma;
  }
  return out;
}

std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                        int max_iters) {
  const auto n = points.rows();
  if (k < 1 || k > n) throw std::invalid_argument("kmeans: need 1 <= k <= number of points");
  auto rng = detail::make_rng(seed);
  auto pick = [&](Eigen::Index count) {
    return std::min<Eigen::Index>(
        static_cast<Eigen::Index>(detail::unit_double(rng) * static_cast<double>(count)),
        count - 1);
  };

  // k-means++ seeding.
  Eigen::MatrixXd centers(k, points.cols());
  centers.row(0) = points.row(pick(n));
  Eigen::VectorXd nearest = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::max());
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest(i) = std::min(nearest(i), (points.row(i) - centers.row(c - 1)).squaredNorm());
    }
    const double total = nearest.sum();
    Eigen::Index chosen = pick(n);
    if (total > 0.0) {
      double target = detail::unit_double(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= nearest(i);
        if (target < 0.0 || i == n - 1) {
          chosen = i;
          break;
        }
      }
    }
    centers.row(c) = points.row(chosen);
  }

  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::max();
      for (int c = 0; c < k; ++c) {
        const double dist = (points.row(i) - centers.row(c)).squaredNorm();
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      auto& l = labels[static_cast<std::size_t>(i)];
      if (l != best) {
        l = best;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int l = labels[static_cast<std::size_t>(i)];
      sums.row(l) += points.row(i);
      ++counts[static_cast<std::size_t>(l)];
    }
    // Empty clusters keep their previous center.
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
      }
    }
  }
  return labels;
}

SsbmParams seeded_params(const SignedGraph& g, const std::vector<int>& labels, int groups,
                         std::uint64_t seed, Mode mode, double off_weight) {
  if (labels.size() != g.vertex_count()) {
    throw std::invalid_argument("seeded_params: one label per vertex required");
  }
  SsbmParams p = init_params(g, groups, seed, mode);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    for (int r = 0; r < groups; ++r) {
      if (r == labels[i]) continue;
      p.theta(r, col) *= off_weight;
      p.phi(r, col) *= off_weight;
    }
  }
  for (int r = 0; r < groups; ++r) {
    p.theta.row(r) /= p.theta.row(r).sum();
    p.phi.row(r) /= p.phi.row(r).sum();
  }
  return p;
}

}  // namespace ssbm
