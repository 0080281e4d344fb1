#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "ssbm/em.hpp"
#include "ssbm/signed_graph.hpp"

namespace ssbm {

enum class Side { outgoing, incoming };

/// Soft group memberships. alpha(i, r) is the probability that vertex i
/// belongs to group r seen as the tail of links; beta(j, s) the same from
/// the head side. Rows of vertices that carry no links on a side cannot be
/// normalized; they are zero and flagged undefined.
struct SoftMembership {
  Eigen::MatrixXd alpha;
  Eigen::MatrixXd beta;
  std::vector<bool> alpha_defined;
  std::vector<bool> beta_defined;

  int groups() const { return static_cast<int>(alpha.cols()); }
  std::size_t vertex_count() const { return static_cast<std::size_t>(alpha.rows()); }
  const Eigen::MatrixXd& matrix(Side side) const {
    return side == Side::outgoing ? alpha : beta;
  }
  const std::vector<bool>& defined(Side side) const {
    return side == Side::outgoing ? alpha_defined : beta_defined;
  }
};

SoftMembership soft_membership(const SsbmParams& p);

struct HardAssignment {
  Partition partition;
  /// Vertices whose membership row was undefined; they are placed in group 0.
  std::vector<std::size_t> undefined;
};

/// argmax per row; ties resolve to the lowest group index.
HardAssignment hard_partition(const SoftMembership& m, Side side);

/// 1 - sqrt(c/(c-1) * sum_r (a_r - 1/c)^2). Requires c >= 2.
double bridgeness(std::span<const double> row);

/// -sum_r a_r ln a_r / ln c with 0 ln 0 = 0. Requires c >= 2.
double group_entropy(std::span<const double> row);

struct VertexScores {
  std::vector<double> bridgeness;
  std::vector<double> entropy;
  /// False where the membership row is undefined; scores there are 0.
  std::vector<bool> defined;
};

VertexScores vertex_scores(const SoftMembership& m, Side side);

enum class StructureKind { community, disassortative, mixed };
std::string to_string(StructureKind kind);

/// Coarse-grained image of the fitted network: the two block matrices plus
/// a per-group reading of each. A group is community-like on a side when
/// more than half of its positive block mass sits on the diagonal and less
/// than half of its negative mass does; disassortative-like for the mirror
/// case. A sign with no mass in that group's row (or column) imposes no
/// condition. The labels are a heuristic reading, not part of the model.
struct BlockImage {
  Eigen::MatrixXd omega_pos;
  Eigen::MatrixXd omega_neg;
  std::vector<StructureKind> outgoing;
  std::vector<StructureKind> incoming;

  static constexpr double kDiagonalThreshold = 0.5;
  static constexpr double kAbsentMass = 1e-6;
};

BlockImage block_image(const SsbmParams& p);

nlohmann::json to_json(const BlockImage& image);

/// One record per vertex: name, hard labels on both sides, alpha and beta
/// rows, bridgeness and entropy on both sides (empty when c = 1 or the row
/// is undefined), theta and phi centrality in the vertex's own outgoing /
/// incoming group.
void write_membership_csv(std::ostream& out, const SignedGraph& g, const SsbmParams& p);

}  // namespace ssbm
