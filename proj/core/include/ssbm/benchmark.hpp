#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssbm/signed_graph.hpp"

namespace ssbm {

/// community: positive links inside groups, negative links between them.
/// disassortative: the reverse.
enum class PlantedStructure { community, disassortative };

std::string to_string(PlantedStructure s);
PlantedStructure structure_from_string(const std::string& text);

/// Planted-partition signed benchmark. Vertices are split into `groups`
/// equal consecutive blocks. Each vertex expects avg_degree * p_in links
/// inside its group and avg_degree * (1 - p_in) links to other groups.
///
/// Sign noise follows the two conventions separately:
///   community mode: a between-group link turns positive with prob p_plus,
///       a within-group link turns negative with prob p_minus;
///   disassortative mode: a within-group link turns positive with prob
///       p_plus, a between-group link turns negative with prob p_minus.
struct GeneratorConfig {
  std::size_t n = 128;
  int groups = 4;
  double avg_degree = 16.0;
  double p_in = 0.8;
  double p_plus = 0.0;
  double p_minus = 0.0;
  PlantedStructure mode = PlantedStructure::community;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
};

struct LabeledNetwork {
  SignedGraph graph;
  Partition truth;
};

/// Undirected network; every vertex pair is linked independently with the
/// within- or between-group probability that meets the degree targets.
/// Throws std::invalid_argument when a target cannot be met.
LabeledNetwork generate(const GeneratorConfig& cfg);

/// Block-pair link rules for the directed four-block network.
struct MixedBlockRule {
  int from = 0;
  int to = 0;
  double probability = 0.0;
  Sign sign = Sign::positive;
};

struct MixedBlockDesign {
  std::size_t block_size = 32;
  std::vector<MixedBlockRule> rules;
};

/// Outgoing-side reading of the four blocks:
///   0: positive links only, inside the block
///   1: positive inside, negative towards block 2
///   2: negative inside, positive towards block 0
///   3: negative links only, inside and towards block 1
MixedBlockDesign default_mixed_design();
nlohmann::json to_json(const MixedBlockDesign& design);

LabeledNetwork generate_mixed_blocks(std::uint64_t seed,
                                     const MixedBlockDesign& design = default_mixed_design());

/// Normalized mutual information with natural logarithms. Label values need
/// not be contiguous. Returns 1 when both partitions have a single occupied
/// group and throws std::domain_error when only one of them does.
double nmi(const Partition& a, const Partition& b);

/// "name label" per line; '#' comments.
void write_labels(std::ostream& out, const SignedGraph& g, const Partition& p);

struct LabelFile {
  std::vector<std::string> names;
  std::vector<int> labels;
};

LabelFile read_labels(std::istream& in);
LabelFile read_labels(const std::string& path);

/// Lines both files up by vertex name and compacts labels to 0..k-1.
/// Throws std::invalid_argument if the two name sets differ.
std::pair<Partition, Partition> align_labels(const LabelFile& a, const LabelFile& b);

}  // namespace ssbm
