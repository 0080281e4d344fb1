#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ssbm {

enum class Sign { positive, negative };

/// One stored link. The weight is always a strictly positive magnitude; the
/// sign is carried by the list the edge lives in.
struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Weighted signed network stored as two sparse lists, A+ and A-, with
/// A = A+ - A-. Undirected graphs keep each edge once with src <= dst.
/// Instances are immutable once constructed.
class SignedGraph {
 public:
  SignedGraph() = default;

  /// Validates every invariant and throws std::invalid_argument on violation.
  /// For undirected graphs, endpoints are swapped so that src <= dst.
  /// `names` may be empty, in which case vertices are named "0".."n-1".
  SignedGraph(std::size_t n, bool directed, std::vector<Edge> positive,
              std::vector<Edge> negative, std::vector<std::string> names = {});

  std::size_t vertex_count() const { return n_; }
  bool directed() const { return directed_; }
  const std::vector<Edge>& positive_edges() const { return positive_; }
  const std::vector<Edge>& negative_edges() const { return negative_; }
  const std::vector<Edge>& edges(Sign sign) const {
    return sign == Sign::positive ? positive_ : negative_;
  }
  std::size_t edge_count() const { return positive_.size() + negative_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t v) const { return names_.at(v); }

  /// Dense signed adjacency A (row-major, n*n). Undirected edges fill both
  /// (i,j) and (j,i). Intended for small graphs and tests.
  std::vector<double> dense_adjacency() const;

 private:
  std::size_t n_ = 0;
  bool directed_ = true;
  std::vector<Edge> positive_;
  std::vector<Edge> negative_;
  std::vector<std::string> names_;
};

/// Links as seen by the likelihood: the stored edges of a directed graph, or
/// both orientations of every undirected edge (self-loops once).
std::vector<Edge> oriented_edges(const SignedGraph& g, Sign sign);

/// Hard group assignment, one label per vertex in [0, groups).
struct Partition {
  std::vector<int> labels;
  int groups = 0;

  Partition() = default;
  Partition(std::vector<int> labels, int groups);

  std::size_t size() const { return labels.size(); }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads "src dst weight" triples. Blank lines and lines starting with '#'
/// are skipped. Vertex names map to indices in order of first appearance.
/// Throws ParseError on malformed lines, zero weights and repeated pairs.
SignedGraph parse_edge_list(std::istream& in, bool directed);
SignedGraph parse_edge_list(std::string_view text, bool directed);
SignedGraph read_edge_list(const std::string& path, bool directed);

/// Writes a header comment followed by positive edges, then negative edges,
/// each in storage order. Weights use the shortest representation that
/// reads back to the same double.
void emit_edge_list(std::ostream& out, const SignedGraph& g);
std::string emit_edge_list(const SignedGraph& g);

/// Same vertex names and the same set of (name, name, signed weight) links.
/// Line order and vertex numbering are ignored.
bool equivalent(const SignedGraph& a, const SignedGraph& b);

struct DegreeStats {
  double positive = 0.0;
  double negative = 0.0;
  double total = 0.0;
};

/// Row sums of A+ and A- per vertex. For undirected graphs a vertex counts
/// every incident edge (self-loops once).
std::vector<DegreeStats> signed_degree_stats(const SignedGraph& g);

/// {"n", "m_pos", "m_neg", "directed", "total_pos_weight", "total_neg_weight"}
nlohmann::json graph_summary(const SignedGraph& g);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace ssbm
