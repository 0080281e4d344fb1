#include "ssbm/signed_graph.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <utility>

namespace ssbm {

namespace {

using PairKey = std::pair<std::size_t, std::size_t>;

PairKey normalized(std::size_t a, std::size_t b, bool directed) {
  if (!directed && b < a) std::swap(a, b);
  return {a, b};
}

}  // namespace

SignedGraph::SignedGraph(std::size_t n, bool directed, std::vector<Edge> positive,
                         std::vector<Edge> negative, std::vector<std::string> names)
    : n_(n), directed_(directed), positive_(std::move(positive)),
      negative_(std::move(negative)), names_(std::move(names)) {
  if (names_.empty()) {
    names_.reserve(n_);
    for (std::size_t v = 0; v < n_; ++v) names_.push_back(std::to_string(v));
  }
  if (names_.size() != n_) {
    throw std::invalid_argument("SignedGraph: name count does not match vertex count");
  }
  {
    std::set<std::string_view> seen;
    for (const auto& s : names_) {
      if (!seen.insert(s).second) {
        throw std::invalid_argument("SignedGraph: duplicate vertex name '" + s + "'");
      }
    }
  }

  std::set<PairKey> pairs;
  auto check = [&](std::vector<Edge>& list, const char* which) {
    for (auto& e : list) {
      if (e.src >= n_ || e.dst >= n_) {
        throw std::invalid_argument(std::string("SignedGraph: ") + which +
                                    " edge endpoint out of range");
      }
      if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
        throw std::invalid_argument(std::string("SignedGraph: ") + which +
                                    " edge weight must be finite and > 0");
      }
      auto key = normalized(e.src, e.dst, directed_);
      e.src = key.first;
      e.dst = key.second;
      if (!pairs.insert(key).second) {
        throw std::invalid_argument("SignedGraph: pair (" + std::to_string(key.first) + ", " +
                                    std::to_string(key.second) + ") stored more than once");
      }
    }
  };
  check(positive_, "positive");
  check(negative_, "negative");
}

std::vector<double> SignedGraph::dense_adjacency() const {
  std::vector<double> a(n_ * n_, 0.0);
  auto fill = [&](const std::vector<Edge>& list, double sign) {
    for (const auto& e : list) {
      a[e.src * n_ + e.dst] = sign * e.weight;
      if (!directed_) a[e.dst * n_ + e.src] = sign * e.weight;
    }
  };
  fill(positive_, 1.0);
  fill(negative_, -1.0);
  return a;
}

std::vector<Edge> oriented_edges(const SignedGraph& g, Sign sign) {
  const auto& stored = g.edges(sign);
  if (g.directed()) return stored;
  std::vector<Edge> out;
  out.reserve(2 * stored.size());
  for (const auto& e : stored) {
    out.push_back(e);
    if (e.src != e.dst) out.push_back({e.dst, e.src, e.weight});
  }
  return out;
}

Partition::Partition(std::vector<int> labels_in, int groups_in)
    : labels(std::move(labels_in)), groups(groups_in) {
  if (groups < 1) throw std::invalid_argument("Partition: group count must be >= 1");
  for (int l : labels) {
    if (l < 0 || l >= groups) throw std::invalid_argument("Partition: label out of range");
  }
}

SignedGraph parse_edge_list(std::istream& in, bool directed) {
  std::vector<std::string> names;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<Edge> positive;
  std::vector<Edge> negative;
  std::set<PairKey> pairs;

  auto vertex = [&](const std::string& name) {
    auto [it, inserted] = index.try_emplace(name, names.size());
    if (inserted) names.push_back(name);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream fields(line);
    std::string src, dst, weight_text, extra;
    if (!(fields >> src >> dst >> weight_text) || (fields >> extra)) {
      throw ParseError(lineno, "expected 'src dst weight'");
    }

    std::string_view digits = weight_text;
    if (digits.size() > 1 && digits.front() == '+') digits.remove_prefix(1);
    double weight = 0.0;
    auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), weight);
    if (ec != std::errc{} || end != digits.data() + digits.size()) {
      throw ParseError(lineno, "weight '" + weight_text + "' is not a number");
    }
    if (!std::isfinite(weight)) throw ParseError(lineno, "weight must be finite");
    if (weight == 0.0) throw ParseError(lineno, "zero weight");

    std::size_t i = vertex(src);
    std::size_t j = vertex(dst);
    auto key = normalized(i, j, directed);
    if (!pairs.insert(key).second) {
      throw ParseError(lineno, "duplicate pair (" + src + ", " + dst + ")");
    }
    Edge e{key.first, key.second, std::abs(weight)};
    (weight > 0.0 ? positive : negative).push_back(e);
  }
  std::size_t n = names.size();
  return SignedGraph(n, directed, std::move(positive), std::move(negative), std::move(names));
}

SignedGraph parse_edge_list(std::string_view text, bool directed) {
  std::istringstream in{std::string(text)};
  return parse_edge_list(in, directed);
}

SignedGraph read_edge_list(const std::string& path, bool directed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return parse_edge_list(in, directed);
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

void emit_edge_list(std::ostream& out, const SignedGraph& g) {
  out << "# signed edge list: " << (g.directed() ? "directed" : "undirected")
      << " n=" << g.vertex_count() << " m+=" << g.positive_edges().size()
      << " m-=" << g.negative_edges().size() << '\n';
  for (const auto& e : g.positive_edges()) {
    out << g.name(e.src) << ' ' << g.name(e.dst) << ' ' << format_double(e.weight) << '\n';
  }
  for (const auto& e : g.negative_edges()) {
    out << g.name(e.src) << ' ' << g.name(e.dst) << ' ' << format_double(-e.weight) << '\n';
  }
}

std::string emit_edge_list(const SignedGraph& g) {
  std::ostringstream out;
  emit_edge_list(out, g);
  return out.str();
}

bool equivalent(const SignedGraph& a, const SignedGraph& b) {
  if (a.directed() != b.directed()) return false;
  auto keyed = [](const SignedGraph& g) {
    std::map<std::pair<std::string, std::string>, double> links;
    auto add = [&](const std::vector<Edge>& list, double sign) {
      for (const auto& e : list) {
        std::string s = g.name(e.src);
        std::string d = g.name(e.dst);
        if (!g.directed() && d < s) std::swap(s, d);
        links[{s, d}] = sign * e.weight;
      }
    };
    add(g.positive_edges(), 1.0);
    add(g.negative_edges(), -1.0);
    return links;
  };
  std::set<std::string> names_a(a.names().begin(), a.names().end());
  std::set<std::string> names_b(b.names().begin(), b.names().end());
  return names_a == names_b && keyed(a) == keyed(b);
}

std::vector<DegreeStats> signed_degree_stats(const SignedGraph& g) {
  std::vector<DegreeStats> stats(g.vertex_count());
  auto add = [&](const std::vector<Edge>& list, double DegreeStats::*field) {
    for (const auto& e : list) {
      stats[e.src].*field += e.weight;
      if (!g.directed() && e.src != e.dst) stats[e.dst].*field += e.weight;
    }
  };
  add(g.positive_edges(), &DegreeStats::positive);
  add(g.negative_edges(), &DegreeStats::negative);
  for (auto& s : stats) s.total = s.positive + s.negative;
  return stats;
}

nlohmann::json graph_summary(const SignedGraph& g) {
  double pos = 0.0;
  double neg = 0.0;
  for (const auto& e : g.positive_edges()) pos += e.weight;
  for (const auto& e : g.negative_edges()) neg += e.weight;
  return {{"n", g.vertex_count()},
          {"m_pos", g.positive_edges().size()},
          {"m_neg", g.negative_edges().size()},
          {"directed", g.directed()},
          {"total_pos_weight", pos},
          {"total_neg_weight", neg}};
}

}  // namespace ssbm
