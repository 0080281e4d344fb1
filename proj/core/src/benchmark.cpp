#include "ssbm/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "random.hpp"

namespace ssbm {

std::string to_string(PlantedStructure s) {
  return s == PlantedStructure::community ? "community" : "disassortative";
}

PlantedStructure structure_from_string(const std::string& text) {
  if (text == "community") return PlantedStructure::community;
  if (text == "disassortative") return PlantedStructure::disassortative;
  throw std::invalid_argument("unknown structure '" + text + "'");
}

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

struct PairProbabilities {
  double within = 0.0;
  double between = 0.0;
};

PairProbabilities pair_probabilities(const GeneratorConfig& cfg) {
  const double group_size = static_cast<double>(cfg.n) / cfg.groups;
  const double within_targets = group_size - 1.0;
  const double between_targets = static_cast<double>(cfg.n) - group_size;
  const double k_in = cfg.avg_degree * cfg.p_in;
  const double k_out = cfg.avg_degree * (1.0 - cfg.p_in);
  PairProbabilities p;
  if (k_in > 0.0) {
    if (within_targets <= 0.0 || k_in > within_targets) {
      throw std::invalid_argument("generator: within-group degree target " + format_double(k_in) +
                                  " exceeds the group size");
    }
    p.within = k_in / within_targets;
  }
  if (k_out > 0.0) {
    if (between_targets <= 0.0 || k_out > between_targets) {
      throw std::invalid_argument("generator: between-group degree target " +
                                  format_double(k_out) + " exceeds the available vertices");
    }
    p.between = k_out / between_targets;
  }
  return p;
}

}  // namespace

void GeneratorConfig::validate() const {
  if (groups < 1) throw std::invalid_argument("generator: groups must be >= 1");
  if (n == 0 || n % static_cast<std::size_t>(groups) != 0) {
    throw std::invalid_argument("generator: n must be a positive multiple of groups");
  }
  if (!is_probability(p_in) || !is_probability(p_plus) || !is_probability(p_minus)) {
    throw std::invalid_argument("generator: p_in, p_plus and p_minus must lie in [0, 1]");
  }
  if (!(avg_degree >= 0.0) || avg_degree >= static_cast<double>(n)) {
    throw std::invalid_argument("generator: avg_degree must lie in [0, n)");
  }
  pair_probabilities(*this);
}

nlohmann::json GeneratorConfig::to_json() const {
  return {{"n", n},           {"groups", groups},   {"avg_degree", avg_degree},
          {"p_in", p_in},     {"p_plus", p_plus},   {"p_minus", p_minus},
          {"mode", ssbm::to_string(mode)}, {"seed", seed}};
}

LabeledNetwork generate(const GeneratorConfig& cfg) {
  cfg.validate();
  const auto probs = pair_probabilities(cfg);
  const std::size_t group_size = cfg.n / static_cast<std::size_t>(cfg.groups);
  auto rng = detail::make_rng(cfg.seed);

  std::vector<int> labels(cfg.n);
  for (std::size_t v = 0; v < cfg.n; ++v) labels[v] = static_cast<int>(v / group_size);

  // Sign before noise; the noise probability flips it.
  const bool community = cfg.mode == PlantedStructure::community;
  const Sign within_sign = community ? Sign::positive : Sign::negative;
  const Sign between_sign = community ? Sign::negative : Sign::positive;
  const double within_flip = community ? cfg.p_minus : cfg.p_plus;
  const double between_flip = community ? cfg.p_plus : cfg.p_minus;
  auto flipped = [](Sign s) { return s == Sign::positive ? Sign::negative : Sign::positive; };

  std::vector<Edge> positive;
  std::vector<Edge> negative;
  for (std::size_t i = 0; i < cfg.n; ++i) {
    for (std::size_t j = i + 1; j < cfg.n; ++j) {
      const bool same = labels[i] == labels[j];
      // Two draws per pair regardless of outcome keep the stream aligned
      // across parameter values.
      const double link = detail::unit_double(rng);
      const double noise = detail::unit_double(rng);
      if (link >= (same ? probs.within : probs.between)) continue;
      Sign sign = same ? within_sign : between_sign;
      if (noise < (same ? within_flip : between_flip)) sign = flipped(sign);
      (sign == Sign::positive ? positive : negative).push_back({i, j, 1.0});
    }
  }
  return {SignedGraph(cfg.n, false, std::move(positive), std::move(negative)),
          Partition(std::move(labels), cfg.groups)};
}

MixedBlockDesign default_mixed_design() {
  MixedBlockDesign d;
  d.block_size = 32;
  d.rules = {
      {0, 0, 0.5, Sign::positive},   {1, 1, 0.5, Sign::positive},
      {1, 2, 0.15, Sign::negative},  {2, 2, 0.5, Sign::negative},
      {2, 0, 0.15, Sign::positive},  {3, 3, 0.5, Sign::negative},
      {3, 1, 0.15, Sign::negative},
  };
  return d;
}

nlohmann::json to_json(const MixedBlockDesign& design) {
  auto rules = nlohmann::json::array();
  for (const auto& r : design.rules) {
    rules.push_back({{"from", r.from},
                     {"to", r.to},
                     {"probability", r.probability},
                     {"sign", r.sign == Sign::positive ? "+" : "-"}});
  }
  return {{"blocks", 4}, {"block_size", design.block_size}, {"rules", rules}};
}

LabeledNetwork generate_mixed_blocks(std::uint64_t seed, const MixedBlockDesign& design) {
  constexpr int kBlocks = 4;
  if (design.block_size < 2) throw std::invalid_argument("mixed blocks: block_size must be >= 2");
  std::map<std::pair<int, int>, MixedBlockRule> rules;
  for (const auto& r : design.rules) {
    if (r.from < 0 || r.from >= kBlocks || r.to < 0 || r.to >= kBlocks ||
        !is_probability(r.probability)) {
      throw std::invalid_argument("mixed blocks: malformed rule");
    }
    if (!rules.emplace(std::pair{r.from, r.to}, r).second) {
      throw std::invalid_argument("mixed blocks: repeated block pair");
    }
  }

  const std::size_t n = design.block_size * kBlocks;
  std::vector<int> labels(n);
  for (std::size_t v = 0; v < n; ++v) labels[v] = static_cast<int>(v / design.block_size);

  auto rng = detail::make_rng(seed);
  std::vector<Edge> positive;
  std::vector<Edge> negative;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double u = detail::unit_double(rng);
      auto it = rules.find({labels[i], labels[j]});
      if (it == rules.end() || u >= it->second.probability) continue;
      (it->second.sign == Sign::positive ? positive : negative).push_back({i, j, 1.0});
    }
  }
  return {SignedGraph(n, true, std::move(positive), std::move(negative)),
          Partition(std::move(labels), kBlocks)};
}

double nmi(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw std::invalid_argument("nmi: partitions differ in size");
  if (a.size() == 0) throw std::invalid_argument("nmi: empty partitions");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> count_a;
  std::map<int, double> count_b;
  for (std::size_t v = 0; v < a.size(); ++v) {
    joint[{a.labels[v], b.labels[v]}] += 1.0;
    count_a[a.labels[v]] += 1.0;
    count_b[b.labels[v]] += 1.0;
  }
  const bool trivial_a = count_a.size() == 1;
  const bool trivial_b = count_b.size() == 1;
  if (trivial_a && trivial_b) return 1.0;
  if (trivial_a || trivial_b) {
    throw std::domain_error("nmi: undefined when exactly one partition has a single group");
  }

  // Terms are summed in sorted order so the result does not depend on label
  // values or argument order.
  auto sorted_sum = [](std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  };
  const double n = static_cast<double>(a.size());
  std::vector<double> terms;
  for (const auto& [key, nij] : joint) {
    terms.push_back(nij * std::log(nij * n / (count_a[key.first] * count_b[key.second])));
  }
  const double mutual = sorted_sum(std::move(terms));
  auto entropy_sum = [&](const std::map<int, double>& counts) {
    std::vector<double> t;
    for (const auto& [label, ni] : counts) t.push_back(ni * std::log(ni / n));
    return sorted_sum(std::move(t));
  };
  const double value = mutual / std::sqrt(entropy_sum(count_a) * entropy_sum(count_b));
  return std::clamp(value, 0.0, 1.0);
}

void write_labels(std::ostream& out, const SignedGraph& g, const Partition& p) {
  if (p.size() != g.vertex_count()) {
    throw std::invalid_argument("write_labels: partition does not match the graph");
  }
  out << "# vertex label\n";
  for (std::size_t v = 0; v < p.size(); ++v) out << g.name(v) << ' ' << p.labels[v] << '\n';
}

LabelFile read_labels(std::istream& in) {
  LabelFile file;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string name, extra;
    long long label = 0;
    if (!(fields >> name >> label) || (fields >> extra)) {
      throw ParseError(lineno, "expected 'vertex label'");
    }
    if (!seen.insert(name).second) throw ParseError(lineno, "vertex '" + name + "' repeated");
    file.names.push_back(name);
    file.labels.push_back(static_cast<int>(label));
  }
  return file;
}

LabelFile read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_labels(in);
}

std::pair<Partition, Partition> align_labels(const LabelFile& a, const LabelFile& b) {
  if (a.names.size() != b.names.size()) {
    throw std::invalid_argument("label files cover different vertex sets");
  }
  std::unordered_map<std::string, int> b_label;
  for (std::size_t k = 0; k < b.names.size(); ++k) b_label[b.names[k]] = b.labels[k];

  auto compact = [](const std::vector<int>& raw) {
    std::map<int, int> remap;
    std::vector<int> out;
    out.reserve(raw.size());
    for (int l : raw) {
      auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
      out.push_back(it->second);
    }
    const int groups = std::max(1, static_cast<int>(remap.size()));
    return Partition(std::move(out), groups);
  };

  std::vector<int> matched;
  matched.reserve(a.names.size());
  for (const auto& name : a.names) {
    auto it = b_label.find(name);
    if (it == b_label.end()) {
      throw std::invalid_argument("vertex '" + name + "' missing from the second label file");
    }
    matched.push_back(it->second);
  }
  return {compact(a.labels), compact(matched)};
}

}  // namespace ssbm
