#include "ssbm/membership.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace ssbm {

namespace {

// Rows of `centrality` (c x n) weighted by `group_mass` (length c), then
// transposed to vertex-major and normalized per vertex.
void memberships(const Eigen::MatrixXd& centrality, const Eigen::VectorXd& group_mass,
                 Eigen::MatrixXd& out, std::vector<bool>& defined) {
  const auto c = centrality.rows();
  const auto n = centrality.cols();
  out = Eigen::MatrixXd::Zero(n, c);
  defined.assign(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    double total = 0.0;
    for (Eigen::Index r = 0; r < c; ++r) {
      out(i, r) = group_mass(r) * centrality(r, i);
      total += out(i, r);
    }
    if (total > 0.0) {
      out.row(i) /= total;
      defined[static_cast<std::size_t>(i)] = true;
    } else {
      out.row(i).setZero();
    }
  }
}

void require_groups(std::size_t c, const char* what) {
  if (c < 2) throw std::invalid_argument(std::string(what) + " requires at least two groups");
}

}  // namespace

SoftMembership soft_membership(const SsbmParams& p) {
  const Eigen::MatrixXd blocks = p.omega_pos + p.omega_neg;
  SoftMembership m;
  memberships(p.theta, blocks.rowwise().sum(), m.alpha, m.alpha_defined);
  memberships(p.phi, blocks.colwise().sum().transpose(), m.beta, m.beta_defined);
  return m;
}

HardAssignment hard_partition(const SoftMembership& m, Side side) {
  const auto& mat = m.matrix(side);
  const auto& defined = m.defined(side);
  std::vector<int> labels(m.vertex_count(), 0);
  HardAssignment out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!defined[i]) {
      out.undefined.push_back(i);
      continue;
    }
    const auto row = static_cast<Eigen::Index>(i);
    int best = 0;
    for (int r = 1; r < m.groups(); ++r) {
      if (mat(row, r) > mat(row, best)) best = r;
    }
    labels[i] = best;
  }
  out.partition = Partition(std::move(labels), std::max(1, m.groups()));
  return out;
}

double bridgeness(std::span<const double> row) {
  const std::size_t c = row.size();
  require_groups(c, "bridgeness");
  const double uniform = 1.0 / static_cast<double>(c);
  double spread = 0.0;
  for (double a : row) spread += (a - uniform) * (a - uniform);
  const double cd = static_cast<double>(c);
  return std::clamp(1.0 - std::sqrt(cd / (cd - 1.0) * spread), 0.0, 1.0);
}

double group_entropy(std::span<const double> row) {
  const std::size_t c = row.size();
  require_groups(c, "group entropy");
  double h = 0.0;
  for (double a : row) {
    if (a > 0.0) h -= a * std::log(a);
  }
  return std::clamp(h / std::log(static_cast<double>(c)), 0.0, 1.0);
}

VertexScores vertex_scores(const SoftMembership& m, Side side) {
  require_groups(static_cast<std::size_t>(m.groups()), "vertex scores");
  const auto& mat = m.matrix(side);
  VertexScores s;
  s.defined = m.defined(side);
  s.bridgeness.assign(m.vertex_count(), 0.0);
  s.entropy.assign(m.vertex_count(), 0.0);
  std::vector<double> row(static_cast<std::size_t>(m.groups()));
  for (std::size_t i = 0; i < m.vertex_count(); ++i) {
    if (!s.defined[i]) continue;
    for (int r = 0; r < m.groups(); ++r) row[r] = mat(static_cast<Eigen::Index>(i), r);
    s.bridgeness[i] = bridgeness(row);
    s.entropy[i] = group_entropy(row);
  }
  return s;
}

std::string to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::community:
      return "community-like";
    case StructureKind::disassortative:
      return "disassortative-like";
    case StructureKind::mixed:
      return "mixed";
  }
  return "mixed";
}

namespace {

// +1 diagonal-heavy, -1 off-diagonal-heavy, 0 no mass or exactly balanced.
int diagonal_lean(double diagonal, double total) {
  if (total < BlockImage::kAbsentMass) return 0;
  const double fraction = diagonal / total;
  if (fraction > BlockImage::kDiagonalThreshold) return 1;
  if (fraction < BlockImage::kDiagonalThreshold) return -1;
  return 0;
}

StructureKind classify(double pos_diag, double pos_total, double neg_diag, double neg_total) {
  const int pos = diagonal_lean(pos_diag, pos_total);
  const int neg = diagonal_lean(neg_diag, neg_total);
  const bool pos_absent = pos_total < BlockImage::kAbsentMass;
  const bool neg_absent = neg_total < BlockImage::kAbsentMass;
  if (pos_absent && neg_absent) return StructureKind::mixed;
  if ((pos == 1 || pos_absent) && (neg == -1 || neg_absent)) return StructureKind::community;
  if ((pos == -1 || pos_absent) && (neg == 1 || neg_absent)) {
    return StructureKind::disassortative;
  }
  return StructureKind::mixed;
}

}  // namespace

BlockImage block_image(const SsbmParams& p) {
  BlockImage image;
  image.omega_pos = p.omega_pos;
  image.omega_neg = p.omega_neg;
  const int c = p.groups();
  for (int r = 0; r < c; ++r) {
    image.outgoing.push_back(classify(p.omega_pos(r, r), p.omega_pos.row(r).sum(),
                                      p.omega_neg(r, r), p.omega_neg.row(r).sum()));
    image.incoming.push_back(classify(p.omega_pos(r, r), p.omega_pos.col(r).sum(),
                                      p.omega_neg(r, r), p.omega_neg.col(r).sum()));
  }
  return image;
}

nlohmann::json to_json(const BlockImage& image) {
  auto matrix = [](const Eigen::MatrixXd& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      auto row = nlohmann::json::array();
      for (Eigen::Index s = 0; s < m.cols(); ++s) row.push_back(m(r, s));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  auto kinds = [](const std::vector<StructureKind>& v) {
    auto out = nlohmann::json::array();
    for (auto k : v) out.push_back(to_string(k));
    return out;
  };
  return {{"omega_pos", matrix(image.omega_pos)},
          {"omega_neg", matrix(image.omega_neg)},
          {"outgoing", kinds(image.outgoing)},
          {"incoming", kinds(image.incoming)},
          {"classification",
           {{"advisory", true},
            {"rule", "diagonal share of a group's block mass above/below threshold"},
            {"diagonal_threshold", BlockImage::kDiagonalThreshold},
            {"absent_mass", BlockImage::kAbsentMass}}}};
}

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char ch : text) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

}  // namespace

void write_membership_csv(std::ostream& out, const SignedGraph& g, const SsbmParams& p) {
  const auto m = soft_membership(p);
  const int c = m.groups();
  const auto hard_out = hard_partition(m, Side::outgoing);
  const auto hard_in = hard_partition(m, Side::incoming);
  const bool scored = c >= 2;
  VertexScores s_out, s_in;
  if (scored) {
    s_out = vertex_scores(m, Side::outgoing);
    s_in = vertex_scores(m, Side::incoming);
  }

  out << "vertex,label_out,label_in,defined_out,defined_in";
  for (int r = 0; r < c; ++r) out << ",alpha_" << r;
  for (int r = 0; r < c; ++r) out << ",beta_" << r;
  out << ",bridgeness_out,entropy_out,bridgeness_in,entropy_in,theta,phi\n";

  auto score = [&](const VertexScores& s, const std::vector<double>& v, std::size_t i) {
    return scored && s.defined[i] ? format_double(v[i]) : std::string();
  };
  for (std::size_t i = 0; i < m.vertex_count(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const int lo = hard_out.partition.labels[i];
    const int li = hard_in.partition.labels[i];
    out << csv_field(g.name(i)) << ',' << lo << ',' << li << ',' << int(m.alpha_defined[i]) << ','
        << int(m.beta_defined[i]);
    for (int r = 0; r < c; ++r) out << ',' << format_double(m.alpha(row, r));
    for (int r = 0; r < c; ++r) out << ',' << format_double(m.beta(row, r));
    out << ',' << score(s_out, s_out.bridgeness, i) << ',' << score(s_out, s_out.entropy, i)
        << ',' << score(s_in, s_in.bridgeness, i) << ',' << score(s_in, s_in.entropy, i) << ','
        << format_double(p.theta(lo, row)) << ',' << format_double(p.phi(li, row)) << '\n';
  }
}

}  // namespace ssbm
