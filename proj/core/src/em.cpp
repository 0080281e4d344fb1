#include "ssbm/em.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "random.hpp"
#include "ssbm/spectral.hpp"

namespace ssbm {

std::string to_string(Mode mode) {
  return mode == Mode::directed ? "directed" : "undirected";
}

Mode mode_from_string(const std::string& text) {
  if (text == "directed") return Mode::directed;
  if (text == "undirected") return Mode::undirected;
  throw std::invalid_argument("unknown mode '" + text + "'");
}

std::string to_string(InitStrategy s) {
  return s == InitStrategy::spectral ? "spectral" : "random";
}

InitStrategy init_from_string(const std::string& text) {
  if (text == "spectral") return InitStrategy::spectral;
  if (text == "random") return InitStrategy::random;
  throw std::invalid_argument("unknown init strategy '" + text + "'");
}

std::optional<std::string> check_invariants(const SsbmParams& p, double tol) {
  const auto c = p.omega_pos.rows();
  if (c < 1) return "group count must be >= 1";
  if (p.omega_pos.cols() != c || p.omega_neg.rows() != c || p.omega_neg.cols() != c) {
    return "omega matrices must be c x c";
  }
  if (p.theta.rows() != c || p.phi.rows() != c || p.phi.cols() != p.theta.cols()) {
    return "theta and phi must be c x n";
  }
  auto non_negative = [](const Eigen::MatrixXd& m) {
    return m.allFinite() && (m.array() >= 0.0).all();
  };
  if (!non_negative(p.omega_pos) || !non_negative(p.omega_neg) || !non_negative(p.theta) ||
      !non_negative(p.phi)) {
    return "parameters must be finite and non-negative";
  }
  if (std::abs(p.omega_pos.sum() - 1.0) > tol) return "omega_pos does not sum to 1";
  if (std::abs(p.omega_neg.sum() - 1.0) > tol) return "omega_neg does not sum to 1";
  for (Eigen::Index r = 0; r < c; ++r) {
    if (std::abs(p.theta.row(r).sum() - 1.0) > tol) {
      return "theta row " + std::to_string(r) + " does not sum to 1";
    }
    if (std::abs(p.phi.row(r).sum() - 1.0) > tol) {
      return "phi row " + std::to_string(r) + " does not sum to 1";
    }
  }
  return std::nullopt;
}

SsbmParams permute_groups(const SsbmParams& p, std::span<const int> perm) {
  const int c = p.groups();
  if (static_cast<int>(perm.size()) != c) {
    throw std::invalid_argument("permute_groups: permutation size mismatch");
  }
  SsbmParams out = p;
  for (int r = 0; r < c; ++r) {
    for (int s = 0; s < c; ++s) {
      out.omega_pos(perm[r], perm[s]) = p.omega_pos(r, s);
      out.omega_neg(perm[r], perm[s]) = p.omega_neg(r, s);
    }
    out.theta.row(perm[r]) = p.theta.row(r);
    out.phi.row(perm[r]) = p.phi.row(r);
  }
  return out;
}

namespace {

void require_compatible(const SignedGraph& g, const SsbmParams& p) {
  if (p.vertex_count() != g.vertex_count()) {
    throw std::invalid_argument("parameters cover " + std::to_string(p.vertex_count()) +
                                " vertices but the graph has " +
                                std::to_string(g.vertex_count()));
  }
}

// Sufficient statistics for the M-step: weighted posterior mass per block
// pair and per (group, vertex) on the tail and head sides.
struct Accumulators {
  Eigen::MatrixXd omega_pos;
  Eigen::MatrixXd omega_neg;
  Eigen::MatrixXd tail;
  Eigen::MatrixXd head;
  bool has_pos = false;
  bool has_neg = false;

  Accumulators(int c, std::size_t n)
      : omega_pos(Eigen::MatrixXd::Zero(c, c)),
        omega_neg(Eigen::MatrixXd::Zero(c, c)),
        tail(Eigen::MatrixXd::Zero(c, static_cast<Eigen::Index>(n))),
        head(Eigen::MatrixXd::Zero(c, static_cast<Eigen::Index>(n))) {}
};

// Fills table[r*c+s] = omega(r,s) theta(r,i) phi(s,j) and returns the sum.
double joint_table(const Eigen::MatrixXd& omega, const SsbmParams& p, const Edge& e,
                   std::span<double> table) {
  const Eigen::Index c = omega.rows();
  const double* th = p.theta.col(static_cast<Eigen::Index>(e.src)).data();
  const double* ph = p.phi.col(static_cast<Eigen::Index>(e.dst)).data();
  double total = 0.0;
  for (Eigen::Index r = 0; r < c; ++r) {
    const double tr = th[r];
    for (Eigen::Index s = 0; s < c; ++s) {
      const double v = omega(r, s) * tr * ph[s];
      table[static_cast<std::size_t>(r * c + s)] = v;
      total += v;
    }
  }
  return total;
}

void require_positive(double total, const Edge& e) {
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DegenerateParameters("link (" + std::to_string(e.src) + ", " + std::to_string(e.dst) +
                               ") has zero probability under the current parameters");
  }
}

void add_posterior(Accumulators& acc, Eigen::MatrixXd& omega_acc, const Edge& e,
                   std::span<const double> q, double scale) {
  const Eigen::Index c = omega_acc.rows();
  double* tail = acc.tail.col(static_cast<Eigen::Index>(e.src)).data();
  double* head = acc.head.col(static_cast<Eigen::Index>(e.dst)).data();
  for (Eigen::Index r = 0; r < c; ++r) {
    double row = 0.0;
    for (Eigen::Index s = 0; s < c; ++s) {
      const double v = scale * q[static_cast<std::size_t>(r * c + s)];
      omega_acc(r, s) += v;
      head[s] += v;
      row += v;
    }
    tail[r] += row;
  }
}

// One fused E+M sweep: accumulates posterior mass under `p` and returns the
// log-likelihood of `p`. Links are visited in a fixed order.
double collect_statistics(std::span<const Edge> pos, std::span<const Edge> neg, const SsbmParams& p,
                  Accumulators& acc) {
  const int c = p.groups();
  std::vector<double> table(static_cast<std::size_t>(c) * c);
  double ll = 0.0;
  auto sweep = [&](std::span<const Edge> links, const Eigen::MatrixXd& omega,
                   Eigen::MatrixXd& omega_acc) {
    for (const auto& e : links) {
      const double total = joint_table(omega, p, e, table);
      require_positive(total, e);
      ll += e.weight * std::log(total);
      add_posterior(acc, omega_acc, e, table, e.weight / total);
    }
  };
  sweep(pos, p.omega_pos, acc.omega_pos);
  sweep(neg, p.omega_neg, acc.omega_neg);
  acc.has_pos = !pos.empty();
  acc.has_neg = !neg.empty();
  return ll;
}

void normalize_rows(Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double total = m.row(r).sum();
    if (total > 0.0) {
      m.row(r) /= total;
    } else {
      m.row(r).setConstant(1.0 / static_cast<double>(m.cols()));
    }
  }
}

Eigen::MatrixXd normalized_block(const Eigen::MatrixXd& acc, bool present) {
  const auto c = acc.rows();
  if (!present) return Eigen::MatrixXd::Constant(c, c, 1.0 / static_cast<double>(c * c));
  return acc / acc.sum();
}

SsbmParams finalize(Accumulators acc, Mode mode) {
  SsbmParams p;
  p.omega_pos = normalized_block(acc.omega_pos, acc.has_pos);
  p.omega_neg = normalized_block(acc.omega_neg, acc.has_neg);
  if (mode == Mode::undirected) {
    p.theta = acc.tail + acc.head;
    normalize_rows(p.theta);
    p.phi = p.theta;
  } else {
    p.theta = std::move(acc.tail);
    p.phi = std::move(acc.head);
    normalize_rows(p.theta);
    normalize_rows(p.phi);
  }
  return p;
}

bool close_enough(double previous, double current, double rel_tol) {
  return std::abs(current - previous) / (std::abs(previous) + 1.0) < rel_tol;
}

}  // namespace

double log_likelihood(const SignedGraph& g, const SsbmParams& p) {
  require_compatible(g, p);
  const int c = p.groups();
  std::vector<double> table(static_cast<std::size_t>(c) * c);
  double ll = 0.0;
  for (Sign sign : {Sign::positive, Sign::negative}) {
    const auto& omega = sign == Sign::positive ? p.omega_pos : p.omega_neg;
    for (const auto& e : oriented_edges(g, sign)) {
      const double total = joint_table(omega, p, e, table);
      require_positive(total, e);
      ll += e.weight * std::log(total);
    }
  }
  return ll;
}

EdgeResponsibilities e_step(const SignedGraph& g, const SsbmParams& p) {
  require_compatible(g, p);
  EdgeResponsibilities q;
  q.groups = p.groups();
  q.positive_links = oriented_edges(g, Sign::positive);
  q.negative_links = oriented_edges(g, Sign::negative);
  const std::size_t cc = static_cast<std::size_t>(q.groups) * q.groups;
  auto fill = [&](const std::vector<Edge>& links, const Eigen::MatrixXd& omega,
                  std::vector<double>& out) {
    out.assign(links.size() * cc, 0.0);
    for (std::size_t k = 0; k < links.size(); ++k) {
      std::span<double> table(out.data() + k * cc, cc);
      const double total = joint_table(omega, p, links[k], table);
      require_positive(total, links[k]);
      for (auto& v : table) v /= total;
    }
  };
  fill(q.positive_links, p.omega_pos, q.q_pos);
  fill(q.negative_links, p.omega_neg, q.q_neg);
  return q;
}

SsbmParams m_step(const SignedGraph& g, const EdgeResponsibilities& q, Mode mode) {
  const std::size_t cc = static_cast<std::size_t>(q.groups) * q.groups;
  if (q.q_pos.size() != q.positive_links.size() * cc ||
      q.q_neg.size() != q.negative_links.size() * cc) {
    throw std::invalid_argument("m_step: responsibility tables do not match their links");
  }
  Accumulators acc(q.groups, g.vertex_count());
  for (std::size_t k = 0; k < q.positive_links.size(); ++k) {
    const auto& e = q.positive_links[k];
    add_posterior(acc, acc.omega_pos, e, q.table(Sign::positive, k), e.weight);
  }
  for (std::size_t k = 0; k < q.negative_links.size(); ++k) {
    const auto& e = q.negative_links[k];
    add_posterior(acc, acc.omega_neg, e, q.table(Sign::negative, k), e.weight);
  }
  acc.has_pos = !q.positive_links.empty();
  acc.has_neg = !q.negative_links.empty();
  return finalize(std::move(acc), mode);
}

SsbmParams init_params(const SignedGraph& g, int groups, std::uint64_t seed, Mode mode) {
  if (groups < 1) throw std::invalid_argument("init_params: group count must be >= 1");
  const auto c = static_cast<Eigen::Index>(groups);
  const auto n = static_cast<Eigen::Index>(g.vertex_count());
  auto rng = detail::make_rng(seed);
  auto draw = [&rng] { return 1e-3 + (1.0 - 1e-3) * detail::unit_double(rng); };
  auto random_matrix = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = draw();
    }
    return m;
  };

  SsbmParams p;
  p.omega_pos = random_matrix(c, c);
  p.omega_neg = random_matrix(c, c);
  if (c == 1) {
    p.theta = Eigen::MatrixXd::Ones(1, n);
    p.phi = p.theta;
  } else {
    p.theta = random_matrix(c, n);
    p.phi = mode == Mode::undirected ? p.theta : random_matrix(c, n);
  }
  if (mode == Mode::undirected) {
    p.omega_pos = (p.omega_pos + p.omega_pos.transpose()).eval();
    p.omega_neg = (p.omega_neg + p.omega_neg.transpose()).eval();
  }
  p.omega_pos /= p.omega_pos.sum();
  p.omega_neg /= p.omega_neg.sum();
  normalize_rows(p.theta);
  normalize_rows(p.phi);
  return p;
}

void FitConfig::validate() const {
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be > 0");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

FitResult run_em(const SignedGraph& g, SsbmParams start, Mode mode, int max_iters,
                 double rel_tol) {
  require_compatible(g, start);
  const auto pos = oriented_edges(g, Sign::positive);
  const auto neg = oriented_edges(g, Sign::negative);
  const int c = start.groups();
  const std::size_t n = g.vertex_count();

  FitResult result;
  result.mode = mode;
  result.params = std::move(start);
  Accumulators acc(c, n);
  double ll = collect_statistics(pos, neg, result.params, acc);
  result.trace.push_back(ll);

  for (int it = 1; it <= max_iters; ++it) {
    result.params = finalize(std::move(acc), mode);
    acc = Accumulators(c, n);
    const double next = collect_statistics(pos, neg, result.params, acc);
    result.trace.push_back(next);
    result.iterations = it;
    const bool done = close_enough(ll, next, rel_tol);
    ll = next;
    if (done) {
      result.converged = true;
      break;
    }
  }
  result.log_likelihood = ll;
  return result;
}

FitResult fit(const SignedGraph& g, int groups, const FitConfig& cfg) {
  cfg.validate();
  if (groups < 1) throw std::invalid_argument("fit: group count must be >= 1");
  if (g.edge_count() == 0) throw std::invalid_argument("fit: graph has no edges");

  std::vector<std::optional<FitResult>> runs(static_cast<std::size_t>(cfg.restarts));
  std::vector<std::string> failures(runs.size());

  const bool spectral = cfg.init == InitStrategy::spectral && groups >= 2 &&
                        g.vertex_count() >= static_cast<std::size_t>(groups);
  // Even restarts cluster the split profile, odd ones the signed profile.
  Eigen::MatrixXd embedding[2];
  if (spectral) {
    embedding[0] = spectral_embedding(g, groups, cfg.seed);
    if (cfg.restarts > 1) {
      embedding[1] = spectral_embedding(g, groups, cfg.seed, 40, Profile::signed_weights);
    }
  }

  auto one = [&](std::size_t k) {
    const std::uint64_t seed = cfg.seed + k;
    try {
      auto start = spectral ? seeded_params(g, kmeans(embedding[k % 2], groups, seed), groups,
                                            seed, cfg.mode)
                            : init_params(g, groups, seed, cfg.mode);
      auto r = run_em(g, std::move(start), cfg.mode, cfg.max_iters, cfg.rel_tol);
      r.restart_index = static_cast<int>(k);
      r.seed = seed;
      runs[k] = std::move(r);
    } catch (const DegenerateParameters& e) {
      failures[k] = e.what();
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), runs.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < runs.size(); ++k) one(k);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = w; k < runs.size(); k += workers) one(k);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  std::optional<FitResult> best;
  for (auto& r : runs) {
    if (r && (!best || r->log_likelihood > best->log_likelihood)) best = std::move(r);
  }
  if (!best) {
    throw DegenerateParameters("all " + std::to_string(cfg.restarts) +
                               " restarts failed; last error: " + failures.back());
  }
  return std::move(*best);
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* field) {
  const auto& rows = j.at(field);
  const auto nrows = static_cast<Eigen::Index>(rows.size());
  const auto ncols = nrows == 0 ? 0 : static_cast<Eigen::Index>(rows.at(0).size());
  Eigen::MatrixXd m(nrows, ncols);
  for (Eigen::Index r = 0; r < nrows; ++r) {
    const auto& row = rows.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != ncols) {
      throw std::invalid_argument(std::string("ragged matrix in field '") + field + "'");
    }
    for (Eigen::Index c = 0; c < ncols; ++c) {
      m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return m;
}

}  // namespace

nlohmann::json to_json(const SsbmParams& p) {
  return {{"c", p.groups()},
          {"n", p.vertex_count()},
          {"omega_pos", matrix_json(p.omega_pos)},
          {"omega_neg", matrix_json(p.omega_neg)},
          {"theta", matrix_json(p.theta)},
          {"phi", matrix_json(p.phi)}};
}

SsbmParams params_from_json(const nlohmann::json& j) {
  SsbmParams p;
  p.omega_pos = matrix_from_json(j, "omega_pos");
  p.omega_neg = matrix_from_json(j, "omega_neg");
  p.theta = matrix_from_json(j, "theta");
  p.phi = matrix_from_json(j, "phi");
  if (auto bad = check_invariants(p, 1e-6)) throw std::invalid_argument(*bad);
  return p;
}

nlohmann::json to_json(const FitResult& r) {
  auto j = to_json(r.params);
  j["log_likelihood"] = r.log_likelihood;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["restart_index"] = r.restart_index;
  j["seed"] = r.seed;
  j["mode"] = to_string(r.mode);
  return j;
}

FitResult fit_result_from_json(const nlohmann::json& j) {
  FitResult r;
  r.params = params_from_json(j);
  r.log_likelihood = j.at("log_likelihood").get<double>();
  r.iterations = j.at("iterations").get<int>();
  r.converged = j.at("converged").get<bool>();
  r.restart_index = j.value("restart_index", 0);
  r.seed = j.value("seed", std::uint64_t{0});
  r.mode = mode_from_string(j.value("mode", std::string("directed")));
  return r;
}

}  // namespace ssbm
