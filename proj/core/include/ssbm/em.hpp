#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "ssbm/signed_graph.hpp"

namespace ssbm {

/// Directed fits keep separate tail (theta) and head (phi) centralities;
/// undirected fits tie them.
enum class Mode { directed, undirected };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& text);

/// Signed stochastic block model parameters.
///
///   omega_pos(r, s), omega_neg(r, s): probability that a positive (negative)
///       link runs from group r to group s. Each matrix sums to one.
///   theta(r, i): probability that the tail of a link leaving group r is i.
///   phi(s, j):   probability that the head of a link entering group s is j.
///       Every row of theta and phi sums to one.
struct SsbmParams {
  Eigen::MatrixXd omega_pos;
  Eigen::MatrixXd omega_neg;
  Eigen::MatrixXd theta;
  Eigen::MatrixXd phi;

  int groups() const { return static_cast<int>(omega_pos.rows()); }
  std::size_t vertex_count() const { return static_cast<std::size_t>(theta.cols()); }
};

/// Returns a description of the first violated invariant, or nullopt.
std::optional<std::string> check_invariants(const SsbmParams& p, double tol = 1e-9);

/// Relabels groups: new group perm[r] takes the role of old group r.
SsbmParams permute_groups(const SsbmParams& p, std::span<const int> perm);

/// Raised when some link has zero probability under the current parameters.
class DegenerateParameters : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Posterior over (tail group, head group) for every oriented link. Tables
/// are stored link-major with entry (r, s) at offset r * groups + s.
struct EdgeResponsibilities {
  int groups = 0;
  std::vector<Edge> positive_links;
  std::vector<Edge> negative_links;
  std::vector<double> q_pos;
  std::vector<double> q_neg;

  std::span<const double> table(Sign sign, std::size_t link) const {
    const auto& q = sign == Sign::positive ? q_pos : q_neg;
    const std::size_t cc = static_cast<std::size_t>(groups) * groups;
    return {q.data() + link * cc, cc};
  }
};

/// Sum over links of A_ij ln(sum_rs omega_rs theta_ri phi_sj), both signs.
double log_likelihood(const SignedGraph& g, const SsbmParams& p);

EdgeResponsibilities e_step(const SignedGraph& g, const SsbmParams& p);

/// Closed-form maximiser of the expected complete-data log-likelihood for
/// fixed responsibilities. A sign class with no links gets a uniform block
/// matrix; a group whose centrality accumulator is empty gets a uniform row.
SsbmParams m_step(const SignedGraph& g, const EdgeResponsibilities& q, Mode mode);

/// Random strictly positive parameters, deterministic in `seed`. Entries are
/// drawn from uniform(1e-3, 1) and normalized. With one group, theta and
/// phi are uniform. Undirected mode ties phi to theta and symmetrizes omega.
SsbmParams init_params(const SignedGraph& g, int groups, std::uint64_t seed,
                       Mode mode = Mode::directed);

/// How each restart picks its starting point. `spectral` clusters a
/// spectral embedding of the link profiles (k-means seeded per restart) and
/// damps off-cluster centralities; `random` uses init_params directly.
enum class InitStrategy { spectral, random };

std::string to_string(InitStrategy s);
InitStrategy init_from_string(const std::string& text);

struct FitConfig {
  int restarts = 10;
  int max_iters = 500;
  double rel_tol = 1e-8;
  std::uint64_t seed = 1;
  Mode mode = Mode::directed;
  int threads = 1;
  InitStrategy init = InitStrategy::spectral;

  void validate() const;
};

struct FitResult {
  SsbmParams params;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  int restart_index = 0;
  std::uint64_t seed = 0;
  Mode mode = Mode::directed;
  /// Log-likelihood of the initial parameters followed by one value per
  /// iteration.
  std::vector<double> trace;
};

/// Runs EM from `start` until |dL| / (|L| + 1) < rel_tol or max_iters.
FitResult run_em(const SignedGraph& g, SsbmParams start, Mode mode, int max_iters,
                 double rel_tol);

/// Best of cfg.restarts EM runs; restart k is seeded with seed + k. With the
/// spectral strategy (and at least two groups) restart k starts from
/// seeded_params on kmeans(embedding, seed + k), where the embedding uses
/// the split profile for even k and the signed profile for odd k; otherwise
/// from init_params(seed + k).
/// Ties in log-likelihood go to the lower restart index. Throws
/// DegenerateParameters only if every restart fails.
FitResult fit(const SignedGraph& g, int groups, const FitConfig& cfg);

nlohmann::json to_json(const SsbmParams& p);
SsbmParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FitResult& r);
FitResult fit_result_from_json(const nlohmann::json& j);

}  // namespace ssbm
