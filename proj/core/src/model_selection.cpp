#include "ssbm/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace ssbm {

namespace {

double coding_cost(const Eigen::MatrixXd& m, const MdlOptions& opts) {
  double cost = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double v = m(i, j);
      if (v >= opts.coding_floor) {
        cost -= std::log(v);
      } else if (opts.zeros == ZeroEntries::clamp) {
        cost -= std::log(opts.coding_floor);
      }
    }
  }
  return cost;
}

}  // namespace

std::string to_string(ZeroEntries z) { return z == ZeroEntries::clamp ? "clamp" : "skip"; }

ZeroEntries zero_entries_from_string(const std::string& text) {
  if (text == "clamp") return ZeroEntries::clamp;
  if (text == "skip") return ZeroEntries::skip;
  throw std::invalid_argument("unknown zero-entry policy '" + text + "'");
}

void MdlOptions::validate() const {
  if (!(coding_floor > 0.0 && coding_floor < 1.0)) {
    throw std::invalid_argument("coding floor must lie in (0, 1)");
  }
}

DescriptionLength description_length(const FitResult& fit, Mode mode, const MdlOptions& opts) {
  opts.validate();
  if (!std::isfinite(fit.log_likelihood)) {
    throw std::invalid_argument("description_length: log-likelihood is not finite");
  }
  const auto& p = fit.params;
  DescriptionLength len;
  len.data = mode == Mode::directed ? -fit.log_likelihood : -fit.log_likelihood / 2.0;
  len.params = coding_cost(p.omega_pos, opts) + coding_cost(p.omega_neg, opts) +
               coding_cost(p.theta, opts);
  if (mode == Mode::directed) len.params += coding_cost(p.phi, opts);
  return len;
}

const MdlEntry& MdlReport::best() const {
  for (const auto& e : entries) {
    if (e.groups == best_groups) return e;
  }
  throw std::logic_error("MdlReport: best group count missing from entries");
}

MdlReport select_groups(const SignedGraph& g, int min_groups, int max_groups,
                        const FitConfig& cfg, const MdlOptions& opts) {
  cfg.validate();
  opts.validate();
  if (min_groups < 1 || min_groups > max_groups) {
    throw std::invalid_argument("select_groups: need 1 <= min_groups <= max_groups");
  }
  if (static_cast<std::size_t>(max_groups) > g.vertex_count()) {
    throw std::invalid_argument("select_groups: max_groups exceeds the vertex count");
  }

  MdlReport report;
  report.options = opts;
  report.entries.resize(static_cast<std::size_t>(max_groups - min_groups + 1));
  for (std::size_t k = 0; k < report.entries.size(); ++k) {
    report.entries[k].groups = min_groups + static_cast<int>(k);
  }

  FitConfig inner = cfg;
  inner.threads = 1;
  auto one = [&](MdlEntry& entry) {
    try {
      entry.fit = fit(g, entry.groups, inner);
      entry.length = description_length(*entry.fit, cfg.mode, opts);
    } catch (const DegenerateParameters& e) {
      entry.fit.reset();
      entry.error = e.what();
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), report.entries.size());
  if (workers <= 1) {
    for (auto& e : report.entries) one(e);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = w; k < report.entries.size(); k += workers) {
            one(report.entries[k]);
          }
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  const MdlEntry* best = nullptr;
  for (const auto& e : report.entries) {
    if (e.fit && (!best || e.length.total() < best->length.total())) best = &e;
  }
  if (!best) throw DegenerateParameters("select_groups: every group count failed to fit");
  report.best_groups = best->groups;
  return report;
}

void write_mdl_csv(std::ostream& out, const MdlReport& report) {
  out << "groups,data_length,param_length,total_length,log_likelihood,iterations,converged\n";
  for (const auto& e : report.entries) {
    if (!e.fit) continue;
    out << e.groups << ',' << format_double(e.length.data) << ','
        << format_double(e.length.params) << ',' << format_double(e.length.total()) << ','
        << format_double(e.fit->log_likelihood) << ',' << e.fit->iterations << ','
        << (e.fit->converged ? 1 : 0) << '\n';
  }
}

nlohmann::json to_json(const MdlReport& report) {
  auto rows = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json row{{"groups", e.groups}};
    if (e.fit) {
      row["data_length"] = e.length.data;
      row["param_length"] = e.length.params;
      row["total_length"] = e.length.total();
      row["log_likelihood"] = e.fit->log_likelihood;
      row["iterations"] = e.fit->iterations;
      row["converged"] = e.fit->converged;
    } else {
      row["error"] = e.error;
    }
    rows.push_back(std::move(row));
  }
  return {{"entries", rows},
          {"best_groups", report.best_groups},
          {"coding_floor", report.options.coding_floor},
          {"zero_entries", to_string(report.options.zeros)}};
}

}  // namespace ssbm
