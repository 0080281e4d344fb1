#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssbm/em.hpp"
#include "ssbm/signed_graph.hpp"

namespace ssbm {

/// Parameter entries below this value are coded as if they equalled it.
inline constexpr double kCodingFloor = 1e-12;

/// What happens to parameter entries below the coding floor. `clamp` codes
/// them at -ln(floor); `skip` leaves them out of the sum, so only the
/// support of each matrix is paid for.
enum class ZeroEntries { clamp, skip };

std::string to_string(ZeroEntries z);
ZeroEntries zero_entries_from_string(const std::string& text);

struct MdlOptions {
  double coding_floor = kCodingFloor;
  ZeroEntries zeros = ZeroEntries::clamp;

  void validate() const;
};

struct DescriptionLength {
  double data = 0.0;
  double params = 0.0;
  double total() const { return data + params; }
};

/// Data part: -L for directed fits, -L/2 for undirected ones. Parameter
/// part: -sum ln of every entry of omega+, omega-, theta and (directed only)
/// phi, with entries below the floor handled per `opts`.
DescriptionLength description_length(const FitResult& fit, Mode mode,
                                     const MdlOptions& opts = {});

struct MdlEntry {
  int groups = 0;
  DescriptionLength length;
  std::optional<FitResult> fit;
  /// Set when every restart at this group count failed.
  std::string error;
};

struct MdlReport {
  std::vector<MdlEntry> entries;
  int best_groups = 0;
  MdlOptions options;

  const MdlEntry& best() const;
};

/// Fits every group count in [min_groups, max_groups] with the same config
/// and keeps the one with the shortest total description length (ties go to
/// fewer groups). Fits at different group counts run on up to cfg.threads
/// threads; each fit then runs its restarts serially.
MdlReport select_groups(const SignedGraph& g, int min_groups, int max_groups,
                        const FitConfig& cfg, const MdlOptions& opts = {});

/// groups,data_length,param_length,total_length,log_likelihood,iterations,converged
void write_mdl_csv(std::ostream& out, const MdlReport& report);
nlohmann::json to_json(const MdlReport& report);

}  // namespace ssbm
