#pragma once

// Conservativeness of a log-odds function, the aggregating function Phi,
// and the Gibbs measure pi(g) = exp(Phi(g)) / Z it induces.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netform/choice.hpp"
#include "netform/errors.hpp"
#include "netform/network.hpp"

namespace netform {

inline constexpr double kConservativeTolerance = 1e-9;

/// One violated condition. condition 1: phi_d(g) + phi_d(sigma_d g) != 0
/// (d2 == d). condition 2: phi_d(g) + phi_d2(sigma_d g) != phi_d2(g) +
/// phi_d(sigma_d2 g).
struct Witness {
  int condition = 0;
  Network g{2};
  Dyad d;
  Dyad d2;
  double lhs = 0.0;
  double rhs = 0.0;

  std::string describe() const;
};

struct ConservativenessReport {
  bool conservative = true;
  std::optional<Witness> witness;     // smallest (network, dyad, dyad) found
  std::vector<Witness> violations;    // every violation, when requested
  std::uint64_t checks = 0;
  bool sampled = false;

  std::string describe() const;
};

struct CheckOptions {
  double tolerance = kConservativeTolerance;
  bool list_all = false;
  int cap_log2 = kDefaultCapLog2;
  /// Exhaustive pairwise checking is limited to 2^pairwise_cap_log2 states;
  /// larger spaces fall back to seeded sampling.
  int pairwise_cap_log2 = 12;
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  int threads = 1;
};

ConservativenessReport check_conservative(const SwitchingProcess& process,
                                          const CheckOptions& opts = {});
ConservativenessReport check_conservative(const UtilityModel& u, const ShockSpec& f, int n_nodes,
                                          const CheckOptions& opts = {});

/// Exhaustive table of Phi and pi over every network.
class GibbsTable {
 public:
  /// Phi is taken as given (no gauge shift); pi and log Z via log-sum-exp.
  static GibbsTable from_potential(int n_nodes, std::vector<double> phi);

  int n_nodes() const { return n_nodes_; }
  std::size_t n_states() const { return phi_.size(); }
  const std::vector<double>& phi() const { return phi_; }
  const std::vector<double>& pi() const { return pi_; }
  double phi(StateIndex k) const { return phi_[k]; }
  double pi(StateIndex k) const { return pi_[k]; }
  double log_partition() const { return log_partition_; }

 private:
  GibbsTable() = default;
  int n_nodes_ = 0;
  std::vector<double> phi_;
  std::vector<double> pi_;
  double log_partition_ = 0.0;
};

/// Raised when an aggregating function is requested for a process that
/// fails the conservativeness check.
class NotConservative : public Error {
 public:
  explicit NotConservative(ConservativenessReport report)
      : Error("process is not conservative: " + report.describe()), report_(std::move(report)) {}
  const ConservativenessReport& report() const { return report_; }

 private:
  ConservativenessReport report_;
};

/// log(sum exp(x)).
double log_sum_exp(std::span<const double> x);

/// Sum of phi_d(current) along `path` starting from `start`, toggling each
/// dyad in turn.
double phi_along_path(const SwitchingProcess& process, const Network& start,
                      std::span<const int> path);

/// Phi(g) = sum of phi along the links of g added in order of `priority`
/// (a permutation of dyad indices; canonical order when empty), Phi(empty)=0.
/// Does not check conservativeness: for a non-conservative process the
/// result depends on the order.
GibbsTable build_path_potential(const SwitchingProcess& process, std::span<const int> priority = {},
                                int cap_log2 = kDefaultCapLog2);

/// Checks conservativeness first; throws NotConservative on failure.
GibbsTable build_aggregating_function(const SwitchingProcess& process,
                                      const CheckOptions& opts = {});

/// max over (g, d) of |q_d p_d(g) pi(g) - q_d p_d(sigma_d g) pi(sigma_d g)|.
double detailed_balance_residual(const GibbsTable& gt, const SwitchingProcess& process,
                                 const MeetingProcess& m);

/// max over (g, d) of |Phi(sigma_d g) - Phi(g) - phi_d(g)|.
double increment_residual(const GibbsTable& gt, const SwitchingProcess& process);

struct PotentialGameReport {
  bool exact = false;
  bool ordinal = false;
  double max_exact_gap = 0.0;
};

/// Compares Phi increments with each deviator's utility change.
PotentialGameReport potential_game_check(const UtilityModel& u, const GibbsTable& gt,
                                         double tolerance = kConservativeTolerance);

struct NashReport {
  bool all_nash = true;
  std::vector<Network> local_maxima;
  std::vector<std::pair<Network, Dyad>> violations;
};

/// Every local maximum of Phi (no single flip raises Phi) must be a Nash
/// network: no agent gains by toggling one of its own dyads.
NashReport local_maxima_are_nash(const GibbsTable& gt, const UtilityModel& u);

double log_partition_exact(const GibbsTable& gt);

/// Isolated choice: sum_i log sum_{S_i} exp(V_i(S_i) - V_i(empty)).
double factorized_log_partition(const UtilityModel& u, int n_nodes);

double ensemble_average(const GibbsTable& gt, const std::function<double(const Network&)>& obs);

/// CSV: "# n_nodes=.. log_partition=.." header, then network,phi,pi.
void write_gibbs_csv(std::ostream& out, const GibbsTable& gt);

}  // namespace netform
