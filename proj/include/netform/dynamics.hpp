#pragma once

// The formation Markov chain: transition operator, exact stationary
// distribution, and Monte Carlo simulation in discrete and continuous time.

#include <Eigen/Sparse>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "netform/choice.hpp"
#include "netform/network.hpp"

namespace netform {

/// Discrete: column-stochastic P with P[h, g] = Pr(g -> h).
/// Continuous: generator Q = lambda * A with zero column sums.
struct TransitionOperator {
  int n_nodes = 0;
  MeetingProcess::Kind kind = MeetingProcess::Kind::Discrete;
  double total = 0.0;  // q or lambda
  Eigen::SparseMatrix<double> matrix;

  std::size_t n_states() const { return static_cast<std::size_t>(matrix.rows()); }
};

TransitionOperator build_transition_operator(const SwitchingProcess& process,
                                             const MeetingProcess& m,
                                             int cap_log2 = kDefaultCapLog2);

/// A(q/q) or A(lambda/lambda): (P - I) / q or Q / lambda.
Eigen::SparseMatrix<double> normalized_generator(const TransitionOperator& op);

struct StationaryOptions {
  double residual_tolerance = 1e-10;
  /// Dense LU below this many states, sparse LU up to sparse_direct_limit,
  /// preconditioned BiCGSTAB above.
  std::size_t dense_limit = 4096;
  std::size_t sparse_direct_limit = 1u << 16;
};

/// Solves P pi = pi (or Q pi = 0) with sum(pi) = 1; throws SolverFailure
/// when the residual check fails or an entry is not positive.
std::vector<double> stationary_exact(const TransitionOperator& op, const StationaryOptions& opts = {});

/// max |P pi - pi| (discrete) or max |A pi| (continuous, normalized).
double stationary_residual(const TransitionOperator& op, std::span<const double> pi);

struct Event {
  double time = 0.0;
  Dyad dyad;
  bool flipped = false;
  StateIndex state = 0;  // state after the event
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::uint64_t chain = 0;
  int n_nodes = 0;
  MeetingProcess::Kind kind = MeetingProcess::Kind::Discrete;
  StateIndex initial = 0;
  StateIndex final_state = 0;
  std::vector<Event> events;
  /// Steps (discrete) or time (continuous) spent in each state after burn-in.
  std::vector<double> occupation;
  double burn_in = 0.0;   // excluded steps or time
  double elapsed = 0.0;   // steps or horizon
  std::uint64_t n_events = 0;
  std::uint64_t n_flips = 0;

  /// occupation normalized to sum 1.
  std::vector<double> empirical() const;
};

struct SimulationOptions {
  StateIndex initial = 0;
  double burn_in_fraction = 0.1;
  bool record_events = true;
  bool track_occupation = true;
  int cap_log2 = kDefaultCapLog2;
};

/// Each step: a meeting happens with probability q; the meeting dyad is
/// drawn from q/q and flips with probability p_d(g).
Trajectory simulate_discrete(const SwitchingProcess& process, const MeetingProcess& m,
                             std::uint64_t steps, std::uint64_t seed,
                             const SimulationOptions& opts = {}, std::uint64_t chain = 0);

/// Meetings arrive with Exp(lambda) gaps; the dyad is drawn from
/// lambda/lambda and flips with probability p_d(g).
Trajectory simulate_continuous(const SwitchingProcess& process, const MeetingProcess& m,
                               double horizon, std::uint64_t seed,
                               const SimulationOptions& opts = {}, std::uint64_t chain = 0);

/// Runs `chains` independent chains (streams 0..chains-1 of `seed`) and
/// pools their occupation measures into one normalized distribution.
/// `length` is steps (discrete) or horizon (continuous).
std::vector<double> simulate_chains(const SwitchingProcess& process, const MeetingProcess& m,
                                    double length, std::uint64_t seed, int chains, int threads,
                                    const SimulationOptions& opts = {});

double tv_distance(std::span<const double> p, std::span<const double> q);

/// CSV: event_index,time,dyad_i,dyad_j,flipped,state_hex.
void write_trajectory_csv(std::ostream& out, const Trajectory& t);

}  // namespace netform
