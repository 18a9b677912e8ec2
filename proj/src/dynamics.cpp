#include "netform/dynamics.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "netform/errors.hpp"
#include "netform/io.hpp"
#include "netform/parallel.hpp"
#include "netform/random.hpp"

namespace netform {

TransitionOperator build_transition_operator(const SwitchingProcess& process,
                                             const MeetingProcess& m, int cap_log2) {
  const int n = process.n_nodes();
  const int md = dyad_count(n);
  if (m.n_dyads() != md) throw InvalidArgument("meeting process length differs from dyad count");
  const StateIndex states = state_count(n, cap_log2);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(states) * (md + 1));
  const bool discrete = m.kind() == MeetingProcess::Kind::Discrete;
  for (StateIndex k = 0; k < states; ++k) {
    const Network g(n, k);
    double out = 0.0;
    for (int d = 0; d < md; ++d) {
      const double rate = m.weights()[d] * process.probability(g, dyad_at(d, n));
      entries.emplace_back(static_cast<int>(g.switched_index(d).index()), static_cast<int>(k), rate);
      out += rate;
    }
    entries.emplace_back(static_cast<int>(k), static_cast<int>(k), discrete ? 1.0 - out : -out);
  }
  TransitionOperator op;
  op.n_nodes = n;
  op.kind = m.kind();
  op.total = m.total();
  op.matrix.resize(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
  op.matrix.setFromTriplets(entries.begin(), entries.end());
  op.matrix.makeCompressed();
  return op;
}

Eigen::SparseMatrix<double> normalized_generator(const TransitionOperator& op) {
  Eigen::SparseMatrix<double> a = op.matrix;
  if (op.kind == MeetingProcess::Kind::Discrete) {
    Eigen::SparseMatrix<double> eye(a.rows(), a.cols());
    eye.setIdentity();
    a -= eye;
  }
  a /= op.total;
  return a;
}

namespace {

// The generator-form matrix M with M pi = 0 at stationarity.
Eigen::SparseMatrix<double> kernel_matrix(const TransitionOperator& op) {
  Eigen::SparseMatrix<double> a = op.matrix;
  if (op.kind == MeetingProcess::Kind::Discrete) {
    Eigen::SparseMatrix<double> eye(a.rows(), a.cols());
    eye.setIdentity();
    a -= eye;
  }
  return a;
}

std::vector<double> solve_dense(const Eigen::SparseMatrix<double>& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd dense = Eigen::MatrixXd(a);
  dense.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd x = dense.partialPivLu().solve(rhs);
  return {x.data(), x.data() + n};
}

// Fixes pi_0 = 1 and solves the remaining n-1 balance equations.
std::vector<double> solve_sparse(const Eigen::SparseMatrix<double>& a, bool direct) {
  const Eigen::Index n = a.rows();
  Eigen::SparseMatrix<double> reduced = a.bottomRightCorner(n - 1, n - 1);
  reduced.makeCompressed();
  Eigen::VectorXd rhs = -Eigen::VectorXd(a.col(0)).tail(n - 1);
  Eigen::VectorXd x;
  if (direct) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(reduced);
    if (lu.info() != Eigen::Success) throw SolverFailure("sparse LU factorization failed");
    x = lu.solve(rhs);
  } else {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
    solver.setTolerance(1e-14);
    solver.setMaxIterations(20000);
    solver.compute(reduced);
    if (solver.info() != Eigen::Success) throw SolverFailure("preconditioner setup failed");
    x = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw SolverFailure("BiCGSTAB did not converge");
  }
  std::vector<double> pi(n);
  pi[0] = 1.0;
  for (Eigen::Index k = 1; k < n; ++k) pi[k] = x(k - 1);
  double total = 0.0;
  for (double v : pi) total += v;
  for (double& v : pi) v /= total;
  return pi;
}

}  // namespace

double stationary_residual(const TransitionOperator& op, std::span<const double> pi) {
  if (pi.size() != op.n_states()) throw InvalidArgument("distribution length mismatch");
  Eigen::Map<const Eigen::VectorXd> v(pi.data(), static_cast<Eigen::Index>(pi.size()));
  Eigen::VectorXd r = kernel_matrix(op) * v;
  if (op.kind == MeetingProcess::Kind::Continuous) r /= op.total;
  return r.cwiseAbs().maxCoeff();
}

std::vector<double> stationary_exact(const TransitionOperator& op, const StationaryOptions& opts) {
  const Eigen::SparseMatrix<double> a = kernel_matrix(op);
  std::vector<double> pi;
  if (op.n_states() < opts.dense_limit) {
    pi = solve_dense(a);
  } else {
    pi = solve_sparse(a, op.n_states() <= opts.sparse_direct_limit);
  }
  for (double v : pi) {
    if (!(v > 0.0)) throw SolverFailure("stationary solve produced a non-positive entry");
  }
  const double residual = stationary_residual(op, pi);
  if (!(residual < opts.residual_tolerance)) {
    throw SolverFailure("stationary residual " + fmt_double(residual) + " above tolerance");
  }
  return pi;
}

std::vector<double> Trajectory::empirical() const {
  std::vector<double> out = occupation;
  double total = 0.0;
  for (double v : out) total += v;
  if (total > 0.0) {
    for (double& v : out) v /= total;
  }
  return out;
}

namespace {

// Per-call cache of p_d(g); only used when the state space is small enough.
class ProbabilityCache {
 public:
  ProbabilityCache(const SwitchingProcess& process, int cap_log2) : process_(process) {
    const int n = process.n_nodes();
    const int md = dyad_count(n);
    if (md <= std::min(cap_log2, 20)) {
      md_ = md;
      table_.assign((std::size_t{1} << md) * md, std::numeric_limits<double>::quiet_NaN());
    }
  }

  double operator()(const Network& g, int d) {
    if (table_.empty()) return process_.probability(g, dyad_at(d, g.n_nodes()));
    double& slot = table_[g.index() * md_ + d];
    if (std::isnan(slot)) slot = process_.probability(g, dyad_at(d, g.n_nodes()));
    return slot;
  }

 private:
  const SwitchingProcess& process_;
  int md_ = 0;
  std::vector<double> table_;
};

std::vector<double> cumulative(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) c[k] = (acc += w[k]);
  return c;
}

Trajectory start_trajectory(const SwitchingProcess& process, const MeetingProcess& m,
                            std::uint64_t seed, std::uint64_t chain, const SimulationOptions& opts) {
  const int n = process.n_nodes();
  if (m.n_dyads() != dyad_count(n)) {
    throw InvalidArgument("meeting process length differs from dyad count");
  }
  if (!(opts.burn_in_fraction >= 0.0 && opts.burn_in_fraction < 1.0)) {
    throw InvalidArgument("burn-in fraction must lie in [0, 1)");
  }
  (void)Network(n, opts.initial);
  Trajectory t;
  t.seed = seed;
  t.chain = chain;
  t.n_nodes = n;
  t.kind = m.kind();
  t.initial = opts.initial;
  t.final_state = opts.initial;
  if (opts.track_occupation) t.occupation.assign(state_count(n, opts.cap_log2), 0.0);
  return t;
}

}  // namespace

Trajectory simulate_discrete(const SwitchingProcess& process, const MeetingProcess& m,
                             std::uint64_t steps, std::uint64_t seed, const SimulationOptions& opts,
                             std::uint64_t chain) {
  if (m.kind() != MeetingProcess::Kind::Discrete) {
    throw InvalidArgument("simulate_discrete needs a discrete meeting process");
  }
  Trajectory t = start_trajectory(process, m, seed, chain, opts);
  const int n = t.n_nodes;
  const std::vector<double> cum = cumulative(m.weights());
  const double q = m.total();
  const auto burn = static_cast<std::uint64_t>(std::floor(opts.burn_in_fraction * steps));
  t.burn_in = static_cast<double>(burn);
  t.elapsed = static_cast<double>(steps);
  RandomStream rng(seed, chain);
  ProbabilityCache prob(process, opts.cap_log2);
  Network g(n, opts.initial);
  for (std::uint64_t step = 0; step < steps; ++step) {
    if (rng.uniform() < q) {
      const int d = static_cast<int>(rng.categorical(cum));
      const bool flip = rng.uniform() < prob(g, d);
      if (flip) {
        g = g.switched_index(d);
        ++t.n_flips;
      }
      ++t.n_events;
      if (opts.record_events) {
        t.events.push_back({static_cast<double>(step + 1), dyad_at(d, n), flip, g.index()});
      }
    }
    if (opts.track_occupation && step >= burn) t.occupation[g.index()] += 1.0;
  }
  t.final_state = g.index();
  return t;
}

Trajectory simulate_continuous(const SwitchingProcess& process, const MeetingProcess& m,
                               double horizon, std::uint64_t seed, const SimulationOptions& opts,
                               std::uint64_t chain) {
  if (m.kind() != MeetingProcess::Kind::Continuous) {
    throw InvalidArgument("simulate_continuous needs a continuous meeting process");
  }
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be >= 0");
  Trajectory t = start_trajectory(process, m, seed, chain, opts);
  const int n = t.n_nodes;
  const std::vector<double> cum = cumulative(m.weights());
  const double lambda = m.total();
  const double burn_time = opts.burn_in_fraction * horizon;
  t.burn_in = burn_time;
  t.elapsed = horizon;
  RandomStream rng(seed, chain);
  ProbabilityCache prob(process, opts.cap_log2);
  Network g(n, opts.initial);
  double now = 0.0;
  while (true) {
    const double next = now + rng.exponential(lambda);
    if (opts.track_occupation) {
      const double lo = std::max(now, burn_time);
      const double hi = std::min(next, horizon);
      if (hi > lo) t.occupation[g.index()] += hi - lo;
    }
    if (next >= horizon) break;
    now = next;
    const int d = static_cast<int>(rng.categorical(cum));
    const bool flip = rng.uniform() < prob(g, d);
    if (flip) {
      g = g.switched_index(d);
      ++t.n_flips;
    }
    ++t.n_events;
    if (opts.record_events) t.events.push_back({now, dyad_at(d, n), flip, g.index()});
  }
  t.final_state = g.index();
  return t;
}

std::vector<double> simulate_chains(const SwitchingProcess& process, const MeetingProcess& m,
                                    double length, std::uint64_t seed, int chains, int threads,
                                    const SimulationOptions& opts) {
  if (chains < 1) throw InvalidArgument("need at least one chain");
  SimulationOptions o = opts;
  o.record_events = false;
  o.track_occupation = true;
  std::vector<std::vector<double>> occ(chains);
  parallel_chunks(static_cast<std::size_t>(chains), threads,
                  [&](std::size_t lo, std::size_t hi, std::size_t) {
                    for (std::size_t c = lo; c < hi; ++c) {
                      Trajectory t = m.kind() == MeetingProcess::Kind::Discrete
                                         ? simulate_discrete(process, m,
                                                             static_cast<std::uint64_t>(length),
                                                             seed, o, c)
                                         : simulate_continuous(process, m, length, seed, o, c);
                      occ[c] = std::move(t.occupation);
                    }
                  });
  // Fixed summation order: chain 0 first.
  std::vector<double> pooled(occ[0].size(), 0.0);
  for (const auto& v : occ) {
    for (std::size_t k = 0; k < v.size(); ++k) pooled[k] += v[k];
  }
  double total = 0.0;
  for (double v : pooled) total += v;
  if (total > 0.0) {
    for (double& v : pooled) v /= total;
  }
  return pooled;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InvalidArgument("distributions differ in length");
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) acc += std::abs(p[k] - q[k]);
  return 0.5 * acc;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
  out << "event_index,time,dyad_i,dyad_j,flipped,state_hex\n";
  std::uint64_t k = 0;
  for (const Event& e : t.events) {
    out << k++ << "," << fmt_double(e.time) << "," << e.dyad.i << "," << e.dyad.j << ","
        << (e.flipped ? 1 : 0) << "," << to_hex(Network(t.n_nodes, e.state)) << "\n";
  }
}

}  // namespace netform
