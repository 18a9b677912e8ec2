#include "netform/potential.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>

#include "netform/io.hpp"
#include "netform/parallel.hpp"
#include "netform/random.hpp"

namespace netform {

namespace {

std::string dyad_str(Dyad d) { return "(" + std::to_string(d.i) + "," + std::to_string(d.j) + ")"; }

struct ChunkResult {
  std::optional<Witness> first;
  std::vector<Witness> all;
  std::uint64_t checks = 0;
};

// Tests both conditions at g given a way to read phi; condition 1 for every
// dyad first, then condition 2 for every pair d < d2.
template <class Phi>
void scan_network(const Network& g, int m, double tol, bool list_all, Phi&& phi, ChunkResult& out) {
  auto record = [&](Witness w) {
    if (!out.first) out.first = w;
    if (list_all) out.all.push_back(std::move(w));
  };
  for (int d = 0; d < m; ++d) {
    ++out.checks;
    const double lhs = phi(g, d);
    const double rhs = -phi(g.switched_index(d), d);
    if (!(std::abs(lhs - rhs) <= tol)) {
      record({1, g, dyad_at(d, g.n_nodes()), dyad_at(d, g.n_nodes()), lhs, rhs});
      if (!list_all) return;
    }
  }
  for (int d = 0; d < m; ++d) {
    for (int d2 = d + 1; d2 < m; ++d2) {
      ++out.checks;
      const double lhs = phi(g, d) + phi(g.switched_index(d), d2);
      const double rhs = phi(g, d2) + phi(g.switched_index(d2), d);
      if (!(std::abs(lhs - rhs) <= tol)) {
        record({2, g, dyad_at(d, g.n_nodes()), dyad_at(d2, g.n_nodes()), lhs, rhs});
        if (!list_all) return;
      }
    }
  }
}

ConservativenessReport merge(std::vector<ChunkResult>& chunks, bool sampled) {
  ConservativenessReport report;
  report.sampled = sampled;
  for (auto& c : chunks) {
    report.checks += c.checks;
    if (c.first && !report.witness) report.witness = c.first;
    report.violations.insert(report.violations.end(), c.all.begin(), c.all.end());
  }
  report.conservative = !report.witness.has_value();
  return report;
}

ConservativenessReport check_exhaustive(const SwitchingProcess& process, const CheckOptions& opts) {
  const int n = process.n_nodes();
  const int m = dyad_count(n);
  const StateIndex states = state_count(n, opts.cap_log2);
  std::vector<double> table(static_cast<std::size_t>(states) * m);
  parallel_chunks(states, opts.threads, [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t k = lo; k < hi; ++k) {
      const Network g(n, k);
      for (int d = 0; d < m; ++d) table[k * m + d] = process.log_odds(g, dyad_at(d, n));
    }
  });
  auto phi = [&](const Network& g, int d) { return table[g.index() * m + d]; };

  const int t = std::max(1, std::min<int>(resolve_threads(opts.threads), static_cast<int>(states)));
  std::vector<ChunkResult> chunks(t);
  parallel_chunks(states, t, [&](std::size_t lo, std::size_t hi, std::size_t c) {
    for (std::size_t k = lo; k < hi; ++k) {
      scan_network(Network(n, k), m, opts.tolerance, opts.list_all, phi, chunks[c]);
      if (chunks[c].first && !opts.list_all) break;
    }
  });
  return merge(chunks, false);
}

ConservativenessReport check_sampled(const SwitchingProcess& process, const CheckOptions& opts) {
  const int n = process.n_nodes();
  const int m = dyad_count(n);
  const std::uint64_t mask = (std::uint64_t{1} << m) - 1;
  const int t = std::max(1, resolve_threads(opts.threads));
  std::vector<ChunkResult> chunks(t);
  auto phi = [&](const Network& g, int d) { return process.log_odds(g, dyad_at(d, n)); };
  parallel_chunks(opts.samples, t, [&](std::size_t lo, std::size_t hi, std::size_t c) {
    ChunkResult& out = chunks[c];
    for (std::size_t k = lo; k < hi; ++k) {
      RandomStream rng(opts.seed, k);
      const Network g(n, rng.next() & mask);
      const int d = static_cast<int>(rng.next() % m);
      const int d2 = static_cast<int>(rng.next() % m);
      auto record = [&](Witness w) {
        if (!out.first) out.first = w;
        if (opts.list_all) out.all.push_back(std::move(w));
      };
      ++out.checks;
      const double a = phi(g, d);
      const double b = -phi(g.switched_index(d), d);
      if (!(std::abs(a - b) <= opts.tolerance)) record({1, g, dyad_at(d, n), dyad_at(d, n), a, b});
      if (d != d2) {
        ++out.checks;
        const double lhs = a + phi(g.switched_index(d), d2);
        const double rhs = phi(g, d2) + phi(g.switched_index(d2), d);
        if (!(std::abs(lhs - rhs) <= opts.tolerance)) {
          record({2, g, dyad_at(d, n), dyad_at(d2, n), lhs, rhs});
        }
      }
      if (out.first && !opts.list_all) break;
    }
  });
  return merge(chunks, true);
}

}  // namespace

std::string Witness::describe() const {
  std::string s = "condition " + std::to_string(condition) + " fails at " + to_hex(g) + " dyad " +
                  dyad_str(d);
  if (condition == 2) s += " with " + dyad_str(d2);
  s += ": lhs=" + fmt_double(lhs) + " rhs=" + fmt_double(rhs);
  return s;
}

std::string ConservativenessReport::describe() const {
  if (conservative) {
    return std::string("conservative (") + (sampled ? "sampled, " : "") + std::to_string(checks) +
           " checks)";
  }
  return "not_conservative; " + witness->describe();
}

ConservativenessReport check_conservative(const SwitchingProcess& process,
                                          const CheckOptions& opts) {
  const int m = dyad_count(process.n_nodes());
  (void)state_count(process.n_nodes(), opts.cap_log2);
  if (m > opts.pairwise_cap_log2) return check_sampled(process, opts);
  return check_exhaustive(process, opts);
}

ConservativenessReport check_conservative(const UtilityModel& u, const ShockSpec& f, int n_nodes,
                                          const CheckOptions& opts) {
  return check_conservative(DiscreteChoiceProcess(u, f, n_nodes), opts);
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - top);
  return top + std::log(acc);
}

GibbsTable GibbsTable::from_potential(int n_nodes, std::vector<double> phi) {
  if (phi.size() != state_count(n_nodes, 62)) {
    throw InvalidArgument("potential table size does not match 2^{N(N-1)}");
  }
  GibbsTable gt;
  gt.n_nodes_ = n_nodes;
  gt.log_partition_ = log_sum_exp(phi);
  if (!std::isfinite(gt.log_partition_)) throw InvalidArgument("non-finite potential values");
  gt.pi_.resize(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) gt.pi_[k] = std::exp(phi[k] - gt.log_partition_);
  gt.phi_ = std::move(phi);
  return gt;
}

double phi_along_path(const SwitchingProcess& process, const Network& start,
                      std::span<const int> path) {
  const int m = dyad_count(process.n_nodes());
  Network g = start;
  double total = 0.0;
  for (int d : path) {
    if (d < 0 || d >= m) throw InvalidArgument("dyad index out of range in path");
    total += process.log_odds(g, dyad_at(d, g.n_nodes()));
    g = g.switched_index(d);
  }
  return total;
}

GibbsTable build_path_potential(const SwitchingProcess& process, std::span<const int> priority,
                                int cap_log2) {
  const int n = process.n_nodes();
  const int m = dyad_count(n);
  const StateIndex states = state_count(n, cap_log2);
  std::vector<int> rank(m);
  if (priority.empty()) {
    for (int d = 0; d < m; ++d) rank[d] = d;
  } else {
    if (static_cast<int>(priority.size()) != m) throw InvalidArgument("priority must list every dyad");
    std::vector<bool> seen(m, false);
    for (int pos = 0; pos < m; ++pos) {
      const int d = priority[pos];
      if (d < 0 || d >= m || seen[d]) throw InvalidArgument("priority is not a permutation");
      seen[d] = true;
      rank[d] = pos;
    }
  }
  // Removing any link lowers the state index, so one increasing sweep
  // sees every predecessor first.
  std::vector<double> phi(states, 0.0);
  for (StateIndex k = 1; k < states; ++k) {
    int last = -1;
    for (std::uint64_t b = k; b != 0; b &= b - 1) {
      const int d = std::countr_zero(b);
      if (last < 0 || rank[d] > rank[last]) last = d;
    }
    const Network before(n, k ^ (std::uint64_t{1} << last));
    phi[k] = phi[before.index()] + process.log_odds(before, dyad_at(last, n));
  }
  return GibbsTable::from_potential(n, std::move(phi));
}

GibbsTable build_aggregating_function(const SwitchingProcess& process, const CheckOptions& opts) {
  ConservativenessReport report = check_conservative(process, opts);
  if (!report.conservative) throw NotConservative(std::move(report));
  return build_path_potential(process, {}, opts.cap_log2);
}

namespace {

void require_match(const GibbsTable& gt, int n_nodes) {
  if (gt.n_nodes() != n_nodes) throw InvalidArgument("table and model disagree on node count");
}

}  // namespace

double detailed_balance_residual(const GibbsTable& gt, const SwitchingProcess& process,
                                 const MeetingProcess& m) {
  const int n = gt.n_nodes();
  require_match(gt, process.n_nodes());
  const int md = dyad_count(n);
  if (m.n_dyads() != md) throw InvalidArgument("meeting process length differs from dyad count");
  double worst = 0.0;
  for (StateIndex k = 0; k < gt.n_states(); ++k) {
    const Network g(n, k);
    for (int d = 0; d < md; ++d) {
      const Network h = g.switched_index(d);
      if (h.index() < k) continue;
      const Dyad dy = dyad_at(d, n);
      const double q = m.weights()[d];
      const double flow = q * process.probability(g, dy) * gt.pi(k);
      const double back = q * process.probability(h, dy) * gt.pi(h.index());
      worst = std::max(worst, std::abs(flow - back));
    }
  }
  return worst;
}

double increment_residual(const GibbsTable& gt, const SwitchingProcess& process) {
  const int n = gt.n_nodes();
  require_match(gt, process.n_nodes());
  double worst = 0.0;
  for (StateIndex k = 0; k < gt.n_states(); ++k) {
    const Network g(n, k);
    for (int d = 0; d < dyad_count(n); ++d) {
      const double inc = gt.phi(g.switched_index(d).index()) - gt.phi(k);
      worst = std::max(worst, std::abs(inc - process.log_odds(g, dyad_at(d, n))));
    }
  }
  return worst;
}

PotentialGameReport potential_game_check(const UtilityModel& u, const GibbsTable& gt,
                                         double tolerance) {
  const int n = gt.n_nodes();
  auto sign = [tolerance](double x) { return x > tolerance ? 1 : (x < -tolerance ? -1 : 0); };
  PotentialGameReport r;
  r.ordinal = true;
  for (StateIndex k = 0; k < gt.n_states(); ++k) {
    const Network g(n, k);
    for (int d = 0; d < dyad_count(n); ++d) {
      const Network h = g.switched_index(d);
      const int i = dyad_at(d, n).i;
      const double dphi = gt.phi(h.index()) - gt.phi(k);
      const double dv = u(i, h) - u(i, g);
      r.max_exact_gap = std::max(r.max_exact_gap, std::abs(dphi - dv));
      if (sign(dphi) != sign(dv)) r.ordinal = false;
    }
  }
  r.exact = r.max_exact_gap <= tolerance;
  return r;
}

NashReport local_maxima_are_nash(const GibbsTable& gt, const UtilityModel& u) {
  const int n = gt.n_nodes();
  NashReport r;
  for (StateIndex k = 0; k < gt.n_states(); ++k) {
    const Network g(n, k);
    bool local_max = true;
    for (int d = 0; d < dyad_count(n) && local_max; ++d) {
      local_max = gt.phi(k) >= gt.phi(g.switched_index(d).index());
    }
    if (!local_max) continue;
    r.local_maxima.push_back(g);
    for (int d = 0; d < dyad_count(n); ++d) {
      const Dyad dy = dyad_at(d, n);
      if (u(dy.i, g.switched_index(d)) > u(dy.i, g) + kConservativeTolerance) {
        r.all_nash = false;
        r.violations.emplace_back(g, dy);
      }
    }
  }
  return r;
}

double log_partition_exact(const GibbsTable& gt) { return gt.log_partition(); }

double factorized_log_partition(const UtilityModel& u, int n_nodes) {
  if (!u.isolated()) throw InvalidArgument("factorized partition needs an isolated utility");
  const Network empty(n_nodes);
  const int width = n_nodes - 1;
  double total = 0.0;
  std::vector<double> terms(std::size_t{1} << width);
  for (int i = 0; i < n_nodes; ++i) {
    const double base = u(i, empty);
    for (std::uint64_t s = 0; s < terms.size(); ++s) {
      terms[s] = u(i, Network(n_nodes, s << (i * width))) - base;
    }
    total += log_sum_exp(terms);
  }
  return total;
}

double ensemble_average(const GibbsTable& gt, const std::function<double(const Network&)>& obs) {
  double acc = 0.0;
  for (StateIndex k = 0; k < gt.n_states(); ++k) acc += gt.pi(k) * obs(Network(gt.n_nodes(), k));
  return acc;
}

void write_gibbs_csv(std::ostream& out, const GibbsTable& gt) {
  out << "# n_nodes=" << gt.n_nodes() << " log_partition=" << fmt_double(gt.log_partition())
      << "\n";
  out << "network,phi,pi\n";
  for (StateIndex k = 0; k < gt.n_states(); ++k) {
    out << to_hex(Network(gt.n_nodes(), k)) << "," << fmt_double(gt.phi(k)) << ","
        << fmt_double(gt.pi(k)) << "\n";
  }
}

}  // namespace netform
