#include "netform/extensions.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "netform/errors.hpp"
#include "netform/io.hpp"

namespace netform {

double switching_cost_chi(double x, double s) {
  const double hi = std::max(x, s);
  const double logaddexp = hi + std::log1p(std::exp(-std::abs(x - s)));
  return x + softplus(x + s) - logaddexp;
}

double switching_cost_probability(const UtilityModel& u, const Network& g, Dyad d, double s) {
  const double gain = u(d.i, g.switched(d)) - u(d.i, g);
  const double p = logistic(gain - s);
  if (!(p > 0.0 && p < 1.0)) {
    throw DegenerateProbability("switching probability " + fmt_double(p) + " at utility difference " +
                                fmt_double(gain));
  }
  return p;
}

SwitchingCostProcess::SwitchingCostProcess(UtilityModel u, double s, int n_nodes)
    : u_(std::move(u)), s_(s), n_nodes_(n_nodes) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidArgument("switching cost must be finite and >= 0");
  (void)Network(n_nodes);
}

double SwitchingCostProcess::probability(const Network& g, Dyad d) const {
  return switching_cost_probability(u_, g, d, s_);
}

std::string SwitchingCostProcess::description() const {
  return "switching_cost(" + u_.name() + ", s=" + fmt_double(s_) + ")";
}

double log_odds_ratio(double p) { return std::log(p) - std::log1p(-p); }

EpsilonDeviationProcess::EpsilonDeviationProcess(double epsilon, Strategy strategy, int n_nodes)
    : epsilon_(epsilon), strategy_(std::move(strategy)), n_nodes_(n_nodes) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0,1)");
  if (!strategy_) throw InvalidArgument("epsilon-deviation model needs a strategy");
  (void)Network(n_nodes);
}

bool EpsilonDeviationProcess::desired(const Network& g, Dyad d) const {
  const Network absent = g.has(d) ? g.switched(d) : g;
  return strategy_(d, absent);
}

bool EpsilonDeviationProcess::matches(const Network& g, Dyad d) const {
  return desired(g, d) == g.has(d);
}

double EpsilonDeviationProcess::probability(const Network& g, Dyad d) const {
  return matches(g, d) ? epsilon_ : 1.0 - epsilon_;
}

std::string EpsilonDeviationProcess::description() const {
  return "epsilon_deviation(eps=" + fmt_double(epsilon_) + ")";
}

double epsilon_phi(const EpsilonDeviationProcess& m, const Network& g, Dyad d) {
  return log_odds_ratio(m.epsilon()) * (m.matches(g, d) ? 1.0 : -1.0);
}

std::variant<GibbsTable, ConservativenessReport> epsilon_aggregating(
    const EpsilonDeviationProcess& m, int cap_log2) {
  CheckOptions opts;
  opts.cap_log2 = cap_log2;
  ConservativenessReport report = check_conservative(m, opts);
  if (!report.conservative) return report;
  GibbsTable gt = build_path_potential(m, {}, cap_log2);
  const int n = m.n_nodes();
  const double lambda = log_odds_ratio(m.epsilon());
  for (StateIndex k = 0; k < gt.n_states(); ++k) {
    const Network g(n, k);
    Network h(n);
    int against = 0;
    for (const Dyad& d : g.links()) {
      if (m.matches(h, d)) ++against;
      h = h.switched(d);
    }
    const double expected = lambda * (2.0 * against - g.size());
    if (std::abs(expected - gt.phi(k)) > 1e-12 * (1.0 + std::abs(expected))) {
      throw SolverFailure("epsilon-deviation potential disagrees with the counting formula at " +
                          to_hex(g));
    }
  }
  return gt;
}

GibbsTable central_planner_table(const std::function<double(const Network&)>& welfare,
                                 const ShockSpec& f, int n_nodes, int cap_log2) {
  if (!f.is_logit()) {
    const DiscreteChoiceProcess process(utilities::shared(welfare, "planner"), f, n_nodes);
    CheckOptions opts;
    opts.cap_log2 = cap_log2;
    return build_aggregating_function(process, opts);
  }
  const StateIndex states = state_count(n_nodes, cap_log2);
  const double base = welfare(Network(n_nodes));
  std::vector<double> phi(states);
  for (StateIndex k = 0; k < states; ++k) phi[k] = welfare(Network(n_nodes, k)) - base;
  return GibbsTable::from_potential(n_nodes, std::move(phi));
}

ValueProcess::ValueProcess(Eigen::MatrixXd values, int n_nodes)
    : values_(std::move(values)), n_nodes_(n_nodes) {
  if (values_.rows() != static_cast<Eigen::Index>(state_count(n_nodes, 62)) ||
      values_.cols() != n_nodes) {
    throw InvalidArgument("value matrix must be states x agents");
  }
}

double ValueProcess::probability(const Network& g, Dyad d) const {
  const double p = logistic(log_odds(g, d));
  if (!(p > 0.0 && p < 1.0)) throw DegenerateProbability("present-value switching degenerate");
  return p;
}

double ValueProcess::log_odds(const Network& g, Dyad d) const {
  return values_(static_cast<Eigen::Index>(g.switched(d).index()), d.i) -
         values_(static_cast<Eigen::Index>(g.index()), d.i);
}

Eigen::MatrixXd tabulate_flow(const MpeProblem& p, int cap_log2) {
  const StateIndex states = state_count(p.n_nodes, cap_log2);
  Eigen::MatrixXd v(static_cast<Eigen::Index>(states), p.n_nodes);
  for (StateIndex k = 0; k < states; ++k) {
    const Network g(p.n_nodes, k);
    for (int i = 0; i < p.n_nodes; ++i) v(static_cast<Eigen::Index>(k), i) = p.flow(i, g);
  }
  return v;
}

namespace {

void validate_problem(const MpeProblem& p) {
  if (!(p.rho > 0.0) || !std::isfinite(p.rho)) throw InvalidArgument("discount rate must be > 0");
  if (p.rates.kind() != MeetingProcess::Kind::Continuous) {
    throw InvalidArgument("forward-looking model needs continuous meeting rates");
  }
  if (p.rates.n_dyads() != dyad_count(p.n_nodes)) {
    throw InvalidArgument("meeting rates length differs from dyad count");
  }
}

// Solves (rho I - Q_V^T) Y = rho v with one factorization.
Eigen::MatrixXd apply_operator(const MpeProblem& p, const Eigen::MatrixXd& flow,
                               const Eigen::MatrixXd& V) {
  const int n = p.n_nodes;
  const int md = dyad_count(n);
  const auto states = flow.rows();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(states) * (md + 1));
  for (Eigen::Index k = 0; k < states; ++k) {
    double out = 0.0;
    for (int d = 0; d < md; ++d) {
      const Dyad dy = dyad_at(d, n);
      const auto h = static_cast<Eigen::Index>(static_cast<StateIndex>(k) ^ (StateIndex{1} << d));
      const double rate = p.rates.weights()[d] * logistic(V(h, dy.i) - V(k, dy.i));
      entries.emplace_back(k, h, -rate);
      out += rate;
    }
    entries.emplace_back(k, k, p.rho + out);
  }
  Eigen::SparseMatrix<double> m(states, states);
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) throw SolverFailure("resolvent factorization failed");
  Eigen::MatrixXd rhs = p.rho * flow;
  Eigen::MatrixXd y = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !y.allFinite()) throw SolverFailure("resolvent solve failed");
  return y;
}

}  // namespace

Eigen::MatrixXd mpe_operator(const MpeProblem& p, const Eigen::MatrixXd& V, int cap_log2) {
  validate_problem(p);
  const Eigen::MatrixXd flow = tabulate_flow(p, cap_log2);
  if (V.rows() != flow.rows() || V.cols() != flow.cols()) {
    throw InvalidArgument("value matrix must be states x agents");
  }
  return apply_operator(p, flow, V);
}

MpeResult mpe_solve(const MpeProblem& p, const MpeOptions& opts) {
  validate_problem(p);
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) throw InvalidArgument("damping must lie in (0,1]");
  if (opts.max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  const Eigen::MatrixXd flow = tabulate_flow(p, opts.cap_log2);
  const Eigen::RowVectorXd lo = flow.colwise().minCoeff();
  const Eigen::RowVectorXd hi = flow.colwise().maxCoeff();
  auto inside = [&](const Eigen::MatrixXd& v) {
    for (Eigen::Index i = 0; i < v.cols(); ++i) {
      const double slack = 1e-12 * (1.0 + std::abs(lo(i)) + std::abs(hi(i)));
      if (v.col(i).minCoeff() < lo(i) - slack || v.col(i).maxCoeff() > hi(i) + slack) return false;
    }
    return true;
  };
  MpeResult r;
  r.V = flow;
  for (r.iterations = 1; r.iterations <= opts.max_iters; ++r.iterations) {
    const Eigen::MatrixXd tv = apply_operator(p, flow, r.V);
    r.residual = (r.V - tv).cwiseAbs().maxCoeff();
    if (r.residual < opts.tolerance) {
      r.converged = true;
      break;
    }
    r.V = (1.0 - opts.damping) * r.V + opts.damping * tv;
    r.box_respected = r.box_respected && inside(r.V);
  }
  r.iterations = std::min(r.iterations, opts.max_iters);
  return r;
}

MpeStationary mpe_stationary(const MpeProblem& p, const Eigen::MatrixXd& V, int cap_log2) {
  validate_problem(p);
  const ValueProcess process(V, p.n_nodes);
  MpeStationary out;
  out.pi = stationary_exact(build_transition_operator(process, p.rates, cap_log2));
  CheckOptions opts;
  opts.cap_log2 = cap_log2;
  if (check_conservative(process, opts).conservative) {
    out.gibbs = build_path_potential(process, {}, cap_log2);
  }
  return out;
}

}  // namespace netform
