#pragma once

// Model variants: switching costs, epsilon-deviation dynamics, the central
// planner, and forward-looking agents (Markov-perfect equilibrium).

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "netform/choice.hpp"
#include "netform/dynamics.hpp"
#include "netform/potential.hpp"

namespace netform {

/// x + log((1 + e^{x+s}) / (e^x + e^s)).
double switching_cost_chi(double x, double s);

/// Logit choice where keeping the current state carries a bonus s >= 0:
/// p = logistic(dV - s).
class SwitchingCostProcess final : public SwitchingProcess {
 public:
  SwitchingCostProcess(UtilityModel u, double s, int n_nodes);

  int n_nodes() const override { return n_nodes_; }
  double probability(const Network& g, Dyad d) const override;
  std::string description() const override;

  double cost() const { return s_; }

 private:
  UtilityModel u_;
  double s_;
  int n_nodes_;
};

double switching_cost_probability(const UtilityModel& u, const Network& g, Dyad d, double s);

/// log(p / (1 - p)).
double log_odds_ratio(double p);

/// The optimal action is implemented with probability 1 - eps and reversed
/// with probability eps. The strategy is evaluated on the network with the
/// dyad removed, so s_d(g) = s_d(sigma_d g) holds by construction.
class EpsilonDeviationProcess final : public SwitchingProcess {
 public:
  using Strategy = std::function<bool(Dyad, const Network&)>;

  EpsilonDeviationProcess(double epsilon, Strategy strategy, int n_nodes);

  int n_nodes() const override { return n_nodes_; }
  double probability(const Network& g, Dyad d) const override;
  std::string description() const override;

  double epsilon() const { return epsilon_; }
  /// The desired state of dyad d at g (1 = present).
  bool desired(const Network& g, Dyad d) const;
  /// m_d(g) = 1 when g already matches the desired state of d.
  bool matches(const Network& g, Dyad d) const;

 private:
  double epsilon_;
  Strategy strategy_;
  int n_nodes_;
};

/// Lambda(eps) (2 m_d(g) - 1).
double epsilon_phi(const EpsilonDeviationProcess& m, const Network& g, Dyad d);

/// Returns the Gibbs table when the m-condition holds everywhere, after
/// checking Phi(g) = Lambda(eps)(2 n_m(g) - |g|), where n_m counts the
/// additions along the canonical path that were made against the desired
/// state. Otherwise returns the report carrying the witness.
std::variant<GibbsTable, ConservativenessReport> epsilon_aggregating(
    const EpsilonDeviationProcess& m, int cap_log2 = kDefaultCapLog2);

/// Every agent maximizes the shared welfare W. Under logit Phi = W - W(empty);
/// other shocks go through the general aggregating-function route.
GibbsTable central_planner_table(const std::function<double(const Network&)>& welfare,
                                 const ShockSpec& f, int n_nodes, int cap_log2 = kDefaultCapLog2);

struct MpeProblem {
  int n_nodes = 2;
  UtilityModel flow = utilities::constant(0.0);  // v_i(g)
  double rho = 1.0;   // discount rate
  MeetingProcess rates = MeetingProcess::uniform_continuous(2, 1.0);
};

struct MpeOptions {
  double damping = 0.5;
  int max_iters = 10000;
  double tolerance = 1e-10;
  int cap_log2 = kDefaultCapLog2;
};

struct MpeResult {
  Eigen::MatrixXd V;  // states x agents
  double residual = 0.0;  // sup |V - T(V)|
  bool converged = false;
  int iterations = 0;
  bool box_respected = true;  // every iterate stayed in [min v_i, max v_i]
};

/// Switching process whose utilities are the present values V.
class ValueProcess final : public SwitchingProcess {
 public:
  ValueProcess(Eigen::MatrixXd values, int n_nodes);

  int n_nodes() const override { return n_nodes_; }
  double probability(const Network& g, Dyad d) const override;
  double log_odds(const Network& g, Dyad d) const override;
  std::string description() const override { return "present_values"; }

 private:
  Eigen::MatrixXd values_;
  int n_nodes_;
};

/// Flow utilities tabulated as a states x agents matrix.
Eigen::MatrixXd tabulate_flow(const MpeProblem& p, int cap_log2 = kDefaultCapLog2);

/// T(V)_i = rho (rho I - Q_V^T)^{-1} v_i, the expected discounted flow
/// utility starting from each state.
Eigen::MatrixXd mpe_operator(const MpeProblem& p, const Eigen::MatrixXd& V,
                             int cap_log2 = kDefaultCapLog2);

MpeResult mpe_solve(const MpeProblem& p, const MpeOptions& opts = {});

struct MpeStationary {
  std::vector<double> pi;
  std::optional<GibbsTable> gibbs;  // present when the induced phi is conservative
};

MpeStationary mpe_stationary(const MpeProblem& p, const Eigen::MatrixXd& V,
                             int cap_log2 = kDefaultCapLog2);

}  // namespace netform
