#pragma once

// Utilities, shock distributions, meeting processes, and the switching
// probabilities p_ij(g) they induce.

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "netform/network.hpp"

namespace netform {

/// Deterministic utility V_i(g), in utils.
///
/// `isolated` declares that V_i(g) depends on g only through S_i(g); it is a
/// capability flag that enables the factorized routes, and can be checked
/// exhaustively with verify_isolated().
class UtilityModel {
 public:
  using Evaluator = std::function<double(int agent, const Network& g)>;

  UtilityModel(std::string name, Evaluator eval, bool isolated);

  double operator()(int agent, const Network& g) const { return eval_(agent, g); }
  bool isolated() const { return isolated_; }
  const std::string& name() const { return name_; }

  /// Memoized copy: every (agent, network) value precomputed into an
  /// immutable table, so the result is safe to share across threads.
  UtilityModel tabulated(int n_nodes, int cap_log2 = kDefaultCapLog2) const;

 private:
  std::string name_;
  Evaluator eval_;
  bool isolated_;
};

/// True iff V_i(g) == V_i(S_i(g)) for every agent and network (exhaustive).
bool verify_isolated(const UtilityModel& u, int n_nodes, int cap_log2 = kDefaultCapLog2);

namespace utilities {

/// V_i(g) = v(outdeg_i(g)).
UtilityModel outdegree(std::function<double(int)> v, std::string name = "outdegree");
/// V_i(g) = a * outdeg_i(g).
UtilityModel outdegree_linear(double a);
/// V_i(g) = sum over out-neighbours j of (v0 - gamma * D[type i][type j]).
UtilityModel typed_linear(const TypeProfile& types, const Eigen::MatrixXd& distance, double v0,
                          double gamma);
/// typed_linear minus (c / N) * outdeg_i(g)^2.
UtilityModel trade(const TypeProfile& types, const Eigen::MatrixXd& distance, double v0,
                   double gamma, double c);
/// Every agent evaluates the shared welfare W(g).
UtilityModel shared(std::function<double(const Network&)> welfare, std::string name = "shared");
UtilityModel constant(double value);
/// Independent uniform draws in [-scale, scale] for each (agent, out-subgraph).
UtilityModel random_isolated(int n_nodes, std::uint64_t seed, double scale = 1.0);
/// Independent uniform draws in [-scale, scale] for each (agent, network).
UtilityModel random_table(int n_nodes, std::uint64_t seed, double scale = 1.0);

}  // namespace utilities

/// Distribution F1 of the shock difference eps^1 - eps^0.
class ShockSpec {
 public:
  static ShockSpec logit();
  /// Validated on a 101-point grid over [-20, 20]: F1(x) + F1(-x) = 1 within
  /// 1e-12, values strictly inside (0,1) and strictly increasing.
  static ShockSpec custom(std::string name, std::function<double(double)> cdf);
  /// Gaussian shock difference with standard deviation `scale`.
  static ShockSpec probit(double scale);

  const std::string& name() const { return name_; }
  bool is_logit() const { return logit_; }
  double cdf(double x) const;
  /// log(F1(x) / F1(-x)); exactly x for the logistic family.
  double log_odds(double x) const;

 private:
  ShockSpec(std::string name, std::function<double(double)> cdf, bool logit)
      : name_(std::move(name)), cdf_(std::move(cdf)), logit_(logit) {}
  std::string name_;
  std::function<double(double)> cdf_;
  bool logit_;
};

double logistic(double x);
/// log(1 + e^x) without overflow.
double softplus(double x);

/// Exogenous meeting process: per-dyad probabilities (discrete time) or
/// Poisson rates (continuous time), in canonical dyad order.
class MeetingProcess {
 public:
  enum class Kind { Discrete, Continuous };

  static MeetingProcess discrete(std::vector<double> q);
  static MeetingProcess continuous(std::vector<double> rates);
  static MeetingProcess uniform_discrete(int n_nodes, double total_probability);
  static MeetingProcess uniform_continuous(int n_nodes, double total_rate);

  Kind kind() const { return kind_; }
  const std::vector<double>& weights() const { return weights_; }
  /// q or lambda.
  double total() const { return total_; }
  int n_dyads() const { return static_cast<int>(weights_.size()); }

 private:
  MeetingProcess(Kind kind, std::vector<double> w);
  Kind kind_;
  std::vector<double> weights_;
  double total_;
};

/// q/q or lambda/lambda.
std::vector<double> conditional_meeting_distribution(const MeetingProcess& m);

/// p_ij(g) = F1(V_i(sigma_ij g) - V_i(g)). Throws DegenerateProbability when
/// F1 returns exactly 0 or 1.
double switching_probability(const UtilityModel& u, const ShockSpec& f, const Network& g, Dyad d);

/// phi_ij(g) = log(p_ij(g) / p_ij(sigma_ij g)).
double phi_value(const UtilityModel& u, const ShockSpec& f, const Network& g, Dyad d);

/// Any rule assigning a non-degenerate switching probability to every
/// (network, dyad). Implementations are immutable and thread-safe.
class SwitchingProcess {
 public:
  virtual ~SwitchingProcess() = default;
  virtual int n_nodes() const = 0;
  virtual double probability(const Network& g, Dyad d) const = 0;
  /// phi_d(g). The default divides the two probabilities.
  virtual double log_odds(const Network& g, Dyad d) const;
  virtual std::string description() const = 0;
};

/// The discrete-choice formation process built from (V, F1).
class DiscreteChoiceProcess final : public SwitchingProcess {
 public:
  DiscreteChoiceProcess(UtilityModel u, ShockSpec f, int n_nodes);

  int n_nodes() const override { return n_nodes_; }
  double probability(const Network& g, Dyad d) const override;
  double log_odds(const Network& g, Dyad d) const override;
  std::string description() const override;

  const UtilityModel& utility() const { return u_; }
  const ShockSpec& shock() const { return f_; }

 private:
  UtilityModel u_;
  ShockSpec f_;
  int n_nodes_;
};

}  // namespace netform
