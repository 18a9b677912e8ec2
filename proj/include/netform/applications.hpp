#pragma once

// Trade routes with a convex link cost, and linear response of ensemble
// averages to a small network-function perturbation.

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <vector>

#include "netform/network.hpp"
#include "netform/potential.hpp"

namespace netform {

struct TradeModel {
  double v0 = 0.0;
  double gamma = 0.0;
  double c = 0.0;
  Eigen::MatrixXd distance;    // C x C
  std::vector<double> weights;  // w_r, summing to 1

  int n_types() const { return static_cast<int>(weights.size()); }
  void validate() const;
};

struct TradeSolution {
  std::vector<double> B;
  std::vector<double> A;       // exp(B_r)
  Eigen::MatrixXd T;           // T(r,s) = logistic(v0 - gamma D(r,s) - B_r)
  std::vector<double> residuals;  // |B_r - 2c sum_q w_q T(r,q)|
};

/// Bisection on B_r in [0, 2c] down to an interval width of 1e-14.
TradeSolution trade_fixed_point(const TradeModel& tm);

/// Objective of type r's inner problem at x, with its gradient in x.
double trade_objective(const TradeModel& tm, int r, const std::vector<double>& x,
                       std::vector<double>* grad = nullptr);

/// sum_r w_r objective_r(T row r).
double zeta_trade(const TradeModel& tm);
double zeta_trade(const TradeModel& tm, const TradeSolution& sol);

/// The limiting trade-share matrix T.
Eigen::MatrixXd trade_shares_asymptotic(const TradeModel& tm);

/// Exact <T_rs,N> = <l_rs(g)> / (N_r (N_s - [r=s])) for the finite model
/// V_i = sum_{j in N_i} (v0 - gamma D) - (c/N)|N_i|^2 on the given groups.
/// Each agent's out-links are independent, so the average is computed from
/// the per-agent typed-degree distribution; works for any N.
Eigen::MatrixXd trade_shares_finite(const TradeModel& tm, const std::vector<int>& group_sizes);

/// The same quantity by brute force over a Gibbs table (N <= 4).
Eigen::MatrixXd trade_shares_gibbs(const TradeModel& tm, const std::vector<int>& group_sizes,
                                   int cap_log2 = kDefaultCapLog2);

/// d<A>/d eps at eps = 0 for Phi0 + eps f: <A f> - <A><f> under pi0.
double linear_response(const GibbsTable& gt0, const std::function<double(const Network&)>& f,
                       const std::function<double(const Network&)>& observable);

/// Number of reciprocated pairs {i, j} with ij and ji both present.
double reciprocity_count(const Network& g);

/// CSV: r,s,D,T.
void write_trade_csv(std::ostream& out, const TradeModel& tm, const TradeSolution& sol);
/// CSV: r,B,A,residual plus a final zeta row.
void write_trade_summary_csv(std::ostream& out, const TradeModel& tm, const TradeSolution& sol);

}  // namespace netform
