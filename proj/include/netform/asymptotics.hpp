#pragma once

// Large-N limits: zeta = lim (1/N^2) log Z_N as an entropy-plus-utility
// maximization, homophily closed forms, and link density / neighbour
// distance as derivatives of zeta.

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace netform {

/// -p ln p - (1-p) ln(1-p), with H(0) = H(1) = 0.
double bernoulli_entropy(double p);

/// Limiting isolated-choice model: type weights w and per-type utilities
/// v_r(y), evaluated at y = w (.) x_r.
struct LimitModel {
  using Utility = std::function<double(int r, std::span<const double> y)>;
  /// Writes dv_r/dy into grad.
  using Gradient = std::function<void(int r, std::span<const double> y, std::span<double> grad)>;

  std::vector<double> weights;
  Utility utility;
  Gradient gradient;  // optional

  int n_types() const { return static_cast<int>(weights.size()); }
  void validate() const;

  /// v_r(y) = sum_s a(r,s) y_s.
  static LimitModel linear(std::vector<double> w, Eigen::MatrixXd a);
  /// v_r(y) = sum_s (v0 - gamma D(r,s)) y_s - c (sum_s y_s)^2.
  static LimitModel trade(std::vector<double> w, const Eigen::MatrixXd& distance, double v0,
                          double gamma, double c);
};

struct ZetaResult {
  double zeta = 0.0;
  std::vector<std::vector<double>> maximizers;  // x*_r
  int iterations = 0;
  double gradient_norm = 0.0;  // worst type, in x coordinates
  bool converged = false;
};

struct ZetaOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 500;
};

/// zeta = sum_r w_r max_x { sum_s w_s H(x_s) + v_r(w (.) x) - v_r(0) }.
ZetaResult zeta_isolated(const LimitModel& lm, const ZetaOptions& opts = {});

/// Objective of one type's inner problem and its gradient in x.
double zeta_objective(const LimitModel& lm, int r, std::span<const double> x,
                      std::span<double> grad = {});

/// sum_{r,s} w_r w_s log(1 + exp(v0 - gamma D(r,s))).
double zeta_discrete_homophily(double v0, double gamma, const Eigen::MatrixXd& distance,
                               std::span<const double> w);

/// Li2(z) for z <= 0.
double dilog(double z);

struct QuadratureOptions {
  double abs_tolerance = 1e-8;
  unsigned max_depth = 15;
  /// Interior points where the inner integrand (over theta') has kinks,
  /// as a function of the outer theta.
  std::function<std::vector<double>(double theta)> inner_breakpoints;
};

/// int int rho(t) rho(t') log(1 + exp(v0 - gamma D(t,t'))) dt dt' over [lo,hi]^2.
double zeta_continuous(double v0, double gamma, const std::function<double(double)>& density,
                       const std::function<double(double, double)>& distance, double lo, double hi,
                       const QuadratureOptions& opts = {});

/// Uniform density on a circle of circumference L with arc distance.
double zeta_continuous_uniform_circle(double v0, double gamma, double circumference);

/// The same model evaluated by quadrature (independent route).
double zeta_circle_quadrature(double v0, double gamma, double circumference,
                              double abs_tolerance = 1e-8);

struct DensityDistance {
  double mu = 0.0;   // d zeta / d v0
  double eta = 0.0;  // -(d zeta / d gamma) / mu
};

/// Central differences (step 1e-5) with one Richardson extrapolation.
DensityDistance density_and_distance(const std::function<double(double, double)>& zeta_fn,
                                     double v0, double gamma, double step = 1e-5);
DensityDistance homophily_density_and_distance(double v0, double gamma,
                                               const Eigen::MatrixXd& distance,
                                               std::span<const double> w);
DensityDistance circle_density_and_distance(double v0, double gamma, double circumference);

/// Exact log Z_N of the finite typed-linear isolated model with group
/// sizes N_r: sum_{r,s} N_r (N_s - [r=s]) log(1 + exp(v0 - gamma D(r,s))).
double typed_linear_log_partition(std::span<const int> sizes, const Eigen::MatrixXd& distance,
                                  double v0, double gamma);

/// Exact <|g|> / (N(N-1)) for the same finite model.
double typed_linear_link_fraction(std::span<const int> sizes, const Eigen::MatrixXd& distance,
                                  double v0, double gamma);

struct SweepRow {
  std::string model;
  double v0 = 0.0;
  double gamma = 0.0;
  double mu = 0.0;
  double eta = 0.0;
  double zeta = 0.0;
};

/// CSV: model,v0,gamma,mu,eta,zeta.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace netform
