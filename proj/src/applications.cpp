#include "netform/applications.hpp"

#include <bit>
#include <cmath>
#include <ostream>

#include "netform/asymptotics.hpp"
#include "netform/choice.hpp"
#include "netform/errors.hpp"
#include "netform/io.hpp"

namespace netform {

void TradeModel::validate() const {
  if (weights.empty()) throw InvalidArgument("trade model needs at least one type");
  if (!(c >= 0.0)) throw InvalidArgument("cost coefficient c must be >= 0");
  if (!(gamma >= 0.0)) throw InvalidArgument("gamma must be >= 0");
  const auto n = static_cast<Eigen::Index>(weights.size());
  if (distance.rows() != n || distance.cols() != n) throw InvalidArgument("distance must be C x C");
  if ((distance.array() < 0.0).any()) throw InvalidArgument("distances must be >= 0");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw InvalidArgument("type weights must be strictly positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("type weights must sum to 1");
}

namespace {

double coefficient(const TradeModel& tm, int r, int s) { return tm.v0 - tm.gamma * tm.distance(r, s); }

// B - 2c sum_q w_q logistic(a_rq - B): negative at 0, positive at 2c.
double fixed_point_gap(const TradeModel& tm, int r, double b) {
  double acc = 0.0;
  for (int q = 0; q < tm.n_types(); ++q) acc += tm.weights[q] * logistic(coefficient(tm, r, q) - b);
  return b - 2.0 * tm.c * acc;
}

}  // namespace

TradeSolution trade_fixed_point(const TradeModel& tm) {
  tm.validate();
  const int c = tm.n_types();
  TradeSolution sol;
  sol.T.resize(c, c);
  for (int r = 0; r < c; ++r) {
    double lo = 0.0;
    double hi = 2.0 * tm.c;
    while (hi - lo > 1e-14) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (fixed_point_gap(tm, r, mid) < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double b = 0.5 * (lo + hi);
    sol.B.push_back(b);
    sol.A.push_back(std::exp(b));
    for (int s = 0; s < c; ++s) sol.T(r, s) = logistic(coefficient(tm, r, s) - b);
    double acc = 0.0;
    for (int q = 0; q < c; ++q) acc += tm.weights[q] * sol.T(r, q);
    sol.residuals.push_back(std::abs(b - 2.0 * tm.c * acc));
  }
  return sol;
}

double trade_objective(const TradeModel& tm, int r, const std::vector<double>& x,
                       std::vector<double>* grad) {
  const int c = tm.n_types();
  if (static_cast<int>(x.size()) != c) throw InvalidArgument("point has the wrong dimension");
  double value = 0.0;
  double load = 0.0;
  for (int s = 0; s < c; ++s) {
    value += tm.weights[s] * (bernoulli_entropy(x[s]) + coefficient(tm, r, s) * x[s]);
    load += tm.weights[s] * x[s];
  }
  value -= tm.c * load * load;
  if (grad) {
    grad->resize(c);
    for (int s = 0; s < c; ++s) {
      const double h_prime = std::log1p(-x[s]) - std::log(x[s]);
      (*grad)[s] = tm.weights[s] * (h_prime + coefficient(tm, r, s) - 2.0 * tm.c * load);
    }
  }
  return value;
}

double zeta_trade(const TradeModel& tm, const TradeSolution& sol) {
  double z = 0.0;
  for (int r = 0; r < tm.n_types(); ++r) {
    std::vector<double> x(tm.n_types());
    for (int s = 0; s < tm.n_types(); ++s) x[s] = sol.T(r, s);
    z += tm.weights[r] * trade_objective(tm, r, x);
  }
  return z;
}

double zeta_trade(const TradeModel& tm) { return zeta_trade(tm, trade_fixed_point(tm)); }

Eigen::MatrixXd trade_shares_asymptotic(const TradeModel& tm) { return trade_fixed_point(tm).T; }

namespace {

void check_groups(const TradeModel& tm, const std::vector<int>& sizes) {
  tm.validate();
  if (static_cast<int>(sizes.size()) != tm.n_types()) {
    throw InvalidArgument("group sizes must match the number of types");
  }
  for (int s : sizes) {
    if (s < 1) throw InvalidArgument("every group needs at least one member");
  }
}

}  // namespace

Eigen::MatrixXd trade_shares_finite(const TradeModel& tm, const std::vector<int>& sizes) {
  check_groups(tm, sizes);
  const int c = tm.n_types();
  int n = 0;
  for (int s : sizes) n += s;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(c, c);
  for (int r = 0; r < c; ++r) {
    std::vector<int> avail(c);
    for (int s = 0; s < c; ++s) avail[s] = sizes[s] - (r == s ? 1 : 0);
    // Enumerate typed out-degree vectors k with multiplicity prod C(avail_s, k_s).
    std::vector<double> logw;
    std::vector<std::vector<int>> ks;
    std::vector<int> k(c, 0);
    while (true) {
      double lw = 0.0;
      int deg = 0;
      for (int s = 0; s < c; ++s) {
        lw += std::lgamma(avail[s] + 1.0) - std::lgamma(k[s] + 1.0) - std::lgamma(avail[s] - k[s] + 1.0);
        lw += coefficient(tm, r, s) * k[s];
        deg += k[s];
      }
      lw -= tm.c / n * static_cast<double>(deg) * deg;
      logw.push_back(lw);
      ks.push_back(k);
      int pos = 0;
      while (pos < c && k[pos] == avail[pos]) k[pos++] = 0;
      if (pos == c) break;
      ++k[pos];
    }
    const double lz = log_sum_exp(logw);
    for (std::size_t m = 0; m < ks.size(); ++m) {
      const double p = std::exp(logw[m] - lz);
      for (int s = 0; s < c; ++s) out(r, s) += p * ks[m][s];
    }
    for (int s = 0; s < c; ++s) out(r, s) = avail[s] > 0 ? out(r, s) / avail[s] : 0.0;
  }
  return out;
}

Eigen::MatrixXd trade_shares_gibbs(const TradeModel& tm, const std::vector<int>& sizes,
                                   int cap_log2) {
  check_groups(tm, sizes);
  const TypeProfile types = TypeProfile::from_group_sizes(sizes);
  const int n = types.n_nodes();
  const UtilityModel u = utilities::trade(types, tm.distance, tm.v0, tm.gamma, tm.c);
  const DiscreteChoiceProcess process(u, ShockSpec::logit(), n);
  CheckOptions opts;
  opts.cap_log2 = cap_log2;
  const GibbsTable gt = build_aggregating_function(process, opts);
  const int c = tm.n_types();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(c, c);
  for (StateIndex k = 0; k < gt.n_states(); ++k) {
    const Network g(n, k);
    for (const Dyad& d : g.links()) out(types.type_of(d.i), types.type_of(d.j)) += gt.pi(k);
  }
  for (int r = 0; r < c; ++r) {
    for (int s = 0; s < c; ++s) {
      const double pairs = static_cast<double>(sizes[r]) * (sizes[s] - (r == s ? 1 : 0));
      out(r, s) = pairs > 0.0 ? out(r, s) / pairs : 0.0;
    }
  }
  return out;
}

double linear_response(const GibbsTable& gt0, const std::function<double(const Network&)>& f,
                       const std::function<double(const Network&)>& observable) {
  double ef = 0.0;
  double ea = 0.0;
  double eaf = 0.0;
  for (StateIndex k = 0; k < gt0.n_states(); ++k) {
    const Network g(gt0.n_nodes(), k);
    const double fv = f(g);
    const double av = observable(g);
    ef += gt0.pi(k) * fv;
    ea += gt0.pi(k) * av;
    eaf += gt0.pi(k) * av * fv;
  }
  return eaf - ea * ef;
}

double reciprocity_count(const Network& g) {
  double count = 0.0;
  for (const Dyad& d : g.links()) {
    if (d.i < d.j && g.has({d.j, d.i})) count += 1.0;
  }
  return count;
}

void write_trade_csv(std::ostream& out, const TradeModel& tm, const TradeSolution& sol) {
  out << "r,s,D,T\n";
  for (int r = 0; r < tm.n_types(); ++r) {
    for (int s = 0; s < tm.n_types(); ++s) {
      out << r << "," << s << "," << fmt_double(tm.distance(r, s)) << "," << fmt_double(sol.T(r, s))
          << "\n";
    }
  }
}

void write_trade_summary_csv(std::ostream& out, const TradeModel& tm, const TradeSolution& sol) {
  out << "r,B,A,residual\n";
  for (int r = 0; r < tm.n_types(); ++r) {
    out << r << "," << fmt_double(sol.B[r]) << "," << fmt_double(sol.A[r]) << ","
        << fmt_double(sol.residuals[r]) << "\n";
  }
  out << "zeta_trade," << fmt_double(zeta_trade(tm, sol)) << ",,\n";
}

}  // namespace netform
