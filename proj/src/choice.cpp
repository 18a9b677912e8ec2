#include "netform/choice.hpp"

#include <bit>
#include <cmath>
#include <numeric>

#include "netform/errors.hpp"
#include "netform/random.hpp"

namespace netform {

UtilityModel::UtilityModel(std::string name, Evaluator eval, bool isolated)
    : name_(std::move(name)), eval_(std::move(eval)), isolated_(isolated) {
  if (!eval_) throw InvalidArgument("utility model needs an evaluator");
}

UtilityModel UtilityModel::tabulated(int n_nodes, int cap_log2) const {
  const StateIndex states = state_count(n_nodes, cap_log2);
  auto table = std::make_shared<std::vector<double>>(static_cast<std::size_t>(states) * n_nodes);
  for (StateIndex k = 0; k < states; ++k) {
    const Network g(n_nodes, k);
    for (int i = 0; i < n_nodes; ++i) (*table)[k * n_nodes + i] = eval_(i, g);
  }
  auto eval = [table, n_nodes](int agent, const Network& g) {
    return (*table)[g.index() * n_nodes + agent];
  };
  return UtilityModel(name_, eval, isolated_);
}

bool verify_isolated(const UtilityModel& u, int n_nodes, int cap_log2) {
  for (const Network& g : enumerate_networks(n_nodes, cap_log2)) {
    for (int i = 0; i < n_nodes; ++i) {
      if (u(i, g) != u(i, out_subgraph(g, i))) return false;
    }
  }
  return true;
}

namespace utilities {

UtilityModel outdegree(std::function<double(int)> v, std::string name) {
  auto eval = [v = std::move(v)](int agent, const Network& g) {
    return v(std::popcount(g.out_bits(agent)));
  };
  return UtilityModel(std::move(name), eval, true);
}

UtilityModel outdegree_linear(double a) {
  return outdegree([a](int d) { return a * d; }, "outdegree_linear");
}

namespace {

void check_typed_inputs(const TypeProfile& types, const Eigen::MatrixXd& distance) {
  if (!types.finite()) throw InvalidArgument("typed utilities need a finite-N type profile");
  if (distance.rows() != types.n_types() || distance.cols() != types.n_types()) {
    throw InvalidArgument("distance matrix must be C x C");
  }
  if ((distance.array() < 0.0).any()) throw InvalidArgument("distances must be non-negative");
}

double typed_link_sum(const TypeProfile& types, const Eigen::MatrixXd& distance, double v0,
                      double gamma, int agent, const Network& g) {
  double total = 0.0;
  const int ti = types.type_of(agent);
  for (std::uint64_t b = g.out_bits(agent); b != 0; b &= b - 1) {
    const int r = std::countr_zero(b);
    const int j = r < agent ? r : r + 1;
    total += v0 - gamma * distance(ti, types.type_of(j));
  }
  return total;
}

}  // namespace

UtilityModel typed_linear(const TypeProfile& types, const Eigen::MatrixXd& distance, double v0,
                          double gamma) {
  check_typed_inputs(types, distance);
  auto eval = [types, distance, v0, gamma](int agent, const Network& g) {
    return typed_link_sum(types, distance, v0, gamma, agent, g);
  };
  return UtilityModel("typed_linear", eval, true);
}

UtilityModel trade(const TypeProfile& types, const Eigen::MatrixXd& distance, double v0,
                   double gamma, double c) {
  check_typed_inputs(types, distance);
  if (c < 0.0) throw InvalidArgument("trade cost coefficient must be non-negative");
  const double n = types.n_nodes();
  auto eval = [types, distance, v0, gamma, c, n](int agent, const Network& g) {
    const double degree = std::popcount(g.out_bits(agent));
    return typed_link_sum(types, distance, v0, gamma, agent, g) - (c / n) * degree * degree;
  };
  return UtilityModel("trade", eval, true);
}

UtilityModel shared(std::function<double(const Network&)> welfare, std::string name) {
  auto eval = [w = std::move(welfare)](int, const Network& g) { return w(g); };
  return UtilityModel(std::move(name), eval, false);
}

UtilityModel constant(double value) {
  return UtilityModel("constant", [value](int, const Network&) { return value; }, true);
}

namespace {

double hashed_uniform(std::uint64_t seed, std::uint64_t key, double scale) {
  return scale * (2.0 * unit_interval(derive_seed(seed, key)) - 1.0);
}

}  // namespace

UtilityModel random_isolated(int n_nodes, std::uint64_t seed, double scale) {
  (void)state_count(n_nodes, 62);
  const std::size_t per_agent = std::size_t{1} << (n_nodes - 1);
  auto table = std::make_shared<std::vector<double>>(per_agent * n_nodes);
  for (std::size_t k = 0; k < table->size(); ++k) (*table)[k] = hashed_uniform(seed, k, scale);
  auto eval = [table, per_agent](int agent, const Network& g) {
    return (*table)[agent * per_agent + g.out_bits(agent)];
  };
  return UtilityModel("random_isolated", eval, true);
}

UtilityModel random_table(int n_nodes, std::uint64_t seed, double scale) {
  auto eval = [seed, scale, n_nodes](int agent, const Network& g) {
    return hashed_uniform(seed, g.index() * n_nodes + agent, scale);
  };
  return UtilityModel("random_table", eval, false);
}

}  // namespace utilities

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

ShockSpec ShockSpec::logit() { return ShockSpec("logit", logistic, true); }

ShockSpec ShockSpec::custom(std::string name, std::function<double(double)> cdf) {
  if (!cdf) throw InvalidArgument("custom shock needs a cumulative function");
  double previous = -1.0;
  for (int k = 0; k <= 100; ++k) {
    const double x = -20.0 + 0.4 * k;
    const double fx = cdf(x);
    if (!(fx > 0.0 && fx < 1.0)) {
      throw InvalidArgument("shock cdf '" + name + "' leaves (0,1) at x = " + std::to_string(x));
    }
    if (!(fx > previous)) {
      throw InvalidArgument("shock cdf '" + name + "' is not strictly increasing near x = " +
                            std::to_string(x));
    }
    if (std::abs(fx + cdf(-x) - 1.0) > 1e-12) {
      throw InvalidArgument("shock cdf '" + name + "' is not symmetric at x = " +
                            std::to_string(x));
    }
    previous = fx;
  }
  return ShockSpec(std::move(name), std::move(cdf), false);
}

ShockSpec ShockSpec::probit(double scale) {
  if (!(scale > 0.0)) throw InvalidArgument("probit scale must be positive");
  auto cdf = [scale](double x) { return 0.5 * std::erfc(-x / (scale * std::sqrt(2.0))); };
  return custom("probit", cdf);
}

double ShockSpec::cdf(double x) const { return cdf_(x); }

double ShockSpec::log_odds(double x) const {
  if (logit_) return x;
  const double up = cdf_(x);
  const double down = cdf_(-x);
  if (!(up > 0.0) || !(down > 0.0)) {
    throw DegenerateProbability("shock cdf underflows at utility difference " + std::to_string(x));
  }
  return std::log(up) - std::log(down);
}

MeetingProcess::MeetingProcess(Kind kind, std::vector<double> w)
    : kind_(kind), weights_(std::move(w)), total_(0.0) {
  if (weights_.empty()) throw InvalidArgument("meeting process needs at least one dyad");
  for (double x : weights_) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw InvalidArgument("meeting weights must be strictly positive and finite");
    }
    total_ += x;
  }
  if (kind_ == Kind::Discrete && !(total_ < 1.0)) {
    throw InvalidArgument("total meeting probability must be < 1");
  }
}

MeetingProcess MeetingProcess::discrete(std::vector<double> q) {
  return MeetingProcess(Kind::Discrete, std::move(q));
}

MeetingProcess MeetingProcess::continuous(std::vector<double> rates) {
  return MeetingProcess(Kind::Continuous, std::move(rates));
}

MeetingProcess MeetingProcess::uniform_discrete(int n_nodes, double total_probability) {
  const int m = dyad_count(n_nodes);
  return discrete(std::vector<double>(m, total_probability / m));
}

MeetingProcess MeetingProcess::uniform_continuous(int n_nodes, double total_rate) {
  const int m = dyad_count(n_nodes);
  return continuous(std::vector<double>(m, total_rate / m));
}

std::vector<double> conditional_meeting_distribution(const MeetingProcess& m) {
  std::vector<double> out = m.weights();
  for (double& x : out) x /= m.total();
  return out;
}

double switching_probability(const UtilityModel& u, const ShockSpec& f, const Network& g, Dyad d) {
  const double gain = u(d.i, g.switched(d)) - u(d.i, g);
  const double p = f.cdf(gain);
  if (!(p > 0.0 && p < 1.0)) {
    throw DegenerateProbability("switching probability " + std::to_string(p) +
                                " at utility difference " + std::to_string(gain));
  }
  return p;
}

double phi_value(const UtilityModel& u, const ShockSpec& f, const Network& g, Dyad d) {
  const Network flipped = g.switched(d);
  // Both directions must be non-degenerate before the ratio means anything.
  (void)switching_probability(u, f, g, d);
  (void)switching_probability(u, f, flipped, d);
  return f.log_odds(u(d.i, flipped) - u(d.i, g));
}

double SwitchingProcess::log_odds(const Network& g, Dyad d) const {
  return std::log(probability(g, d)) - std::log(probability(g.switched(d), d));
}

DiscreteChoiceProcess::DiscreteChoiceProcess(UtilityModel u, ShockSpec f, int n_nodes)
    : u_(std::move(u)), f_(std::move(f)), n_nodes_(n_nodes) {
  (void)Network(n_nodes);
}

double DiscreteChoiceProcess::probability(const Network& g, Dyad d) const {
  return switching_probability(u_, f_, g, d);
}

double DiscreteChoiceProcess::log_odds(const Network& g, Dyad d) const {
  return phi_value(u_, f_, g, d);
}

std::string DiscreteChoiceProcess::description() const {
  return "discrete_choice(" + u_.name() + ", " + f_.name() + ")";
}

}  // namespace netform
