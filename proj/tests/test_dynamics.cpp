#include <cmath>
#include <sstream>

#include "doctest.h"
#include "netform/dynamics.hpp"
#include "netform/errors.hpp"
#include "netform/extensions.hpp"
#include "netform/potential.hpp"
#include "oracles.hpp"

using namespace netform;

namespace {

const double kLn3 = std::log(3.0);

DiscreteChoiceProcess logit_process(const UtilityModel& u, int n) {
  return DiscreteChoiceProcess(u, ShockSpec::logit(), n);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST_CASE("transition operator entries") {
  const auto process = logit_process(utilities::constant(0.0), 2);
  const auto op = build_transition_operator(process, MeetingProcess::discrete({0.25, 0.25}));
  CHECK(op.matrix.coeff(1, 0) == doctest::Approx(0.125));
  CHECK(op.matrix.coeff(2, 0) == doctest::Approx(0.125));
  CHECK(op.matrix.coeff(0, 0) == doctest::Approx(0.75));
  CHECK(op.matrix.coeff(3, 0) == 0.0);
}

TEST_CASE("columns are stochastic and the generator identity holds") {
  const auto process = logit_process(utilities::outdegree_linear(kLn3), 2);
  const auto m = MeetingProcess::discrete({0.1, 0.3});
  const auto op = build_transition_operator(process, m);
  for (int c = 0; c < 4; ++c) {
    double s = 0.0;
    for (int r = 0; r < 4; ++r) {
      CHECK(op.matrix.coeff(r, c) >= 0.0);
      s += op.matrix.coeff(r, c);
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  const Eigen::MatrixXd a = Eigen::MatrixXd(normalized_generator(op));
  const Eigen::MatrixXd p = Eigen::MatrixXd(op.matrix);
  const Eigen::MatrixXd back = (p - Eigen::MatrixXd::Identity(4, 4)) / m.total();
  CHECK((a - back).cwiseAbs().maxCoeff() < 1e-14);

  const auto cont = build_transition_operator(process, MeetingProcess::continuous({1.0, 2.0}));
  for (int c = 0; c < 4; ++c) {
    double s = 0.0;
    for (int r = 0; r < 4; ++r) {
      if (r != c) CHECK(cont.matrix.coeff(r, c) >= 0.0);
      s += cont.matrix.coeff(r, c);
    }
    CHECK(std::abs(s) < 1e-12);
  }
}

TEST_CASE("stationary examples") {
  const auto op = build_transition_operator(logit_process(utilities::outdegree_linear(kLn3), 2),
                                            MeetingProcess::uniform_discrete(2, 0.5));
  const auto pi = stationary_exact(op);
  const double ref[] = {1.0 / 16, 3.0 / 16, 3.0 / 16, 9.0 / 16};
  for (int k = 0; k < 4; ++k) CHECK(std::abs(pi[k] - ref[k]) < 1e-14);

  const auto flat = stationary_exact(build_transition_operator(
      logit_process(utilities::constant(0.0), 3), MeetingProcess::uniform_discrete(3, 0.4)));
  for (double x : flat) CHECK(std::abs(x - 1.0 / 64) < 1e-14);
}

TEST_CASE("stationary solve agrees with a dense power-iteration oracle") {
  oracle::Gen gen(31);
  const SwitchingCostProcess process(utilities::random_isolated(3, gen.seed(), 1.5), 0.5, 3);
  std::vector<double> q(6);
  for (double& x : q) x = gen.uniform(0.02, 0.15);
  const auto op = build_transition_operator(process, MeetingProcess::discrete(q));
  const auto pi = stationary_exact(op);
  const auto ref = oracle::power_stationary(oracle::dense_kernel(process, q));
  CHECK(max_abs_diff(pi, ref) < 1e-12);
  CHECK(stationary_residual(op, pi) < 1e-10);
  // Non-conservative: stationary but not reversible.
  double worst = 0.0;
  for (StateIndex g = 0; g < 64; ++g) {
    for (int d = 0; d < 6; ++d) {
      const StateIndex h = g ^ (StateIndex{1} << d);
      const Dyad dy = dyad_at(d, 3);
      const double f = q[d] * process.probability(Network(3, g), dy) * pi[g];
      const double b = q[d] * process.probability(Network(3, h), dy) * pi[h];
      worst = std::max(worst, std::abs(f - b));
    }
  }
  CHECK(worst > 1e-6);
}

TEST_CASE("N=4 goes through the sparse path and matches Gibbs") {
  const auto u = utilities::random_isolated(4, 41, 1.0);
  const auto process = logit_process(u, 4);
  const auto op = build_transition_operator(process, MeetingProcess::uniform_continuous(4, 2.0));
  CHECK(op.n_states() == 4096);
  const auto pi = stationary_exact(op);
  const auto gt = build_aggregating_function(process);
  CHECK(max_abs_diff(pi, gt.pi()) < 1e-10);
}

TEST_CASE("meeting-process independence and discrete/continuous agreement") {
  oracle::Gen gen(32);
  const auto process = logit_process(utilities::random_isolated(3, gen.seed(), 2.0), 3);
  std::vector<double> a(6);
  std::vector<double> b(6);
  for (int k = 0; k < 6; ++k) {
    a[k] = gen.uniform(0.01, 0.1);
    b[k] = gen.uniform(0.5, 5.0);
  }
  const auto pa = stationary_exact(build_transition_operator(process, MeetingProcess::discrete(a)));
  const auto pb = stationary_exact(build_transition_operator(process, MeetingProcess::continuous(b)));
  CHECK(max_abs_diff(pa, pb) < 1e-10);
}

TEST_CASE("simulation edge cases and determinism") {
  const auto process = logit_process(utilities::outdegree_linear(kLn3), 2);
  const auto m = MeetingProcess::uniform_discrete(2, 0.5);
  const auto t0 = simulate_discrete(process, m, 0, 1);
  CHECK(t0.events.empty());
  CHECK(t0.final_state == 0);
  const auto a = simulate_discrete(process, m, 5000, 42);
  const auto b = simulate_discrete(process, m, 5000, 42);
  std::ostringstream sa;
  std::ostringstream sb;
  write_trajectory_csv(sa, a);
  write_trajectory_csv(sb, b);
  CHECK(sa.str() == sb.str());
  double occ = 0.0;
  for (double x : a.occupation) occ += x;
  CHECK(occ == doctest::Approx(a.elapsed - a.burn_in));

  const auto mc = MeetingProcess::uniform_continuous(2, 2.0);
  const auto c0 = simulate_continuous(process, mc, 0.0, 1);
  CHECK(c0.events.empty());
  const auto c = simulate_continuous(process, mc, 500.0, 9);
  for (std::size_t k = 1; k < c.events.size(); ++k) CHECK(c.events[k].time > c.events[k - 1].time);
  double tocc = 0.0;
  for (double x : c.occupation) tocc += x;
  CHECK(std::abs(tocc - (c.elapsed - c.burn_in)) < 1e-9);
  CHECK_THROWS_AS(simulate_continuous(process, m, 1.0, 1), InvalidArgument);
  CHECK_THROWS_AS(simulate_discrete(process, mc, 1, 1), InvalidArgument);
}

TEST_CASE("discrete simulator converges to uniform for p = 1/2") {
  const auto process = logit_process(utilities::constant(0.0), 2);
  const auto t = simulate_discrete(process, MeetingProcess::uniform_discrete(2, 0.5), 1'000'000, 3);
  const std::vector<double> uniform(4, 0.25);
  CHECK(tv_distance(t.empirical(), uniform) < 0.01);
}

TEST_CASE("continuous simulator: occupation and Poisson event count") {
  const auto process = logit_process(utilities::outdegree_linear(kLn3), 2);
  const double lambda = 2.0;
  const double horizon = 1e5 / lambda;
  SimulationOptions opts;
  opts.burn_in_fraction = 0.0;
  const auto t = simulate_continuous(process, MeetingProcess::uniform_continuous(2, lambda), horizon,
                                     5, opts);
  const std::vector<double> ref{1.0 / 16, 3.0 / 16, 3.0 / 16, 9.0 / 16};
  CHECK(tv_distance(t.empirical(), ref) < 0.02);
  const double mean = lambda * horizon;
  CHECK(std::abs(static_cast<double>(t.n_events) - mean) < 3.0 * std::sqrt(mean));
}

TEST_CASE("TV error shrinks with run length") {
  const auto u = utilities::outdegree_linear(kLn3);
  const auto process = logit_process(u, 3);
  const auto exact = build_aggregating_function(process).pi();
  const auto m = MeetingProcess::uniform_discrete(3, 0.6);
  const auto short_run = simulate_chains(process, m, 2e4, 8, 4, 1);
  const auto long_run = simulate_chains(process, m, 2e6, 8, 4, 1);
  CHECK(tv_distance(long_run, exact) < tv_distance(short_run, exact));
  CHECK(tv_distance(long_run, exact) < 0.02);
  const auto threaded = simulate_chains(process, m, 2e4, 8, 4, 3);
  CHECK(threaded == short_run);
}

TEST_CASE("tv_distance") {
  const std::vector<double> p{0.3, 0.7};
  CHECK(tv_distance(p, p) == 0.0);
  CHECK(tv_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 1.0);
  CHECK(tv_distance(std::vector<double>{.5, .5}, std::vector<double>{.75, .25}) == 0.25);
  CHECK_THROWS_AS(tv_distance(p, std::vector<double>{1.0}), InvalidArgument);
}
