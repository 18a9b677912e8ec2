#include <cmath>

#include "doctest.h"
#include "netform/errors.hpp"
#include "netform/extensions.hpp"
#include "oracles.hpp"

using namespace netform;

TEST_CASE("chi basics") {
  CHECK(switching_cost_chi(1.3, 0.0) == doctest::Approx(1.3).epsilon(1e-15));
  for (double x = -5; x <= 5; x += 0.25) {
    for (double s : {0.1, 0.5, 2.0}) CHECK(std::abs(switching_cost_chi(-x, s) + switching_cost_chi(x, s)) < 1e-14);
  }
  const double s = 0.01;
  CHECK(std::abs(switching_cost_chi(2.0, s) - (2.0 + s * std::tanh(1.0))) < 1e-4 * s);
}

TEST_CASE("chi is the log-odds of the switching-cost probabilities") {
  oracle::Gen gen(71);
  const auto u = utilities::random_isolated(3, gen.seed(), 2.0);
  for (double s : {0.0, 0.3, 1.7}) {
    const SwitchingCostProcess process(u, s, 3);
    for (const Network& g : enumerate_networks(3)) {
      for (Dyad d : all_dyads(3)) {
        const double dv = u(d.i, g.switched(d)) - u(d.i, g);
        const double p = process.probability(g, d);
        const double back = process.probability(g.switched(d), d);
        REQUIRE(std::abs(std::log(p / back) - switching_cost_chi(dv, s)) < 1e-12);
        if (s == 0.0) REQUIRE(p == switching_probability(u, ShockSpec::logit(), g, d));
      }
    }
  }
  CHECK(switching_cost_probability(utilities::constant(0.0), Network(2), {0, 1}, 1.0) ==
        doctest::Approx(0.2689414213699951));
  CHECK_THROWS_AS(SwitchingCostProcess(u, -0.1, 3), InvalidArgument);
}

TEST_CASE("switching cost: constant utilities stay conservative") {
  const SwitchingCostProcess process(utilities::constant(1.0), 0.5, 3);
  CHECK(check_conservative(process).conservative);
  // A linear out-degree utility is still conservative: chi depends on dV only.
  const SwitchingCostProcess lin(utilities::outdegree_linear(0.8), 0.5, 3);
  CHECK(check_conservative(lin).conservative);
}

TEST_CASE("epsilon phi values") {
  const EpsilonDeviationProcess half(0.5, [](Dyad, const Network&) { return true; }, 3);
  for (const Network& g : enumerate_networks(3)) {
    for (Dyad d : all_dyads(3)) CHECK(epsilon_phi(half, g, d) == 0.0);
  }
  const EpsilonDeviationProcess q(0.25, [](Dyad, const Network&) { return true; }, 2);
  const Network full(2, 3);
  CHECK(q.matches(full, {0, 1}));
  CHECK(std::abs(epsilon_phi(q, full, {0, 1}) - std::log(1.0 / 3.0)) < 1e-15);
  CHECK(log_odds_ratio(0.75) == doctest::Approx(-log_odds_ratio(0.25)).epsilon(1e-15));
  CHECK_THROWS_AS(EpsilonDeviationProcess(1.0, [](Dyad, const Network&) { return true; }, 2),
                  InvalidArgument);
}

TEST_CASE("epsilon-deviation Gibbs tables") {
  auto always = [](Dyad, const Network&) { return true; };
  const EpsilonDeviationProcess m(0.25, always, 3);
  const auto res = epsilon_aggregating(m);
  REQUIRE(std::holds_alternative<GibbsTable>(res));
  const auto& gt = std::get<GibbsTable>(res);
  for (StateIndex k = 0; k < 64; ++k) {
    CHECK(std::abs(gt.phi(k) - std::log(3.0) * Network(3, k).size()) < 1e-12);
  }
  CHECK(std::abs(gt.pi(63) / gt.pi(0) - std::pow(3.0, 6)) < 1e-10 * std::pow(3.0, 6));

  const auto flip = std::get<GibbsTable>(epsilon_aggregating(EpsilonDeviationProcess(0.75, always, 3)));
  for (StateIndex k = 0; k < 64; ++k) CHECK(std::abs(flip.phi(k) + gt.phi(k)) < 1e-12);

  const auto half = std::get<GibbsTable>(epsilon_aggregating(EpsilonDeviationProcess(0.5, always, 3)));
  for (double p : half.pi()) CHECK(std::abs(p - 1.0 / 64) < 1e-14);
}

TEST_CASE("epsilon-deviation: per-dyad strategy is conservative, reactive strategy is not") {
  // Desire each dyad according to a fixed pattern: order-independent.
  const EpsilonDeviationProcess fixed(0.2, [](Dyad d, const Network&) { return (d.i + d.j) % 2 == 1; }, 3);
  const auto res = epsilon_aggregating(fixed);
  REQUIRE(std::holds_alternative<GibbsTable>(res));
  const auto& gt = std::get<GibbsTable>(res);
  CHECK(detailed_balance_residual(gt, fixed, MeetingProcess::uniform_discrete(3, 0.3)) < 1e-12);
  oracle::Gen gen(72);
  for (StateIndex k = 0; k < 64; ++k) {
    const Network g(3, k);
    for (int t = 0; t < 50; ++t) {
      std::vector<int> path;
      for (const Dyad& d : g.links()) path.push_back(dyad_index(d, 3));
      for (int a = static_cast<int>(path.size()) - 1; a > 0; --a) std::swap(path[a], path[gen.integer(0, a)]);
      REQUIRE(std::abs(phi_along_path(fixed, Network(3), path) - gt.phi(k)) < 1e-12);
    }
  }
  // Reciprocate: want ij iff ji is present.
  const EpsilonDeviationProcess reactive(0.2, [](Dyad d, const Network& g) { return g.has({d.j, d.i}); }, 3);
  // Each reciprocal pair contributes -L then +L whichever link comes first.
  CHECK(std::holds_alternative<GibbsTable>(epsilon_aggregating(reactive)));
  // 01 wanted iff 12 present, 12 wanted iff 01 absent: the order of additions matters.
  const EpsilonDeviationProcess greedy(
      0.2,
      [](Dyad d, const Network& g) {
        if (d == Dyad{0, 1}) return g.has({1, 2});
        if (d == Dyad{1, 2}) return !g.has({0, 1});
        return true;
      },
      3);
  const auto gr = epsilon_aggregating(greedy);
  REQUIRE(std::holds_alternative<ConservativenessReport>(gr));
  CHECK(std::get<ConservativenessReport>(gr).witness.has_value());
}

TEST_CASE("central planner") {
  auto size = [](const Network& g) { return double(g.size()); };
  const auto gt = central_planner_table(size, ShockSpec::logit(), 2);
  const double e = std::exp(1.0);
  const double z = 1 + 2 * e + e * e;
  CHECK(std::abs(gt.pi(0) - 1 / z) < 1e-15);
  CHECK(std::abs(gt.pi(3) - e * e / z) < 1e-15);
  const auto flat = central_planner_table([](const Network&) { return 2.0; }, ShockSpec::logit(), 3);
  for (double p : flat.pi()) CHECK(std::abs(p - 1.0 / 64) < 1e-15);

  const auto w = utilities::random_table(3, 73, 2.0);
  auto welfare = [w](const Network& g) { return w(0, g); };
  const auto direct = central_planner_table(welfare, ShockSpec::logit(), 3);
  const DiscreteChoiceProcess shared(utilities::shared(welfare), ShockSpec::logit(), 3);
  const auto route = build_aggregating_function(shared);
  for (StateIndex k = 0; k < 64; ++k) CHECK(std::abs(direct.phi(k) - route.phi(k)) < 1e-12);
  CHECK(detailed_balance_residual(direct, shared, MeetingProcess::uniform_discrete(3, 0.3)) < 1e-12);
  // Away from logit only a dyad-separable W stays conservative.
  CHECK_THROWS_AS(central_planner_table(welfare, ShockSpec::probit(3.0), 3), NotConservative);
  auto links = [](const Network& g) { return 0.7 * g.size(); };
  const auto probit = central_planner_table(links, ShockSpec::probit(3.0), 3);
  const double h = ShockSpec::probit(3.0).log_odds(0.7);
  for (StateIndex k = 0; k < 64; ++k) CHECK(std::abs(probit.phi(k) - h * Network(3, k).size()) < 1e-12);
}

TEST_CASE("MPE: constant flows are a fixed point") {
  MpeProblem p;
  p.n_nodes = 2;
  p.flow = utilities::constant(1.5);
  p.rho = 0.7;
  const auto r = mpe_solve(p);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK((r.V.array() - 1.5).abs().maxCoeff() < 1e-14);
  const auto st = mpe_stationary(p, r.V);
  for (double x : st.pi) CHECK(std::abs(x - 0.25) < 1e-14);
  CHECK(st.gibbs.has_value());
}

TEST_CASE("MPE operator against the dense resolvent") {
  const auto flow = utilities::random_table(2, 74, 1.0);
  MpeProblem p;
  p.n_nodes = 2;
  p.flow = flow;
  p.rho = 0.9;
  p.rates = MeetingProcess::continuous({0.7, 1.3});
  const Eigen::MatrixXd v = tabulate_flow(p);
  const Eigen::MatrixXd tv = mpe_operator(p, v);
  // Dense Q from first principles, then rho (rho I - Q)^{-1} column averages.
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(4, 4);
  for (int g = 0; g < 4; ++g) {
    for (int d = 0; d < 2; ++d) {
      const int h = g ^ (1 << d);
      const Dyad dy = dyad_at(d, 2);
      const double rate = p.rates.weights()[d] * logistic(v(h, dy.i) - v(g, dy.i));
      q(h, g) += rate;
      q(g, g) -= rate;
    }
  }
  const Eigen::MatrixXd res = p.rho * (p.rho * Eigen::MatrixXd::Identity(4, 4) - q).inverse();
  for (int g = 0; g < 4; ++g) {
    for (int i = 0; i < 2; ++i) {
      double expect = 0.0;
      for (int h = 0; h < 4; ++h) expect += res(h, g) * v(h, i);
      CHECK(std::abs(tv(g, i) - expect) < 1e-12);
    }
  }
}

TEST_CASE("MPE iterates stay in the value box and converge") {
  oracle::Gen gen(75);
  for (int t = 0; t < 5; ++t) {
    MpeProblem p;
    p.n_nodes = 3;
    p.flow = utilities::random_table(3, gen.seed(), 1.0);
    p.rho = gen.uniform(0.2, 3.0);
    p.rates = MeetingProcess::uniform_continuous(3, 1.0);
    const auto r = mpe_solve(p);
    CHECK(r.box_respected);
    CHECK(r.converged);
    CHECK(r.residual < 1e-10);
  }
}

TEST_CASE("MPE limits at N=2") {
  const auto flow = utilities::random_table(2, 76, 1.0);
  MpeProblem p;
  p.n_nodes = 2;
  p.flow = flow;
  p.rates = MeetingProcess::uniform_continuous(2, 1.0);
  const Eigen::MatrixXd v = tabulate_flow(p);

  p.rho = 1e3;
  const auto fast = mpe_solve(p);
  REQUIRE(fast.converged);
  for (int i = 0; i < 2; ++i) {
    const double bound = 2.0 / p.rho * p.rates.total() * v.col(i).cwiseAbs().sum();
    CHECK((fast.V.col(i) - v.col(i)).cwiseAbs().maxCoeff() <= bound);
  }
  const auto myopic = stationary_exact(build_transition_operator(
      DiscreteChoiceProcess(flow, ShockSpec::logit(), 2), p.rates));
  p.rho = 1e6;
  const auto far = mpe_solve(p);
  const auto st = mpe_stationary(p, far.V);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(st.pi[k] - myopic[k]) < 1e-6);

  p.rho = 1e-6;
  const auto slow = mpe_solve(p);
  REQUIRE(slow.converged);
  for (int i = 0; i < 2; ++i) {
    const double avg = v.col(i).mean();
    CHECK((slow.V.col(i).array() - avg).abs().maxCoeff() < 1e-3);
  }
  const auto st0 = mpe_stationary(p, slow.V);
  for (double x : st0.pi) CHECK(std::abs(x - 0.25) < 1e-3);
}
