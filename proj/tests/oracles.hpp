#pragma once

// Reference computations used only by tests. Each one takes a different
// route from the library code it checks: plain loops, no sparse algebra,
// no Boost.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "netform/choice.hpp"
#include "netform/network.hpp"
#include "netform/random.hpp"

namespace oracle {

using netform::Network;

/// Seeded generator for property tests.
struct Gen {
  explicit Gen(std::uint64_t seed) : rng(seed, 0xfeed) {}
  double uniform(double a, double b) { return a + (b - a) * rng.uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(rng.next() % (hi - lo + 1)); }
  std::uint64_t seed() { return rng.next(); }
  netform::RandomStream rng;
};

/// Naive Gibbs weights for an isolated logit model: Phi = sum_i V_i(S_i) - V_i(empty).
inline std::vector<double> isolated_gibbs(const netform::UtilityModel& u, int n) {
  const std::uint64_t states = std::uint64_t{1} << (n * (n - 1));
  std::vector<double> w(states);
  double z = 0.0;
  for (std::uint64_t k = 0; k < states; ++k) {
    const Network g(n, k);
    double phi = 0.0;
    for (int i = 0; i < n; ++i) phi += u(i, netform::out_subgraph(g, i)) - u(i, Network(n));
    w[k] = std::exp(phi);
    z += w[k];
  }
  for (double& x : w) x /= z;
  return w;
}

/// Dense column-stochastic kernel built from first principles.
inline std::vector<std::vector<double>> dense_kernel(const netform::SwitchingProcess& p,
                                                     const std::vector<double>& q) {
  const int n = p.n_nodes();
  const int m = n * (n - 1);
  const std::size_t states = std::size_t{1} << m;
  std::vector<std::vector<double>> k(states, std::vector<double>(states, 0.0));
  for (std::size_t g = 0; g < states; ++g) {
    double stay = 1.0;
    for (int d = 0; d < m; ++d) {
      const std::size_t h = g ^ (std::size_t{1} << d);
      const double pr = q[d] * p.probability(Network(n, g), netform::dyad_at(d, n));
      k[h][g] += pr;
      stay -= pr;
    }
    k[g][g] += stay;
  }
  return k;
}

/// Stationary vector by repeated squaring of the kernel (P^(2^rounds)).
inline std::vector<double> power_stationary(std::vector<std::vector<double>> k, int rounds = 60) {
  const std::size_t s = k.size();
  for (int r = 0; r < rounds; ++r) {
    std::vector<std::vector<double>> next(s, std::vector<double>(s, 0.0));
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t l = 0; l < s; ++l) {
        const double a = k[i][l];
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < s; ++j) next[i][j] += a * k[l][j];
      }
    }
    k = std::move(next);
  }
  std::vector<double> pi(s);
  double total = 0.0;
  for (std::size_t i = 0; i < s; ++i) total += (pi[i] = k[i][0]);
  for (double& x : pi) x /= total;
  return pi;
}

/// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol,
                      int depth = 50) {
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps,
          int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid);
        const double rm = 0.5 * (mid + hi);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps) {
          return left + right + (left + right - whole) / 15.0;
        }
        return rec(lo, mid, flo, flm, fmid, left, eps / 2.0, d - 1) +
               rec(mid, hi, fmid, frm, fhi, right, eps / 2.0, d - 1);
      };
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

/// Li2(z) = -int_0^1 log(1 - z s) / s ds.
inline double li2_integral(double z) {
  auto f = [z](double s) { return s == 0.0 ? z : std::log1p(-z * s) / s; };
  return -simpson(f, 0.0, 1.0, 1e-14);
}

}  // namespace oracle
