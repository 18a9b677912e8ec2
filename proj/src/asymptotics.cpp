#include "netform/asymptotics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <ostream>

#include "netform/choice.hpp"
#include "netform/errors.hpp"
#include "netform/io.hpp"

namespace netform {

double bernoulli_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("entropy argument outside [0,1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

void LimitModel::validate() const {
  if (weights.empty()) throw InvalidArgument("limit model needs at least one type");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw InvalidArgument("type weights must be strictly positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("type weights must sum to 1");
  if (!utility) throw InvalidArgument("limit model needs a utility");
}

LimitModel LimitModel::linear(std::vector<double> w, Eigen::MatrixXd a) {
  const auto c = static_cast<Eigen::Index>(w.size());
  if (a.rows() != c || a.cols() != c) throw InvalidArgument("coefficient matrix must be C x C");
  LimitModel lm;
  lm.weights = std::move(w);
  lm.utility = [a](int r, std::span<const double> y) {
    double v = 0.0;
    for (std::size_t s = 0; s < y.size(); ++s) v += a(r, static_cast<Eigen::Index>(s)) * y[s];
    return v;
  };
  lm.gradient = [a](int r, std::span<const double>, std::span<double> g) {
    for (std::size_t s = 0; s < g.size(); ++s) g[s] = a(r, static_cast<Eigen::Index>(s));
  };
  lm.validate();
  return lm;
}

LimitModel LimitModel::trade(std::vector<double> w, const Eigen::MatrixXd& distance, double v0,
                             double gamma, double c) {
  Eigen::MatrixXd a = (v0 - gamma * distance.array()).matrix();
  LimitModel lm = linear(std::move(w), a);
  lm.utility = [a, c](int r, std::span<const double> y) {
    double v = 0.0;
    double sum = 0.0;
    for (std::size_t s = 0; s < y.size(); ++s) {
      v += a(r, static_cast<Eigen::Index>(s)) * y[s];
      sum += y[s];
    }
    return v - c * sum * sum;
  };
  lm.gradient = [a, c](int r, std::span<const double> y, std::span<double> g) {
    double sum = 0.0;
    for (double v : y) sum += v;
    for (std::size_t s = 0; s < g.size(); ++s) g[s] = a(r, static_cast<Eigen::Index>(s)) - 2.0 * c * sum;
  };
  return lm;
}

namespace {

double logit(double x) { return std::log(x) - std::log1p(-x); }

void utility_gradient(const LimitModel& lm, int r, std::span<const double> y, std::span<double> g) {
  if (lm.gradient) {
    lm.gradient(r, y, g);
    return;
  }
  std::vector<double> yp(y.begin(), y.end());
  const double h = 1e-6;
  for (std::size_t s = 0; s < y.size(); ++s) {
    yp[s] = y[s] + h;
    const double up = lm.utility(r, yp);
    yp[s] = y[s] - h;
    const double down = lm.utility(r, yp);
    yp[s] = y[s];
    g[s] = (up - down) / (2.0 * h);
  }
}

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

struct InnerResult {
  std::vector<double> x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
};

// BFGS on z = logit(x), which keeps iterates inside the open cube where
// the maximizer must lie (H'(x) is unbounded at 0 and 1).
InnerResult maximize_from(const LimitModel& lm, int r, std::vector<double> x0, const ZetaOptions& opts) {
  const int c = lm.n_types();
  using Vec = Eigen::VectorXd;
  auto sigma = [](const Vec& z) {
    Vec x(z.size());
    for (Eigen::Index k = 0; k < z.size(); ++k) x(k) = logistic(z(k));
    return x;
  };
  // Returns -f and its z-gradient (minimization form).
  auto eval = [&](const Vec& z, Vec& gz) {
    const Vec x = sigma(z);
    std::vector<double> gx(c);
    const double f = zeta_objective(lm, r, std::span<const double>(x.data(), c), gx);
    gz.resize(c);
    for (int s = 0; s < c; ++s) gz(s) = -gx[s] * x(s) * (1.0 - x(s));
    return -f;
  };
  Vec z(c);
  for (int s = 0; s < c; ++s) z(s) = logit(x0[s]);
  Vec g;
  double f = eval(z, g);
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(c, c) * 4.0;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (g.norm() < 1e-13) break;
    Vec p = -hinv * g;
    if (p.dot(g) >= 0.0) {
      hinv = Eigen::MatrixXd::Identity(c, c) * 4.0;
      p = -hinv * g;
    }
    double step = 1.0;
    Vec zn;
    Vec gn;
    double fn = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      zn = z + step * p;
      fn = eval(zn, gn);
      if (std::isfinite(fn) && gn.allFinite() && fn <= f + 1e-4 * step * p.dot(g)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Vec s = zn - z;
    const Vec y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(c, c);
      hinv = (eye - rho * s * y.transpose()) * hinv * (eye - rho * y * s.transpose()) +
             rho * s * s.transpose();
    }
    z = zn;
    g = gn;
    f = fn;
  }

  // Newton polish in x coordinates.
  std::vector<double> x(c);
  for (int s = 0; s < c; ++s) x[s] = logistic(z(s));
  std::vector<double> gx(c);
  double value = zeta_objective(lm, r, x, gx);
  double gnorm = norm(gx);
  const std::vector<double>& w = lm.weights;
  for (int polish = 0; polish < 30 && gnorm >= 1e-14; ++polish) {
    std::vector<double> y(c);
    for (int s = 0; s < c; ++s) y[s] = w[s] * x[s];
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(c, c);
    const double h = 1e-6;
    std::vector<double> gp(c);
    std::vector<double> gm(c);
    for (int t = 0; t < c; ++t) {
      std::vector<double> yp = y;
      std::vector<double> ym = y;
      yp[t] += h;
      ym[t] -= h;
      utility_gradient(lm, r, yp, gp);
      utility_gradient(lm, r, ym, gm);
      for (int s = 0; s < c; ++s) hess(s, t) = w[s] * w[t] * (gp[s] - gm[s]) / (2.0 * h);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    for (int s = 0; s < c; ++s) hess(s, s) -= w[s] / (x[s] * (1.0 - x[s]));
    Vec grad = Eigen::Map<Vec>(gx.data(), c);
    Vec delta = hess.fullPivLu().solve(-grad);
    double step = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 40; ++ls) {
      std::vector<double> xn(c);
      bool inside = true;
      for (int s = 0; s < c; ++s) {
        xn[s] = x[s] + step * delta(s);
        inside = inside && xn[s] > 0.0 && xn[s] < 1.0;
      }
      if (inside) {
        std::vector<double> gn(c);
        const double vn = zeta_objective(lm, r, xn, gn);
        const double nn = norm(gn);
        if (nn < gnorm) {
          x = xn;
          gx = gn;
          value = vn;
          gnorm = nn;
          improved = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return {x, value, gnorm, it};
}

}  // namespace

double zeta_objective(const LimitModel& lm, int r, std::span<const double> x, std::span<double> grad) {
  const int c = lm.n_types();
  if (static_cast<int>(x.size()) != c) throw InvalidArgument("point has the wrong dimension");
  std::vector<double> y(c);
  std::vector<double> zero(c, 0.0);
  double value = 0.0;
  for (int s = 0; s < c; ++s) {
    y[s] = lm.weights[s] * x[s];
    value += lm.weights[s] * bernoulli_entropy(x[s]);
  }
  value += lm.utility(r, y) - lm.utility(r, zero);
  if (!grad.empty()) {
    std::vector<double> gv(c);
    utility_gradient(lm, r, y, gv);
    for (int s = 0; s < c; ++s) grad[s] = lm.weights[s] * (gv[s] - logit(x[s]));
  }
  return value;
}

ZetaResult zeta_isolated(const LimitModel& lm, const ZetaOptions& opts) {
  lm.validate();
  const int c = lm.n_types();
  std::vector<std::vector<double>> starts{std::vector<double>(c, 0.5)};
  const int corners = c < 3 ? (1 << c) : 7;
  for (int k = 0; k < corners; ++k) {
    std::vector<double> x(c);
    for (int s = 0; s < c; ++s) x[s] = (s < 30 && ((k >> s) & 1)) ? 0.75 : 0.25;
    starts.push_back(std::move(x));
  }
  ZetaResult result;
  result.converged = true;
  for (int r = 0; r < c; ++r) {
    InnerResult best;
    bool first = true;
    for (const auto& x0 : starts) {
      InnerResult cand = maximize_from(lm, r, x0, opts);
      result.iterations += cand.iterations;
      if (first || cand.value > best.value) best = std::move(cand);
      first = false;
    }
    result.zeta += lm.weights[r] * best.value;
    result.gradient_norm = std::max(result.gradient_norm, best.gradient_norm);
    result.maximizers.push_back(std::move(best.x));
  }
  result.converged = result.gradient_norm < opts.gradient_tolerance;
  return result;
}

namespace {

void check_homophily(const Eigen::MatrixXd& distance, std::span<const double> w) {
  const auto c = static_cast<Eigen::Index>(w.size());
  if (c == 0 || distance.rows() != c || distance.cols() != c) {
    throw InvalidArgument("distance matrix must be C x C with C = number of weights");
  }
}

}  // namespace

double zeta_discrete_homophily(double v0, double gamma, const Eigen::MatrixXd& distance,
                               std::span<const double> w) {
  check_homophily(distance, w);
  double z = 0.0;
  for (std::size_t r = 0; r < w.size(); ++r) {
    for (std::size_t s = 0; s < w.size(); ++s) {
      z += w[r] * w[s] * softplus(v0 - gamma * distance(r, s));
    }
  }
  return z;
}

namespace {

double dilog_series(double z) {
  double term = z;
  double sum = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double add = term / (static_cast<double>(k) * k);
    sum += add;
    if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
    term *= z;
  }
  return sum;
}

}  // namespace

double dilog(double z) {
  if (z > 0.0) throw InvalidArgument("dilog is implemented for z <= 0 only");
  if (z == 0.0) return 0.0;
  if (z >= -0.5) return dilog_series(z);
  if (z >= -1.0) {
    // Landen: maps [-1, -0.5) onto (1/3, 1/2].
    const double l = std::log1p(-z);
    return -dilog_series(z / (z - 1.0)) - 0.5 * l * l;
  }
  const double l = std::log(-z);
  return -dilog(1.0 / z) - std::numbers::pi * std::numbers::pi / 6.0 - 0.5 * l * l;
}

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;

template <class F>
double integrate_checked(F&& f, double a, double b, const QuadratureOptions& opts, double& err) {
  double e = 0.0;
  const double v = Kronrod::integrate(f, a, b, opts.max_depth, 1e-13, &e);
  if (!std::isfinite(v)) throw SolverFailure("quadrature produced a non-finite value");
  err += e;
  return v;
}

}  // namespace

double zeta_continuous(double v0, double gamma, const std::function<double(double)>& density,
                       const std::function<double(double, double)>& distance, double lo, double hi,
                       const QuadratureOptions& opts) {
  if (!(hi > lo)) throw InvalidArgument("type interval must have positive length");
  double inner_err = 0.0;
  auto inner = [&](double t) {
    std::vector<double> cuts{lo};
    if (opts.inner_breakpoints) {
      for (double b : opts.inner_breakpoints(t)) {
        if (b > lo && b < hi) cuts.push_back(b);
      }
    }
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      if (cuts[k + 1] <= cuts[k]) continue;
      double e = 0.0;
      acc += integrate_checked(
          [&](double u) { return density(u) * softplus(v0 - gamma * distance(t, u)); }, cuts[k],
          cuts[k + 1], opts, e);
      inner_err = std::max(inner_err, e);
    }
    return density(t) * acc;
  };
  double outer_err = 0.0;
  const double value = integrate_checked(inner, lo, hi, opts, outer_err);
  const double total_err = outer_err + inner_err * (hi - lo);
  if (!(total_err <= opts.abs_tolerance)) {
    throw SolverFailure("quadrature error estimate " + fmt_double(total_err) +
                        " above tolerance");
  }
  return value;
}

double zeta_continuous_uniform_circle(double v0, double gamma, double circumference) {
  if (!(circumference > 0.0)) throw InvalidArgument("circumference must be positive");
  if (gamma == 0.0) return softplus(v0);
  const double l = circumference;
  return 2.0 / (l * gamma) * (dilog(-std::exp(v0 - gamma * l / 2.0)) - dilog(-std::exp(v0)));
}

double zeta_circle_quadrature(double v0, double gamma, double circumference, double abs_tolerance) {
  if (!(circumference > 0.0)) throw InvalidArgument("circumference must be positive");
  const double l = circumference;
  QuadratureOptions opts;
  opts.abs_tolerance = abs_tolerance;
  opts.inner_breakpoints = [l](double t) { return std::vector<double>{t, t - l / 2.0, t + l / 2.0}; };
  auto arc = [l](double a, double b) {
    const double d = std::abs(a - b);
    return std::min(d, l - d);
  };
  return zeta_continuous(v0, gamma, [l](double) { return 1.0 / l; }, arc, 0.0, l, opts);
}

DensityDistance density_and_distance(const std::function<double(double, double)>& zeta_fn,
                                     double v0, double gamma, double step) {
  auto central = [&](double h, bool wrt_v0) {
    if (wrt_v0) return (zeta_fn(v0 + h, gamma) - zeta_fn(v0 - h, gamma)) / (2.0 * h);
    return (zeta_fn(v0, gamma + h) - zeta_fn(v0, gamma - h)) / (2.0 * h);
  };
  auto richardson = [&](bool wrt_v0) {
    return (4.0 * central(step / 2.0, wrt_v0) - central(step, wrt_v0)) / 3.0;
  };
  DensityDistance out;
  out.mu = richardson(true);
  if (!(out.mu >= 1e-12)) throw InvalidArgument("link density below 1e-12; distance undefined");
  out.eta = -richardson(false) / out.mu;
  return out;
}

DensityDistance homophily_density_and_distance(double v0, double gamma,
                                               const Eigen::MatrixXd& distance,
                                               std::span<const double> w) {
  check_homophily(distance, w);
  double mu = 0.0;
  double weighted = 0.0;
  for (std::size_t r = 0; r < w.size(); ++r) {
    for (std::size_t s = 0; s < w.size(); ++s) {
      const double p = w[r] * w[s] * logistic(v0 - gamma * distance(r, s));
      mu += p;
      weighted += p * distance(r, s);
    }
  }
  if (!(mu >= 1e-12)) throw InvalidArgument("link density below 1e-12; distance undefined");
  return {mu, weighted / mu};
}

DensityDistance circle_density_and_distance(double v0, double gamma, double circumference) {
  if (!(circumference > 0.0)) throw InvalidArgument("circumference must be positive");
  const double l = circumference;
  DensityDistance out;
  double dzeta_dgamma = 0.0;
  if (gamma == 0.0) {
    out.mu = logistic(v0);
    dzeta_dgamma = -l / 4.0 * out.mu;
  } else {
    const double far = softplus(v0 - gamma * l / 2.0);
    out.mu = 2.0 / (l * gamma) * (softplus(v0) - far);
    dzeta_dgamma = (far - zeta_continuous_uniform_circle(v0, gamma, l)) / gamma;
  }
  if (!(out.mu >= 1e-12)) throw InvalidArgument("link density below 1e-12; distance undefined");
  out.eta = -dzeta_dgamma / out.mu;
  return out;
}

namespace {

template <class Term>
double typed_sum(std::span<const int> sizes, const Eigen::MatrixXd& distance, Term&& term) {
  const auto c = static_cast<Eigen::Index>(sizes.size());
  if (c == 0 || distance.rows() != c || distance.cols() != c) {
    throw InvalidArgument("distance matrix must be C x C with C = number of groups");
  }
  double acc = 0.0;
  for (Eigen::Index r = 0; r < c; ++r) {
    for (Eigen::Index s = 0; s < c; ++s) {
      const double pairs = static_cast<double>(sizes[r]) * (sizes[s] - (r == s ? 1 : 0));
      if (pairs > 0.0) acc += pairs * term(distance(r, s));
    }
  }
  return acc;
}

}  // namespace

double typed_linear_log_partition(std::span<const int> sizes, const Eigen::MatrixXd& distance,
                                  double v0, double gamma) {
  return typed_sum(sizes, distance, [&](double d) { return softplus(v0 - gamma * d); });
}

double typed_linear_link_fraction(std::span<const int> sizes, const Eigen::MatrixXd& distance,
                                  double v0, double gamma) {
  double n = 0.0;
  for (int s : sizes) n += s;
  const double links = typed_sum(sizes, distance, [&](double d) { return logistic(v0 - gamma * d); });
  return links / (n * (n - 1.0));
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "model,v0,gamma,mu,eta,zeta\n";
  for (const SweepRow& r : rows) {
    out << r.model << "," << fmt_double(r.v0) << "," << fmt_double(r.gamma) << ","
        << fmt_double(r.mu) << "," << fmt_double(r.eta) << "," << fmt_double(r.zeta) << "\n";
  }
}

}  // namespace netform
