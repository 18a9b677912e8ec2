// netform: config-driven runner. One subcommand per analysis, CSV out.
//
// Exit codes: 0 ok, 2 validation failure (bad config, non-conservative model
// where a Gibbs table is needed), 1 anything else.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "config.hpp"
#include "netform/applications.hpp"
#include "netform/asymptotics.hpp"
#include "netform/dynamics.hpp"
#include "netform/extensions.hpp"
#include "netform/io.hpp"
#include "netform/parallel.hpp"
#include "netform/potential.hpp"
#include "netform/random.hpp"

namespace fs = std::filesystem;
using namespace netform;
using namespace netform::cli;

namespace {

struct Context {
  std::string command;
  Config cfg;
  std::string config_text;
  std::optional<std::string> env_threads;
  fs::path out_dir;
};

std::string header(const Context& ctx) {
  std::ostringstream h;
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a(ctx.config_text)));
  h << "# netform " << NETFORM_VERSION << "\n";
  h << "# command: " << ctx.command << "\n";
  h << "# config_hash: fnv1a64:" << hash << "\n";
  h << "# seed: " << ctx.cfg.run.seed << "\n";
  h << "# rng: " << kRngAlgorithm << "\n";
  h << "# threads: " << ctx.cfg.run.threads << "\n";
  if (ctx.env_threads) h << "# threads_env: NETFORM_THREADS=" << *ctx.env_threads << "\n";
  h << "# config:\n";
  std::istringstream lines(ctx.config_text);
  for (std::string line; std::getline(lines, line);) h << "#   " << line << "\n";
  return h.str();
}

void write_output(const Context& ctx, const std::string& name, const std::string& body) {
  fs::create_directories(ctx.out_dir);
  const fs::path path = ctx.out_dir / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string());
  f << header(ctx) << body;
  if (!f) throw Error("write failed: " + path.string());
  std::cout << "wrote " << path.string() << "\n";
}

const ModelSettings& need_model(const Context& ctx) {
  if (!ctx.cfg.model) throw ConfigError(ctx.command + ": config has no model section");
  return *ctx.cfg.model;
}

/// Same schema as the Gibbs export: phi = log(pi / pi(empty)).
std::string distribution_csv(int n_nodes, std::span<const double> pi) {
  std::ostringstream o;
  const double lp0 = pi[0] > 0 ? std::log(pi[0]) : std::nan("");
  o << "# n_nodes=" << n_nodes << " log_partition=" << fmt_double(-lp0) << "\n";
  o << "network,phi,pi\n";
  for (StateIndex k = 0; k < pi.size(); ++k) {
    const double phi = pi[k] > 0 ? std::log(pi[k]) - lp0 : -INFINITY;
    o << to_hex(Network(n_nodes, k)) << "," << fmt_double(phi) << "," << fmt_double(pi[k]) << "\n";
  }
  return o.str();
}

std::string dyad_text(Dyad d) { return std::to_string(d.i) + "->" + std::to_string(d.j); }

int run_check(const Context& ctx) {
  const auto& model = need_model(ctx);
  const auto process = model.process();
  CheckOptions opts;
  opts.cap_log2 = ctx.cfg.run.cap_log2;
  opts.seed = ctx.cfg.run.seed;
  opts.threads = ctx.cfg.run.threads;
  if (ctx.cfg.check) {
    opts.list_all = ctx.cfg.check->list_all;
    opts.samples = ctx.cfg.check->samples;
  }
  const auto report = check_conservative(*process, opts);
  std::ostringstream o;
  o << "field,value\n";
  o << "process," << process->description() << "\n";
  o << "verdict," << (report.conservative ? "conservative" : "not_conservative") << "\n";
  o << "checks," << report.checks << "\n";
  o << "sampled," << (report.sampled ? 1 : 0) << "\n";
  if (opts.list_all) o << "violations," << report.violations.size() << "\n";
  if (report.witness) {
    const Witness& w = *report.witness;
    o << "witness_condition," << w.condition << "\n";
    o << "witness_network," << to_hex(w.g) << "\n";
    o << "witness_dyad," << dyad_text(w.d) << "\n";
    o << "witness_dyad2," << dyad_text(w.d2) << "\n";
    o << "witness_lhs," << fmt_double(w.lhs) << "\n";
    o << "witness_rhs," << fmt_double(w.rhs) << "\n";
  }
  write_output(ctx, "check.csv", o.str());
  std::cout << report.describe() << "\n";
  return 0;
}

int run_gibbs(const Context& ctx) {
  const auto& model = need_model(ctx);
  const auto process = model.process();
  CheckOptions opts;
  opts.cap_log2 = ctx.cfg.run.cap_log2;
  opts.seed = ctx.cfg.run.seed;
  opts.threads = ctx.cfg.run.threads;
  const auto gt = build_aggregating_function(*process, opts);
  std::ostringstream o;
  write_gibbs_csv(o, gt);
  write_output(ctx, "gibbs.csv", o.str());
  return 0;
}

int run_stationary(const Context& ctx) {
  const auto& model = need_model(ctx);
  const auto process = model.process();
  const auto op = build_transition_operator(*process, model.meeting, ctx.cfg.run.cap_log2);
  const auto pi = stationary_exact(op);
  std::ostringstream o;
  o << "# residual=" << fmt_double(stationary_residual(op, pi)) << "\n";
  o << distribution_csv(model.n_nodes, pi);
  write_output(ctx, "stationary.csv", o.str());
  return 0;
}

int run_simulate(const Context& ctx) {
  const auto& model = need_model(ctx);
  const auto process = model.process();
  const SimulateSettings sim = ctx.cfg.simulate.value_or(SimulateSettings{});
  const bool discrete = model.meeting.kind() == MeetingProcess::Kind::Discrete;
  const StateIndex n_states = state_count(model.n_nodes, ctx.cfg.run.cap_log2);
  if (sim.initial >= n_states) throw ConfigError("analysis.simulate.initial: not a valid state");

  std::vector<Trajectory> runs(sim.chains);
  parallel_chunks(runs.size(), ctx.cfg.run.threads, [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t c = lo; c < hi; ++c) {
      SimulationOptions opts;
      opts.initial = sim.initial;
      opts.burn_in_fraction = sim.burn_in_fraction;
      opts.record_events = c == 0;
      opts.cap_log2 = ctx.cfg.run.cap_log2;
      runs[c] = discrete ? simulate_discrete(*process, model.meeting,
                                             static_cast<std::uint64_t>(sim.length),
                                             ctx.cfg.run.seed, opts, c)
                         : simulate_continuous(*process, model.meeting, sim.length,
                                               ctx.cfg.run.seed, opts, c);
    }
  });
  std::vector<double> pooled(n_states, 0.0);
  double total = 0.0;
  for (const auto& t : runs) {
    for (StateIndex k = 0; k < n_states; ++k) pooled[k] += t.occupation[k];
  }
  for (double x : pooled) total += x;
  if (total > 0) {
    for (double& x : pooled) x /= total;
  }
  std::ostringstream traj;
  traj << "# chain=0 events=" << runs[0].n_events << " flips=" << runs[0].n_flips << "\n";
  write_trajectory_csv(traj, runs[0]);
  write_output(ctx, "trajectory.csv", traj.str());
  std::ostringstream occ;
  occ << "# chains=" << sim.chains << " kind=" << (discrete ? "discrete" : "continuous") << "\n";
  occ << distribution_csv(model.n_nodes, pooled);
  write_output(ctx, "occupation.csv", occ.str());
  return 0;
}

int run_zeta(const Context& ctx) {
  if (!ctx.cfg.zeta) throw ConfigError("zeta: config has no analysis.zeta section");
  const auto& z = *ctx.cfg.zeta;
  std::ostringstream o;
  o << "quantity,value\n";
  if (z.family == "homophily") {
    const Eigen::MatrixXd a = (z.v0 - z.gamma * z.distance.array()).matrix();
    const auto var = zeta_isolated(LimitModel::linear(z.weights, a));
    const auto dd = homophily_density_and_distance(z.v0, z.gamma, z.distance, z.weights);
    o << "zeta_closed," << fmt_double(zeta_discrete_homophily(z.v0, z.gamma, z.distance, z.weights)) << "\n";
    o << "zeta_variational," << fmt_double(var.zeta) << "\n";
    o << "variational_converged," << (var.converged ? 1 : 0) << "\n";
    o << "mu," << fmt_double(dd.mu) << "\n";
    o << "eta," << fmt_double(dd.eta) << "\n";
  } else {
    const auto dd = circle_density_and_distance(z.v0, z.gamma, z.circumference);
    o << "zeta_closed," << fmt_double(zeta_continuous_uniform_circle(z.v0, z.gamma, z.circumference)) << "\n";
    o << "zeta_quadrature," << fmt_double(zeta_circle_quadrature(z.v0, z.gamma, z.circumference)) << "\n";
    o << "mu," << fmt_double(dd.mu) << "\n";
    o << "eta," << fmt_double(dd.eta) << "\n";
  }
  write_output(ctx, "zeta.csv", o.str());
  return 0;
}

int run_sweep(const Context& ctx) {
  if (!ctx.cfg.sweep) throw ConfigError("sweep: config has no analysis.sweep section");
  const auto& s = *ctx.cfg.sweep;
  const std::size_t cells = static_cast<std::size_t>(s.v0.steps) * s.gamma.steps;
  std::vector<SweepRow> rows(2 * cells);
  parallel_chunks(cells, ctx.cfg.run.threads, [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t c = lo; c < hi; ++c) {
      const double v0 = s.v0.at(static_cast<int>(c / s.gamma.steps));
      const double gamma = s.gamma.at(static_cast<int>(c % s.gamma.steps));
      const auto disc = homophily_density_and_distance(v0, gamma, s.distance, s.weights);
      const auto cont = circle_density_and_distance(v0, gamma, s.circumference);
      rows[2 * c] = {"discrete", v0, gamma, disc.mu, disc.eta,
                     zeta_discrete_homophily(v0, gamma, s.distance, s.weights)};
      rows[2 * c + 1] = {"continuous", v0, gamma, cont.mu, cont.eta,
                         zeta_continuous_uniform_circle(v0, gamma, s.circumference)};
    }
  });
  std::ostringstream o;
  write_sweep_csv(o, rows);
  write_output(ctx, "sweep.csv", o.str());
  return 0;
}

int run_trade(const Context& ctx) {
  if (!ctx.cfg.trade) throw ConfigError("trade: config has no analysis.trade section");
  const auto sol = trade_fixed_point(*ctx.cfg.trade);
  std::ostringstream shares;
  write_trade_csv(shares, *ctx.cfg.trade, sol);
  write_output(ctx, "trade.csv", shares.str());
  std::ostringstream summary;
  write_trade_summary_csv(summary, *ctx.cfg.trade, sol);
  write_output(ctx, "trade_summary.csv", summary.str());
  return 0;
}

int run_mpe(const Context& ctx) {
  const auto& model = need_model(ctx);
  if (model.meeting.kind() != MeetingProcess::Kind::Continuous) {
    throw ConfigError("mpe: model.meeting.kind must be continuous");
  }
  if (!model.shock.is_logit() || model.switching_cost) throw ConfigError("mpe: logit shocks only");
  const MpeSettings ms = ctx.cfg.mpe.value_or(MpeSettings{});
  MpeProblem p;
  p.n_nodes = model.n_nodes;
  p.flow = model.utility;
  p.rho = ms.rho;
  p.rates = model.meeting;
  MpeOptions opts;
  opts.damping = ms.damping;
  opts.max_iters = ms.max_iters;
  opts.tolerance = ms.tolerance;
  opts.cap_log2 = ctx.cfg.run.cap_log2;
  const auto r = mpe_solve(p, opts);
  const auto st = mpe_stationary(p, r.V, ctx.cfg.run.cap_log2);
  std::ostringstream o;
  o << "# converged=" << (r.converged ? 1 : 0) << " iterations=" << r.iterations
    << " residual=" << fmt_double(r.residual) << " box_respected=" << (r.box_respected ? 1 : 0)
    << " conservative=" << (st.gibbs ? 1 : 0) << "\n";
  o << "network";
  for (int i = 0; i < p.n_nodes; ++i) o << ",V_" << i;
  o << ",pi\n";
  for (Eigen::Index k = 0; k < r.V.rows(); ++k) {
    o << to_hex(Network(p.n_nodes, static_cast<StateIndex>(k)));
    for (int i = 0; i < p.n_nodes; ++i) o << "," << fmt_double(r.V(k, i));
    o << "," << fmt_double(st.pi[k]) << "\n";
  }
  write_output(ctx, "mpe.csv", o.str());
  if (!r.converged) std::cerr << "warning: value iteration did not converge\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic best-response network formation: checks, Gibbs tables, dynamics, asymptotics"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string config_path;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> cap;
  std::optional<double> rho;
  std::optional<double> damping;
  std::optional<int> max_iters;
  app.add_option("--config", config_path, "YAML config file")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed (overrides run.seed)");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads, 0 = all (overrides run.threads)");
  app.add_option("--cap", cap, "log2 of the exhaustive state cap (overrides run.cap)");
  app.add_option("--rho", rho, "mpe discount rate");
  app.add_option("--damping", damping, "mpe damping in (0, 1]");
  app.add_option("--max-iters", max_iters, "mpe iteration limit");

  const std::pair<const char*, int (*)(const Context&)> commands[] = {
      {"check", run_check},     {"gibbs", run_gibbs}, {"stationary", run_stationary},
      {"simulate", run_simulate}, {"zeta", run_zeta},   {"sweep", run_sweep},
      {"trade", run_trade},     {"mpe", run_mpe},
  };
  const char* help[] = {
      "conservativeness verdict and witness",  "Gibbs table network,phi,pi",
      "stationary distribution by linear solve", "Monte Carlo trajectory and occupation",
      "asymptotic partition function",          "mu/eta/zeta over a (v0, gamma) grid",
      "trade-route fixed point and shares",     "forward-looking values and stationary law",
  };
  std::vector<CLI::App*> subs;
  for (std::size_t k = 0; k < std::size(commands); ++k) subs.push_back(app.add_subcommand(commands[k].first, help[k]));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Context ctx;
    Overrides ov{seed, threads, cap, rho, damping, max_iters};
    YAML::Node root;
    try {
      root = YAML::LoadFile(config_path);
    } catch (const YAML::Exception& e) {
      throw ConfigError(std::string("cannot parse config: ") + e.what());
    }
    ctx.cfg = load_config(root, ov);
    ctx.config_text = emit_config(ctx.cfg.resolved);
    if (const char* env = std::getenv("NETFORM_THREADS"); env && *env) {
      char* end = nullptr;
      const long t = std::strtol(env, &end, 10);
      if (*end != '\0' || t < 0) throw ConfigError("NETFORM_THREADS must be a nonnegative integer");
      ctx.env_threads = env;
      ctx.cfg.run.threads = static_cast<int>(t);
    }
    ctx.out_dir = out;
    for (std::size_t k = 0; k < subs.size(); ++k) {
      if (subs[k]->parsed()) {
        ctx.command = commands[k].first;
        return commands[k].second(ctx);
      }
    }
    return 1;
  } catch (const NotConservative& e) {
    std::cerr << "error: model is not conservative\n" << e.report().describe() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
