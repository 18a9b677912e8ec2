#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "netform/io.hpp"

namespace netform::cli {

namespace {

// Shortest of %.15g / %.17g that reads back to the same double.
std::string short_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", x);
  if (std::strtod(buf, nullptr) == x) return buf;
  return fmt_double(x);
}

template <class T>
T convert(const YAML::Node& n, const std::string& where) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + ": wrong value type");
  }
}

void allow_only(const YAML::Node& node, const std::set<std::string>& keys, const std::string& path) {
  if (!node.IsMap()) throw ConfigError(path + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!keys.count(key)) throw ConfigError(path + ": unknown key '" + key + "'");
  }
}

}  // namespace

Section::Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
  if (!node_.IsMap()) throw ConfigError(path_ + ": expected a mapping");
}

bool Section::has(const std::string& key) const {
  const YAML::Node& c = node_;
  return static_cast<bool>(c[key]);
}

YAML::Node Section::require(const std::string& key) {
  if (!has(key)) throw ConfigError(path_ + ": missing required key '" + key + "'");
  used_.insert(key);
  return node_[key];
}

Section Section::child(const std::string& key) {
  if (!has(key)) node_[key] = YAML::Node(YAML::NodeType::Map);
  used_.insert(key);
  return Section(node_[key], path_ + "." + key);
}

double Section::real(const std::string& key) {
  const double x = convert<double>(require(key), path_ + "." + key);
  if (!std::isfinite(x)) throw ConfigError(path_ + "." + key + ": not finite");
  return x;
}

double Section::real(const std::string& key, double fallback) {
  if (!has(key)) node_[key] = short_double(fallback);
  return real(key);
}

long long Section::integer(const std::string& key) {
  return convert<long long>(require(key), path_ + "." + key);
}

long long Section::integer(const std::string& key, long long fallback) {
  if (!has(key)) node_[key] = fallback;
  return integer(key);
}

bool Section::flag(const std::string& key, bool fallback) {
  if (!has(key)) node_[key] = fallback;
  return convert<bool>(require(key), path_ + "." + key);
}

std::string Section::text(const std::string& key) {
  return convert<std::string>(require(key), path_ + "." + key);
}

std::string Section::text(const std::string& key, const std::string& fallback) {
  if (!has(key)) node_[key] = fallback;
  return text(key);
}

std::vector<double> Section::reals(const std::string& key) {
  const auto n = require(key);
  if (!n.IsSequence()) throw ConfigError(path_ + "." + key + ": expected a list");
  return convert<std::vector<double>>(n, path_ + "." + key);
}

std::vector<int> Section::integers(const std::string& key) {
  const auto n = require(key);
  if (!n.IsSequence()) throw ConfigError(path_ + "." + key + ": expected a list");
  return convert<std::vector<int>>(n, path_ + "." + key);
}

Eigen::MatrixXd Section::matrix(const std::string& key) {
  const auto n = require(key);
  const std::string where = path_ + "." + key;
  if (!n.IsSequence() || n.size() == 0) throw ConfigError(where + ": expected a list of rows");
  const auto rows = convert<std::vector<std::vector<double>>>(n, where);
  Eigen::MatrixXd m(rows.size(), rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.size()) throw ConfigError(where + ": matrix must be square");
    for (std::size_t c = 0; c < rows.size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

void Section::finish() const {
  for (const auto& kv : node_) {
    const auto key = kv.first.as<std::string>();
    if (!used_.count(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
  }
}

std::unique_ptr<SwitchingProcess> ModelSettings::process() const {
  if (switching_cost) {
    if (!shock.is_logit()) throw ConfigError("model.switching_cost requires logit shocks");
    return std::make_unique<SwitchingCostProcess>(utility, *switching_cost, n_nodes);
  }
  return std::make_unique<DiscreteChoiceProcess>(utility, shock, n_nodes);
}

namespace {

RunSettings parse_run(Section s) {
  RunSettings r;
  const long long seed = s.integer("seed", 1);
  if (seed < 0) throw ConfigError("run.seed: must be nonnegative");
  r.seed = static_cast<std::uint64_t>(seed);
  r.threads = static_cast<int>(s.integer("threads", 1));
  if (r.threads < 0) throw ConfigError("run.threads: must be >= 0");
  r.cap_log2 = static_cast<int>(s.integer("cap", kDefaultCapLog2));
  if (r.cap_log2 < 1 || r.cap_log2 > 56) throw ConfigError("run.cap: out of range");
  s.finish();
  return r;
}

UtilityModel parse_utility(Section s, int n) {
  const std::string family = s.text("family");
  UtilityModel u = utilities::constant(0.0);
  if (family == "constant") {
    u = utilities::constant(s.real("value", 0.0));
  } else if (family == "outdegree_linear") {
    u = utilities::outdegree_linear(s.real("a"));
  } else if (family == "random_isolated" || family == "random_table" || family == "planner_random") {
    const auto seed = static_cast<std::uint64_t>(s.integer("seed"));
    const double scale = s.real("scale", 1.0);
    if (family == "random_isolated") {
      u = utilities::random_isolated(n, seed, scale);
    } else if (family == "random_table") {
      u = utilities::random_table(n, seed, scale);
    } else {
      const auto w = utilities::random_table(n, seed, scale);
      u = utilities::shared([w](const Network& g) { return w(0, g); }, "planner_random");
    }
  } else if (family == "typed_linear" || family == "trade") {
    const auto types = s.integers("types");
    const Eigen::MatrixXd d = s.matrix("distance");
    const double v0 = s.real("v0");
    const double gamma = s.real("gamma");
    if (static_cast<int>(types.size()) != n) throw ConfigError(s.path() + ".types: need one type per node");
    const auto tp = TypeProfile::from_assignment(types, static_cast<int>(d.rows()));
    u = family == "trade" ? utilities::trade(tp, d, v0, gamma, s.real("c"))
                          : utilities::typed_linear(tp, d, v0, gamma);
  } else {
    throw ConfigError(s.path() + ".family: unknown utility family '" + family + "'");
  }
  s.finish();
  return u;
}

ShockSpec parse_shock(Section s) {
  const std::string family = s.text("family", "logit");
  ShockSpec f = ShockSpec::logit();
  if (family == "probit") {
    f = ShockSpec::probit(s.real("scale", 3.0));
  } else if (family == "cauchy") {
    const double scale = s.real("scale", 1.0);
    if (!(scale > 0)) throw ConfigError(s.path() + ".scale: must be positive");
    f = ShockSpec::custom("cauchy", [scale](double x) {
      return 0.5 + std::atan(x / scale) / std::numbers::pi;
    });
  } else if (family != "logit") {
    throw ConfigError(s.path() + ".family: unknown shock family '" + family + "'");
  }
  s.finish();
  return f;
}

MeetingProcess parse_meeting(Section s, int n) {
  const std::string kind = s.text("kind", "discrete");
  if (kind != "discrete" && kind != "continuous") throw ConfigError(s.path() + ".kind: discrete or continuous");
  const bool discrete = kind == "discrete";
  std::optional<MeetingProcess> m;
  if (s.has("weights")) {
    auto w = s.reals("weights");
    if (static_cast<int>(w.size()) != dyad_count(n)) throw ConfigError(s.path() + ".weights: need N(N-1) entries");
    m = discrete ? MeetingProcess::discrete(std::move(w)) : MeetingProcess::continuous(std::move(w));
  } else {
    const double total = s.real("total", discrete ? 0.5 : 1.0);
    m = discrete ? MeetingProcess::uniform_discrete(n, total) : MeetingProcess::uniform_continuous(n, total);
  }
  s.finish();
  return *m;
}

ModelSettings parse_model(Section s) {
  ModelSettings m;
  m.n_nodes = static_cast<int>(s.integer("n_nodes"));
  if (m.n_nodes < 2 || m.n_nodes > kMaxNodes) throw ConfigError("model.n_nodes: out of range");
  m.utility = parse_utility(s.child("utility"), m.n_nodes);
  m.shock = parse_shock(s.child("shock"));
  m.meeting = parse_meeting(s.child("meeting"), m.n_nodes);
  if (s.has("switching_cost")) m.switching_cost = s.real("switching_cost");
  s.finish();
  return m;
}

Grid parse_grid(Section s) {
  Grid g;
  g.from = s.real("from");
  g.to = s.real("to");
  g.steps = static_cast<int>(s.integer("steps"));
  if (g.steps < 1) throw ConfigError(s.path() + ".steps: must be >= 1");
  s.finish();
  return g;
}

std::vector<double> parse_weights(Section& s, int c) {
  auto w = s.reals("weights");
  if (static_cast<int>(w.size()) != c) throw ConfigError(s.path() + ".weights: one per type");
  return w;
}

}  // namespace

Config load_config(const YAML::Node& root_in, const Overrides& ov) {
  Config cfg;
  YAML::Node root = YAML::Clone(root_in);
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  allow_only(root, {"model", "analysis", "run"}, "config");
  if (!root["run"]) root["run"] = YAML::Node(YAML::NodeType::Map);
  if (ov.seed) root["run"]["seed"] = *ov.seed;
  if (ov.threads) root["run"]["threads"] = *ov.threads;
  if (ov.cap_log2) root["run"]["cap"] = *ov.cap_log2;
  if (ov.rho || ov.damping || ov.max_iters) {
    if (!root["analysis"]) root["analysis"] = YAML::Node(YAML::NodeType::Map);
    if (!root["analysis"]["mpe"]) root["analysis"]["mpe"] = YAML::Node(YAML::NodeType::Map);
    auto mpe = root["analysis"]["mpe"];
    if (ov.rho) mpe["rho"] = short_double(*ov.rho);
    if (ov.damping) mpe["damping"] = short_double(*ov.damping);
    if (ov.max_iters) mpe["max_iters"] = *ov.max_iters;
  }

  cfg.run = parse_run(Section(root["run"], "run"));
  if (root["model"]) cfg.model = parse_model(Section(root["model"], "model"));

  if (root["analysis"]) {
    Section a(root["analysis"], "analysis");
    if (a.has("check")) {
      Section s = a.child("check");
      CheckSettings c;
      c.list_all = s.flag("list_all", false);
      c.samples = static_cast<std::uint64_t>(s.integer("samples", 1'000'000));
      s.finish();
      cfg.check = c;
    }
    if (a.has("simulate")) {
      Section s = a.child("simulate");
      SimulateSettings c;
      c.length = s.real("length");
      if (!(c.length >= 0)) throw ConfigError("analysis.simulate.length: must be >= 0");
      c.chains = static_cast<int>(s.integer("chains", 1));
      if (c.chains < 1) throw ConfigError("analysis.simulate.chains: must be >= 1");
      c.burn_in_fraction = s.real("burn_in", 0.1);
      c.initial = static_cast<StateIndex>(s.integer("initial", 0));
      s.finish();
      cfg.simulate = c;
    }
    if (a.has("zeta")) {
      Section s = a.child("zeta");
      ZetaSettings z;
      z.family = s.text("family");
      z.v0 = s.real("v0");
      z.gamma = s.real("gamma");
      if (z.family == "homophily") {
        z.distance = s.matrix("distance");
        z.weights = parse_weights(s, static_cast<int>(z.distance.rows()));
      } else if (z.family == "circle") {
        z.circumference = s.real("circumference", 2.0);
      } else {
        throw ConfigError("analysis.zeta.family: homophily or circle");
      }
      s.finish();
      cfg.zeta = z;
    }
    if (a.has("sweep")) {
      Section s = a.child("sweep");
      SweepSettings w;
      w.v0 = parse_grid(s.child("v0"));
      w.gamma = parse_grid(s.child("gamma"));
      w.distance = s.matrix("distance");
      w.weights = parse_weights(s, static_cast<int>(w.distance.rows()));
      w.circumference = s.real("circumference", 2.0);
      s.finish();
      cfg.sweep = w;
    }
    if (a.has("trade")) {
      Section s = a.child("trade");
      TradeModel tm;
      tm.v0 = s.real("v0");
      tm.gamma = s.real("gamma");
      tm.c = s.real("c");
      tm.distance = s.matrix("distance");
      tm.weights = parse_weights(s, static_cast<int>(tm.distance.rows()));
      s.finish();
      tm.validate();
      cfg.trade = tm;
    }
    if (a.has("mpe")) {
      Section s = a.child("mpe");
      MpeSettings m;
      m.rho = s.real("rho", 1.0);
      m.damping = s.real("damping", 0.5);
      m.max_iters = static_cast<int>(s.integer("max_iters", 10000));
      m.tolerance = s.real("tolerance", 1e-10);
      if (!(m.rho > 0)) throw ConfigError("analysis.mpe.rho: must be positive");
      if (!(m.damping > 0 && m.damping <= 1)) throw ConfigError("analysis.mpe.damping: must be in (0, 1]");
      if (m.max_iters < 1) throw ConfigError("analysis.mpe.max_iters: must be >= 1");
      s.finish();
      cfg.mpe = m;
    }
    a.finish();
  }
  cfg.resolved = root;
  return cfg;
}

std::string emit_config(const YAML::Node& resolved) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  for (const char* key : {"model", "analysis", "run"}) {
    if (resolved[key]) out << YAML::Key << key << YAML::Value << resolved[key];
  }
  out << YAML::EndMap;
  return out.c_str();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace netform::cli
