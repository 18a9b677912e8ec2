#pragma once

// Strict YAML experiment configs. Every accessor records the key it read and
// writes the default back when the key was missing, so the node doubles as
// the fully resolved config that gets embedded in each output file.

#include <yaml-cpp/yaml.h>

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "netform/applications.hpp"
#include "netform/choice.hpp"
#include "netform/errors.hpp"
#include "netform/extensions.hpp"

namespace netform::cli {

/// Config problems are validation failures (exit code 2).
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class Section {
 public:
  Section(YAML::Node node, std::string path);

  bool has(const std::string& key) const;
  Section child(const std::string& key);

  double real(const std::string& key);
  double real(const std::string& key, double fallback);
  long long integer(const std::string& key);
  long long integer(const std::string& key, long long fallback);
  bool flag(const std::string& key, bool fallback);
  std::string text(const std::string& key);
  std::string text(const std::string& key, const std::string& fallback);
  std::vector<double> reals(const std::string& key);
  std::vector<int> integers(const std::string& key);
  Eigen::MatrixXd matrix(const std::string& key);

  /// Throws ConfigError on any key that was never read.
  void finish() const;
  const std::string& path() const { return path_; }

 private:
  YAML::Node require(const std::string& key);
  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

struct RunSettings {
  std::uint64_t seed = 1;
  int threads = 1;
  int cap_log2 = kDefaultCapLog2;
};

struct ModelSettings {
  int n_nodes = 2;
  UtilityModel utility = utilities::constant(0.0);
  ShockSpec shock = ShockSpec::logit();
  MeetingProcess meeting = MeetingProcess::uniform_discrete(2, 0.5);
  std::optional<double> switching_cost;

  /// The switching process the model section describes.
  std::unique_ptr<SwitchingProcess> process() const;
};

struct Grid {
  double from = 0.0;
  double to = 0.0;
  int steps = 1;
  double at(int k) const { return steps == 1 ? from : from + (to - from) * k / (steps - 1); }
};

struct CheckSettings {
  bool list_all = false;
  std::uint64_t samples = 1'000'000;
};

struct SimulateSettings {
  double length = 1e5;  // steps or horizon
  int chains = 1;
  double burn_in_fraction = 0.1;
  StateIndex initial = 0;
};

struct ZetaSettings {
  std::string family;  // homophily | circle
  double v0 = 0.0;
  double gamma = 0.0;
  Eigen::MatrixXd distance;
  std::vector<double> weights;
  double circumference = 2.0;
};

struct SweepSettings {
  Grid v0;
  Grid gamma;
  Eigen::MatrixXd distance;
  std::vector<double> weights;
  double circumference = 2.0;
};

struct MpeSettings {
  double rho = 1.0;
  double damping = 0.5;
  int max_iters = 10000;
  double tolerance = 1e-10;
};

struct Config {
  YAML::Node resolved;
  RunSettings run;
  std::optional<ModelSettings> model;
  std::optional<CheckSettings> check;
  std::optional<SimulateSettings> simulate;
  std::optional<ZetaSettings> zeta;
  std::optional<SweepSettings> sweep;
  std::optional<TradeModel> trade;
  std::optional<MpeSettings> mpe;
};

/// Values given on the command line; applied before parsing so they land in
/// the resolved config.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> cap_log2;
  std::optional<double> rho;
  std::optional<double> damping;
  std::optional<int> max_iters;
};

Config load_config(const YAML::Node& root, const Overrides& ov);

/// Deterministic text of the resolved config (block style, sorted as read).
std::string emit_config(const YAML::Node& resolved);

/// FNV-1a 64-bit.
std::uint64_t fnv1a(const std::string& text);

}  // namespace netform::cli
