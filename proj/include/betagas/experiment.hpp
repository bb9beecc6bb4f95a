#pragma once

// JSON-configured experiment runner behind the command line tool.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "betagas/gibbs.hpp"
#include "betagas/lagrange.hpp"
#include "betagas/microscale.hpp"
#include "betagas/spacing.hpp"

namespace betagas {

/// Invalid or unreadable experiment configuration. where() names the key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string where)
      : std::runtime_error(what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"scale-info", "sample", "fekete",
                                              "verify", "spacing-experiment", "beta-sweep"};
  return kinds;
}

struct VerifySettings {
  std::vector<std::string> checks{"replacement", "mass", "bernstein", "morrey"};
  long trials = 1000;
  /// U = D_{u_radius}(center) for the mass identity.
  double u_radius = 0.5;
  std::vector<double> morrey_betas{1.5, 2.0, 4.0};
  int mass_budget = 4000;
};

struct ExperimentConfig {
  std::string kind;
  nlohmann::json potential_spec;
  PotentialModel model = PotentialModel::ginibre();
  std::optional<int> n;
  std::vector<double> betas{2.0};
  bool beta_ladder = false;
  /// Observation point.
  cplx center;
  ChainConfig chain;
  double epsilon = 0.01;
  std::optional<double> c_override;
  std::uint64_t seed = 1;
  int threads = 0;
  std::filesystem::path out_dir = ".";
  bool s0_csv = true;
  VerifySettings verify;
  DescentOptions fekete;
  double fekete_jitter = 1e-3;
  ScaleOptions scale;
  bool independent_eta = false;
  int bootstrap = 1000;

  /// The configuration with every default filled in, as embedded in outputs.
  nlohmann::json resolved() const;
};

/// Validates against the schema and rejects unknown keys. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Potential from {"family": "ginibre" | {"monomial": k} |
/// {"radial_polynomial": [c1, ...]}, "center": [re, im]}.
PotentialModel parse_potential(const nlohmann::json& spec);

struct Overrides {
  std::optional<std::string> kind;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::filesystem::path> out_dir;
};

void apply_overrides(ExperimentConfig& config, const Overrides& overrides);

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_numeric = 2, exit_verification = 3 };

struct ExperimentOutcome {
  nlohmann::json result;
  std::vector<std::filesystem::path> files;
  bool checks_passed = true;
};

/// Runs the experiment and writes its output files. Exceptions propagate.
ExperimentOutcome execute(const ExperimentConfig& config);

/// Loads, runs and reports. Writes the result document to out and a one-line
/// {"error", "where"} diagnostic to err on failure; returns the exit code.
int run_from_file(const std::filesystem::path& config_path, const Overrides& overrides,
                  std::ostream& out, std::ostream& err);

/// Writes via a temporary sibling file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

/// {"header": {"timestamp"}, "version", "config", "result"}
nlohmann::json output_document(const ExperimentConfig& config, const nlohmann::json& result);

std::string version_string();

nlohmann::json to_json(const ScaleInfo& info);
nlohmann::json to_json(const SpacingReport& report);
nlohmann::json to_json(const CheckReport& report);

}  // namespace betagas
