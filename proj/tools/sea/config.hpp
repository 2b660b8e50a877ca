#pragma once

// Run configuration for the sea command line tool: a YAML document (JSON is
// accepted too) parsed into plain data, validated, and echoed back verbatim.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sea/integrator.hpp"
#include "sea/maxent.hpp"
#include "sea/phase.hpp"

namespace sea::cli {

/// Parse or validation failure, addressed by source position and field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, const std::string& field,
              const std::string& what);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ConstraintSpec {
  std::string name;
  std::vector<double> values;
  bool operator==(const ConstraintSpec&) const = default;
};

struct PotentialSpec {
  std::string kind = "free";  // free | harmonic | table
  double stiffness = 1.0;
  std::string file;           // table only, absolute after parsing
  bool operator==(const PotentialSpec&) const = default;
};

struct DensitySpec {
  std::string kind = "canonical";  // uniform | canonical | gaussian | bimodal
  double temperature = 1.0;
  double q0 = 0.0, p0 = 0.0, q1 = 0.0, p1 = 0.0;
  double sigma_q = 1.0, sigma_p = 1.0;
  double weight = 0.5;
  bool operator==(const DensitySpec&) const = default;
};

struct PhaseSpec {
  double mass = 1.0;
  PotentialSpec potential;
  PhaseGrid grid;
  DensitySpec density;
  std::vector<std::string> observables{"H", "I"};
  bool operator==(const PhaseSpec&) const = default;
};

struct MetricSpec {
  std::string kind = "uniform";  // uniform | diagonal | diagonal_field | dense
  std::vector<double> weights;
  std::string field = "resistive";
  double delta = 1e-9;
  std::vector<std::vector<double>> matrix;
  bool operator==(const MetricSpec&) const = default;
};

struct TauSpec {
  std::string mode = "constant";  // constant | entropy_production | speed
  double value = 1.0;
  bool operator==(const TauSpec&) const = default;
};

struct OutputSpec {
  std::string stem;  // defaults to the config file stem
  bool trajectory = true;
  bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
  double k_b = 1.0;
  std::vector<double> probabilities;
  std::vector<ConstraintSpec> constraints;  // always ends up holding I
  std::optional<PhaseSpec> phase;
  MetricSpec metric;
  TauSpec tau;
  IntegratorConfig integrator;
  MaxEntOptions maxent;
  OutputSpec output;
  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates. `source` names the document in error messages and
/// `base_dir` resolves relative table paths.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>",
                       const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Every field, defaults included; parse_config(to_json(c).dump()) == c.
nlohmann::json to_json(const RunConfig& config);

/// The objects a run needs, built from a validated configuration.
struct Problem {
  SquareRootState state;
  ConstraintSet constraints;
  MetricField metric;
  TauPolicy tau;
  SeaOptions options;
  std::vector<std::array<double, 2>> cell_centers;  // phase problems only
};

Problem build_problem(const RunConfig& config);

}  // namespace sea::cli
