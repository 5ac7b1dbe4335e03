#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbitinv/dynamics.hpp"
#include "orbitinv/resonance.hpp"

namespace orbitinv::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kConfigVersion = 1;

struct SystemConfig {
  std::string name = "system";
  std::string potential = "0";
  std::string stream = "0";
  ParameterMap params;
};

struct ClassificationConfig {
  unsigned max_den = 10;
  double tol = 1e-4;
  std::size_t samples = 4096;
  double horizon = 400.0;
};

/// An axis names a system parameter or, with a "state." prefix, one of the
/// initial-state components x, y, p, r.
struct ScanAxis {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 1;

  bool is_state() const { return name.rfind("state.", 0) == 0; }
  double value(std::size_t k) const;
};

struct RunConfig {
  SystemConfig system;
  IntegratorConfig integrator;
  SectionSpec section;
  ClassificationConfig classification;
  double orbit_tol = 1e-9;
  double invariant_tol = 1e-6;
  std::size_t resolution = 256;
  std::string output_dir = ".";
  std::optional<PhaseState> initial_state;
  std::optional<double> t_end;
  std::optional<double> seed_period;
  std::optional<double> output_dt;
  std::vector<ScanAxis> scan;

  /// Compiles the system; ParseError and unbound parameters surface as ConfigError.
  SystemSpec make_system(const ParameterMap& overrides = {}) const;
  void validate() const;
};

/// Strict: unknown keys, wrong types and out-of-range values throw ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& cfg);

/// "x,y,p,r"
PhaseState parse_state(const std::string& text);

}  // namespace orbitinv::cli
