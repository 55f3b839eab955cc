#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "relplace/mdp.hpp"
#include "relplace/model.hpp"
#include "relplace/policy.hpp"

namespace relplace {

/// Raised for unreadable, malformed or semantically invalid configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MdpConfig {
  double gamma = 0.9;
  double epsilon = 0.0;  // <= 0: derived from the largest admission reward
  int num_arrangements = 10;
  double alpha_init = 1.0;
  double discount = 0.5;
  DepartureMode departure_mode = DepartureMode::Binomial;
  int max_iterations = 500;
  std::size_t state_cap = StateSpace::kDefaultCap;
};

struct SimConfig {
  long slots = 1000;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  Infrastructure infra;
  ServiceCatalog catalog;  // sigma_max lives on each service type
  MdpConfig mdp;
  SimConfig sim;
  std::string output_dir;  // optional; empty means "next to --out"
};

/// Parses and validates a JSON document. Throws ConfigError naming the
/// offending field, the JSON position, or the violated invariant.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& config);

/// 16 hex digits of FNV-1a over the canonical infrastructure + catalog.
std::string fingerprint(const ExperimentConfig& config);

SolverOptions solver_options(const ExperimentConfig& config);

std::string serialize_policy(const Policy& policy);
/// Throws ConfigError on a malformed or unsupported artifact.
Policy parse_policy(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace relplace
