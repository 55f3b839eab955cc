#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relplace/config.hpp"
#include "relplace/sim.hpp"

namespace relplace {

/// Failure of a CLI command; `code` is a stable machine-readable tag
/// (config, io, usage, fingerprint, nonconvergence, bound, internal).
class CommandError : public std::runtime_error {
 public:
  CommandError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Runs value iteration for the configuration and stamps the fingerprint.
Policy solve_policy(const ExperimentConfig& config);

/// iteration,mean_value,residual
std::string trace_csv(const Policy& policy);

std::string summary_json(const MetricsReport& report, const ServiceCatalog& catalog);

struct CompareRow {
  std::string strategy;
  int runs = 0;
  double admission_ratio_mean = 0.0, admission_ratio_std = 0.0;
  double mean_cost_mean = 0.0, mean_cost_std = 0.0;
  double backups_per_vnf_mean = 0.0, backups_per_vnf_std = 0.0;
  double chain_length_mean = 0.0;
};

/// Runs every (strategy, seed) pair concurrently; rows follow `strategies`.
std::vector<CompareRow> compare(const ExperimentConfig& config,
                                const std::vector<Strategy>& strategies,
                                const std::vector<std::uint64_t>& seeds, long slots,
                                const Policy* policy,
                                std::vector<MetricsReport>* reports = nullptr);

std::string compare_csv(const std::vector<CompareRow>& rows);
/// strategy,num_vnfs,arrived,admitted,admission_ratio summed over seeds.
std::string chain_length_csv(const std::vector<MetricsReport>& reports);

/// Writes <out> (policy JSON) and <out>.trace.csv. Throws CommandError with
/// code "nonconvergence" after writing both if the solver did not converge.
void cmd_solve(const std::string& config_path, const std::string& out_path);

/// Writes <out> (per-slot CSV) and <out>.summary.json.
void cmd_simulate(const std::string& config_path, const std::optional<std::string>& policy_path,
                  const std::string& strategy, std::optional<long> slots,
                  std::optional<std::uint64_t> seed, const std::string& out_path);

/// Writes <out> (one row per strategy) and <out>.by_length.csv. An mdp
/// strategy without --policy solves the configuration first.
void cmd_compare(const std::string& config_path, const std::vector<std::string>& strategies,
                 const std::vector<std::uint64_t>& seeds, std::optional<long> slots,
                 const std::optional<std::string>& policy_path, const std::string& out_path);

/// Returns the oracle verdict as JSON. The instance file holds
/// {"services": [type, ...], "idle": optional [[units]]}.
std::string cmd_oracle(const std::string& config_path, const std::string& instance_path);

}  // namespace relplace
