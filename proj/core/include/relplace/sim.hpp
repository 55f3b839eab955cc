#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "relplace/baselines.hpp"
#include "relplace/model.hpp"
#include "relplace/policy.hpp"

namespace relplace {

enum class Strategy { Mdp, Vrssp, MinResource, MinReliability, Cera, RedundantVnf };

std::string to_string(Strategy s);
/// Throws std::invalid_argument for unknown names.
Strategy strategy_from_string(const std::string& name);
std::vector<Strategy> all_strategies();

struct ActiveService {
  int service_type = 0;
  ServicePlacement placement;
  ResourceUsage usage;
};

struct SlotState {
  long slot = 0;
  std::vector<ActiveService> active;
  ResourceLedger ledger;
  std::mt19937_64 rng;

  std::vector<int> active_counts(std::size_t num_types) const;
};

SlotState initial_slot_state(const Infrastructure& infra, std::uint64_t seed);

struct SlotMetrics {
  long slot = 0;
  std::vector<int> arrivals;    // per type
  std::vector<int> admissions;  // per type, reliable placements only
  double placement_cost = 0.0;  // of the admitted services
  int backups = 0;
  int vnfs = 0;
  int departures = 0;
};

struct CountPair {
  long arrived = 0;
  long admitted = 0;
};

struct MetricsReport {
  std::string strategy;
  std::uint64_t seed = 0;
  long slots = 0;
  std::vector<SlotMetrics> per_slot;
  std::vector<CountPair> per_type;
  std::map<int, CountPair> per_chain_length;  // keyed by number of VNFs
  long arrived = 0;
  long admitted = 0;
  long admitted_vnfs = 0;
  long backups = 0;
  double total_cost = 0.0;

  double admission_ratio() const;
  double mean_cost() const;  // per admitted service
  double backups_per_vnf() const;
  double mean_chain_length() const;  // over admitted services
};

/// One draw per type from its arrival PMF.
std::vector<int> sample_arrivals(std::mt19937_64& rng, const ServiceCatalog& catalog);

/// Departure flag per active service, each with its type's probability.
std::vector<bool> sample_departures(std::mt19937_64& rng, const std::vector<ActiveService>& active,
                                    const ServiceCatalog& catalog);

struct SimContext {
  const Infrastructure& infra;
  const ServiceCatalog& catalog;
  const Policy* policy = nullptr;  // required for Strategy::Mdp
};

/// Arrivals and placement at the start of the slot, departures at its end.
/// Throws std::logic_error if resource conservation breaks.
SlotMetrics run_slot(SlotState& state, Strategy strategy, const SimContext& ctx);

/// Idle plus in-use equals capacity on every server.
bool conserved(const SlotState& state, const Infrastructure& infra);

MetricsReport run_experiment(const SimContext& ctx, Strategy strategy, long slots,
                             std::uint64_t seed, bool keep_slots = true);

/// Columns: slot, arrivals_<type>..., admissions_<type>..., placement_cost,
/// backups, cumulative_admission_ratio.
void write_metrics_csv(const MetricsReport& report, const ServiceCatalog& catalog,
                       std::ostream& out);

/// Fixed-format number for CSV and table output.
std::string format_number(double x);

}  // namespace relplace
