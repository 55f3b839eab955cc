#pragma once

#include <vector>

#include "relplace/model.hpp"

namespace relplace {

/// Number of services admitted per service type.
using Action = std::vector<int>;
/// Service type of each admitted service, in placement order.
using Arrangement = std::vector<int>;

struct VrsspInput {
  Action action;
  Arrangement arrangement;
  ServerTable snapshot;  // idle resources handed to the placement
};

/// Trellis state: 0 means "no server" (backup stages only), s + 1 means server s.
using StateId = int;
constexpr StateId kNoServer = 0;

inline StateId state_of_server(ServerId s) { return s + 1; }
inline ServerId server_of_state(StateId x) { return x - 1; }

struct StageInfo {
  int service = 0;       // position in the arrangement
  int service_type = 0;
  int vnf = 0;           // zero-based VNF index inside the chain
  bool backup = false;   // even stages place backups
};

struct TrellisNode {
  StateId id = kNoServer;
  double cost = 0.0;         // accumulated placement cost of the survived path
  double reliability = 1.0;  // running probability that the current service is up
  int predecessor = -1;      // node index in the previous stage
  std::vector<Units> remaining;  // idle resources after the path, flat [server * R + j]
};

/// Decision metric of one trellis edge, split into its terms.
struct TransitionCost {
  double server = 0.0;
  double deployment = 0.0;
  double routing = 0.0;
  double reliability_penalty = 0.0;
  /// Hinge on the previous service's reliability, charged when the edge
  /// starts a new service.
  double boundary_penalty = 0.0;
  double path_cost = 0.0;

  double placement() const { return server + deployment + routing; }
  double theta() const {
    return server + deployment + routing + reliability_penalty + boundary_penalty + path_cost;
  }
};

struct ServiceOutcome {
  int service_type = 0;
  int ordinal = 0;  // zero-based index among admitted services of this type
  double cost = 0.0;
  double failure_prob = 1.0;
  ServerTable usage;  // [server][resource]
  ServicePlacement placement;
};

struct VrsspOutput {
  bool valid = true;
  /// Arrangement position whose main server could not be placed (valid == false).
  int failed_service = -1;
  std::vector<ServiceOutcome> services;  // arrangement order

  PlacementPlan plan() const;
};

/// 2 * sum of chain lengths over the arrangement.
int stage_count(const VrsspInput& input, const ServiceCatalog& catalog);

/// Candidate states of stage m (1-based): all servers on odd stages, the
/// no-server state plus all servers on even stages.
std::vector<StateId> stage_states(int m, const Infrastructure& infra);

/// Viterbi trellis over (VNF, main/backup) stages. Stage 0 holds the single
/// root node; stage m in [1, stage_count()] is filled by run().
class Trellis {
 public:
  Trellis(const Infrastructure& infra, const ServiceCatalog& catalog, VrsspInput input);

  int stage_count() const { return static_cast<int>(stages_info_.size()); }
  const StageInfo& stage_info(int m) const { return stages_info_.at(m - 1); }
  const VrsspInput& input() const { return input_; }

  /// Runs every stage. Returns false (and stops) when a main stage has no
  /// surviving state.
  bool run();
  bool valid() const { return valid_; }
  int failed_service() const { return failed_service_; }

  /// Stages computed so far, including the root stage 0.
  int completed_stages() const { return static_cast<int>(nodes_.size()) - 1; }
  const std::vector<TrellisNode>& stage(int m) const { return nodes_.at(m); }

  /// Reliability after moving from node `pred` of stage m-1 to state x2.
  double transition_reliability(int m, int pred, StateId x2) const;
  TransitionCost transition_cost(int m, int pred, StateId x2) const;
  /// Whether the edge (pred -> x2) is admissible at stage m.
  bool admissible(int m, int pred, StateId x2) const;

  /// State ids of the survived path ending at node `index` of stage m;
  /// element i is the state chosen at stage i + 1.
  std::vector<StateId> path(int m, int index) const;

  /// Index of the best last-stage node (cost plus terminal reliability hinge).
  int best_final_node() const;

  /// Walks the best path and reports per-service cost, failure probability
  /// and usage. Requires valid().
  VrsspOutput outputs() const;

  std::size_t num_resources() const { return num_resources_; }

 private:
  StateId ancestor(int m, int index, int steps) const;
  double state_failure_prob(StateId x) const;
  double link_cost(StateId a, StateId b) const;

  const Infrastructure& infra_;
  const ServiceCatalog& catalog_;
  VrsspInput input_;
  std::size_t num_resources_;
  std::vector<StageInfo> stages_info_;
  std::vector<std::vector<TrellisNode>> nodes_;
  bool valid_ = true;
  int failed_service_ = -1;
};

/// Full placement pass: builds the trellis, runs it and computes outputs.
VrsspOutput run_vrssp(const VrsspInput& input, const ServiceCatalog& catalog,
                      const Infrastructure& infra);

VrsspOutput compute_outputs(const Trellis& trellis);

/// Throws std::invalid_argument unless the arrangement is a permutation of
/// the action's type multiset and the snapshot matches the infrastructure.
void validate_input(const VrsspInput& input, const ServiceCatalog& catalog,
                    const Infrastructure& infra);

}  // namespace relplace
