#pragma once

#include <optional>
#include <vector>

#include "relplace/model.hpp"

namespace relplace {

struct OracleLimits {
  std::size_t max_servers = 6;
  std::size_t max_services = 2;
  int max_vnfs = 3;
};

struct OracleResult {
  /// Cheapest placement in which every service meets its failure cap.
  std::optional<PlacementPlan> reliable_plan;
  double reliable_cost = 0.0;
  /// Minimum of cost + sum_k M * max(0, e_k - F_k) over every placement that
  /// fits; absent only when some main cannot be placed at all.
  std::optional<PlacementPlan> penalized_plan;
  double penalized_objective = 0.0;

  bool feasible() const { return reliable_plan.has_value(); }
};

/// Exhaustive branch-and-bound over every main/backup assignment of the
/// requested services against `idle`. Throws std::invalid_argument when the
/// instance exceeds `limits`.
OracleResult brute_force_placement(const std::vector<int>& services, const ServerTable& idle,
                                   const Infrastructure& infra, const ServiceCatalog& catalog,
                                   const OracleLimits& limits = {});

/// cost + sum_k M * max(0, e_k - F_k) of a plan.
double penalized_objective(const PlacementPlan& plan, const Infrastructure& infra,
                           const ServiceCatalog& catalog);

}  // namespace relplace
