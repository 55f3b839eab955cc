#pragma once

#include <string>
#include <vector>

#include "relplace/model.hpp"
#include "relplace/trellis.hpp"

namespace relplace {

enum class BaselineId { MinResource, MinReliability, Cera, RedundantVnf, VrsspGreedy };

std::string to_string(BaselineId id);
/// Accepts the names produced by to_string; throws std::invalid_argument otherwise.
BaselineId baseline_from_string(const std::string& name);
std::vector<BaselineId> all_baselines();

/// Result of a static placement over a list of requested service types.
///
/// Every placed service holds resources in the ledger, reliable or not; the
/// caller decides what to admit.
struct BaselineOutcome {
  PlacementPlan plan;
  std::vector<int> origin;    // request index of each placed service
  std::vector<int> rejected;  // request indices that got no placement
};

/// Min-incremental-cost main server per VNF, in request order. A service
/// whose VNFs cannot all be placed is rolled back and rejected.
BaselineOutcome greedy_main_placement(const std::vector<int>& services, ResourceLedger& ledger,
                                      const Infrastructure& infra,
                                      const ServiceCatalog& catalog);

/// Backup rules applied to one service with mains assigned. Each call adds
/// backups until the service is reliable or no backup-less VNF can take one,
/// and charges the ledger for them.
void min_resource_backup(ServicePlacement& service, ResourceLedger& ledger,
                         const Infrastructure& infra, const ServiceCatalog& catalog);
void min_reliability_backup(ServicePlacement& service, ResourceLedger& ledger,
                            const Infrastructure& infra, const ServiceCatalog& catalog);
void cera_backup(ServicePlacement& service, ResourceLedger& ledger, const Infrastructure& infra,
                 const ServiceCatalog& catalog);

/// Cost importance of adding `backup` to VNF `vnf`: failure reduction per
/// unit of added cost; +inf when the added cost is not positive.
double cost_importance(const ServicePlacement& service, int vnf, ServerId backup,
                       const Infrastructure& infra, const ServiceCatalog& catalog);

/// Services in ascending chain length; each gets mains and then backups on
/// its least reliable VNF, and is rolled back if it stays unreliable.
BaselineOutcome redundant_vnf_place(const std::vector<int>& services, ResourceLedger& ledger,
                                    const Infrastructure& infra, const ServiceCatalog& catalog);

/// The trellis on all requests in the given order. When a service's main
/// cannot be placed it is dropped and the rest are placed again.
BaselineOutcome vrssp_place(const std::vector<int>& services, ResourceLedger& ledger,
                            const Infrastructure& infra, const ServiceCatalog& catalog);

/// Dispatch by id. MinResource, MinReliability and CERA place every main
/// first and then backups service by service.
BaselineOutcome run_baseline(BaselineId id, const std::vector<int>& services,
                             ResourceLedger& ledger, const Infrastructure& infra,
                             const ServiceCatalog& catalog);

}  // namespace relplace
