#include "relplace/baselines.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace relplace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool fits(const ResourceLedger& ledger, ServerId s, const ResourceVector& demands) {
  const auto& idle = ledger.server_idle.at(s);
  for (std::size_t j = 0; j < demands.size(); ++j)
    if (idle[j] < demands[j]) return false;
  return true;
}

void take(ResourceLedger& ledger, ServerId s, const ResourceVector& demands) {
  auto& idle = ledger.server_idle.at(s);
  for (std::size_t j = 0; j < demands.size(); ++j) {
    idle[j] -= demands[j];
    if (idle[j] < 0) throw std::logic_error("baseline overdrew a server");
  }
}

void give(ResourceLedger& ledger, ServerId s, const ResourceVector& demands) {
  auto& idle = ledger.server_idle.at(s);
  for (std::size_t j = 0; j < demands.size(); ++j) idle[j] += demands[j];
}

double failure(const ServicePlacement& service, const Infrastructure& infra) {
  return service_failure_probability(service.vnfs, infra);
}

bool reliable(const ServicePlacement& service, const Infrastructure& infra,
              const ServiceCatalog& catalog) {
  return meets_reliability(failure(service, infra), catalog.at(service.service_type).failure_cap);
}

double added_backup_cost(const ServicePlacement& service, int vnf, ServerId backup,
                         const Infrastructure& infra, const ServiceCatalog& catalog) {
  ServicePlacement with = service;
  with.vnfs.at(vnf).backup = backup;
  return placement_cost(with, infra, catalog).total - placement_cost(service, infra, catalog).total;
}

/// Mains of one service; returns nullopt (ledger untouched) if any VNF has no room.
std::optional<ServicePlacement> place_mains(int type_index, ResourceLedger& ledger,
                                            const Infrastructure& infra,
                                            const ServiceCatalog& catalog) {
  const auto& type = catalog.at(type_index);
  ServicePlacement placement;
  placement.service_type = type_index;
  for (int u = 0; u < type.num_vnfs(); ++u) {
    const auto& vnf = type.vnfs[u];
    ServerId best = -1;
    double best_cost = kInf;
    for (std::size_t k = 0; k < infra.num_servers(); ++k) {
      const auto s = static_cast<ServerId>(k);
      if (!fits(ledger, s, vnf.demands)) continue;
      const int inp = infra.inp_of(s);
      double c = infra.deployment_cost(inp, vnf.vnf_type);
      for (std::size_t j = 0; j < vnf.demands.size(); ++j)
        c += static_cast<double>(vnf.demands[j]) * infra.unit_cost(inp, static_cast<int>(j));
      if (u > 0) c += type.bandwidth * infra.link_cost(placement.vnfs.back().main, s);
      if (c < best_cost) {
        best_cost = c;
        best = s;
      }
    }
    if (best < 0) {
      for (int w = 0; w < u; ++w) give(ledger, placement.vnfs[w].main, type.vnfs[w].demands);
      return std::nullopt;
    }
    take(ledger, best, vnf.demands);
    placement.vnfs.push_back({best, std::nullopt});
  }
  return placement;
}

void release(const ServicePlacement& service, ResourceLedger& ledger,
             const ServiceCatalog& catalog) {
  const auto& type = catalog.at(service.service_type);
  for (std::size_t u = 0; u < service.vnfs.size(); ++u) {
    give(ledger, service.vnfs[u].main, type.vnfs[u].demands);
    if (service.vnfs[u].backup) give(ledger, *service.vnfs[u].backup, type.vnfs[u].demands);
  }
}

/// Shared loop of the two "pick a VNF, then pick its server" rules.
template <typename VnfKey>
void ordered_backup(ServicePlacement& service, ResourceLedger& ledger,
                    const Infrastructure& infra, const ServiceCatalog& catalog, VnfKey key) {
  const auto& type = catalog.at(service.service_type);
  const double cap = type.failure_cap;
  std::vector<bool> tried(service.vnfs.size(), false);
  while (!reliable(service, infra, catalog)) {
    int u = -1;
    double best_key = kInf;
    for (std::size_t w = 0; w < service.vnfs.size(); ++w) {
      if (tried[w] || service.vnfs[w].backup) continue;
      const double k = key(static_cast<int>(w));
      if (k < best_key) {
        best_key = k;
        u = static_cast<int>(w);
      }
    }
    if (u < 0) break;
    tried[u] = true;

    const auto& demands = type.vnfs[u].demands;
    ServerId cheapest_reliable = -1, most_reliable = -1;
    double cheapest = kInf, lowest_v = kInf;
    for (std::size_t k = 0; k < infra.num_servers(); ++k) {
      const auto s = static_cast<ServerId>(k);
      if (s == service.vnfs[u].main || !fits(ledger, s, demands)) continue;
      ServicePlacement trial = service;
      trial.vnfs[u].backup = s;
      if (meets_reliability(failure(trial, infra), cap)) {
        const double c = added_backup_cost(service, u, s, infra, catalog);
        if (c < cheapest) {
          cheapest = c;
          cheapest_reliable = s;
        }
      }
      if (infra.failure_prob(s) < lowest_v) {
        lowest_v = infra.failure_prob(s);
        most_reliable = s;
      }
    }
    const ServerId chosen = cheapest_reliable >= 0 ? cheapest_reliable : most_reliable;
    if (chosen < 0) continue;
    take(ledger, chosen, demands);
    service.vnfs[u].backup = chosen;
  }
}

}  // namespace

std::string to_string(BaselineId id) {
  switch (id) {
    case BaselineId::MinResource: return "min_resource";
    case BaselineId::MinReliability: return "min_reliability";
    case BaselineId::Cera: return "cera";
    case BaselineId::RedundantVnf: return "redundant_vnf";
    case BaselineId::VrsspGreedy: return "vrssp";
  }
  return "unknown";
}

BaselineId baseline_from_string(const std::string& name) {
  for (BaselineId id : all_baselines())
    if (to_string(id) == name) return id;
  throw std::invalid_argument("unknown baseline '" + name + "'");
}

std::vector<BaselineId> all_baselines() {
  return {BaselineId::VrsspGreedy, BaselineId::MinResource, BaselineId::MinReliability,
          BaselineId::Cera, BaselineId::RedundantVnf};
}

BaselineOutcome greedy_main_placement(const std::vector<int>& services, ResourceLedger& ledger,
                                      const Infrastructure& infra,
                                      const ServiceCatalog& catalog) {
  BaselineOutcome out;
  for (std::size_t r = 0; r < services.size(); ++r) {
    auto placed = place_mains(services[r], ledger, infra, catalog);
    if (placed) {
      out.plan.services.push_back(std::move(*placed));
      out.origin.push_back(static_cast<int>(r));
    } else {
      out.rejected.push_back(static_cast<int>(r));
    }
  }
  return out;
}

void min_resource_backup(ServicePlacement& service, ResourceLedger& ledger,
                         const Infrastructure& infra, const ServiceCatalog& catalog) {
  const auto& type = catalog.at(service.service_type);
  ordered_backup(service, ledger, infra, catalog,
                 [&](int u) { return static_cast<double>(type.total_demand(u)); });
}

void min_reliability_backup(ServicePlacement& service, ResourceLedger& ledger,
                            const Infrastructure& infra, const ServiceCatalog& catalog) {
  // Highest main failure probability first.
  ordered_backup(service, ledger, infra, catalog,
                 [&](int u) { return -infra.failure_prob(service.vnfs[u].main); });
}

double cost_importance(const ServicePlacement& service, int vnf, ServerId backup,
                       const Infrastructure& infra, const ServiceCatalog& catalog) {
  ServicePlacement with = service;
  with.vnfs.at(vnf).backup = backup;
  const double gain = failure(service, infra) - failure(with, infra);
  const double cost = added_backup_cost(service, vnf, backup, infra, catalog);
  if (cost <= 0.0) return kInf;
  return gain / cost;
}

void cera_backup(ServicePlacement& service, ResourceLedger& ledger, const Infrastructure& infra,
                 const ServiceCatalog& catalog) {
  const auto& type = catalog.at(service.service_type);
  while (!reliable(service, infra, catalog)) {
    int best_u = -1;
    ServerId best_s = -1;
    double best_cim = -kInf;
    const double before = failure(service, infra);
    for (std::size_t w = 0; w < service.vnfs.size(); ++w) {
      if (service.vnfs[w].backup) continue;
      for (std::size_t k = 0; k < infra.num_servers(); ++k) {
        const auto s = static_cast<ServerId>(k);
        if (s == service.vnfs[w].main || !fits(ledger, s, type.vnfs[w].demands)) continue;
        ServicePlacement trial = service;
        trial.vnfs[w].backup = s;
        if (before - failure(trial, infra) <= 0.0) continue;
        const double cim = cost_importance(service, static_cast<int>(w), s, infra, catalog);
        if (cim > best_cim) {
          best_cim = cim;
          best_u = static_cast<int>(w);
          best_s = s;
        }
      }
    }
    if (best_u < 0) break;
    take(ledger, best_s, type.vnfs[best_u].demands);
    service.vnfs[best_u].backup = best_s;
  }
}

BaselineOutcome redundant_vnf_place(const std::vector<int>& services, ResourceLedger& ledger,
                                    const Infrastructure& infra, const ServiceCatalog& catalog) {
  std::vector<int> order(services.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return catalog.at(services[a]).num_vnfs() < catalog.at(services[b]).num_vnfs();
  });

  BaselineOutcome out;
  for (int r : order) {
    auto placed = place_mains(services[r], ledger, infra, catalog);
    if (!placed) {
      out.rejected.push_back(r);
      continue;
    }
    min_reliability_backup(*placed, ledger, infra, catalog);
    if (!reliable(*placed, infra, catalog)) {
      release(*placed, ledger, catalog);
      out.rejected.push_back(r);
      continue;
    }
    out.plan.services.push_back(std::move(*placed));
    out.origin.push_back(r);
  }
  std::sort(out.rejected.begin(), out.rejected.end());
  return out;
}

BaselineOutcome vrssp_place(const std::vector<int>& services, ResourceLedger& ledger,
                            const Infrastructure& infra, const ServiceCatalog& catalog) {
  BaselineOutcome out;
  std::vector<int> pending(services.size());
  std::iota(pending.begin(), pending.end(), 0);

  while (!pending.empty()) {
    VrsspInput input;
    input.action.assign(catalog.size(), 0);
    for (int r : pending) {
      input.arrangement.push_back(services[r]);
      ++input.action.at(services[r]);
    }
    input.snapshot = ledger.server_idle;
    const VrsspOutput result = run_vrssp(input, catalog, infra);
    if (!result.valid) {
      out.rejected.push_back(pending.at(result.failed_service));
      pending.erase(pending.begin() + result.failed_service);
      continue;
    }
    for (std::size_t k = 0; k < result.services.size(); ++k) {
      const auto& placement = result.services[k].placement;
      apply_usage(ledger, resource_usage(placement, infra, catalog));
      out.plan.services.push_back(placement);
      out.origin.push_back(pending[k]);
    }
    break;
  }
  std::sort(out.rejected.begin(), out.rejected.end());
  return out;
}

BaselineOutcome run_baseline(BaselineId id, const std::vector<int>& services,
                             ResourceLedger& ledger, const Infrastructure& infra,
                             const ServiceCatalog& catalog) {
  switch (id) {
    case BaselineId::VrsspGreedy: return vrssp_place(services, ledger, infra, catalog);
    case BaselineId::RedundantVnf: return redundant_vnf_place(services, ledger, infra, catalog);
    default: break;
  }
  BaselineOutcome out = greedy_main_placement(services, ledger, infra, catalog);
  for (auto& service : out.plan.services) {
    if (id == BaselineId::MinResource)
      min_resource_backup(service, ledger, infra, catalog);
    else if (id == BaselineId::MinReliability)
      min_reliability_backup(service, ledger, infra, catalog);
    else
      cera_backup(service, ledger, infra, catalog);
  }
  return out;
}

}  // namespace relplace
