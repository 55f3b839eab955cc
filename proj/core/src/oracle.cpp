#include "relplace/oracle.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace relplace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Search {
  const Infrastructure& infra;
  const ServiceCatalog& catalog;
  std::vector<std::pair<int, int>> steps;  // (service, vnf)
  PlacementPlan plan;
  ServerTable idle;
  std::vector<double> running;  // per service: probability all placed VNFs are up

  double best_reliable = kInf;
  double best_penalized = kInf;
  std::optional<PlacementPlan> reliable_plan;
  std::optional<PlacementPlan> penalized_plan;

  double vnf_cost(ServerId s, const VnfSpec& vnf) const {
    const int inp = infra.inp_of(s);
    double c = infra.deployment_cost(inp, vnf.vnf_type);
    for (std::size_t j = 0; j < vnf.demands.size(); ++j)
      c += static_cast<double>(vnf.demands[j]) * infra.unit_cost(inp, static_cast<int>(j));
    return c;
  }

  bool fits(ServerId s, const ResourceVector& d) const {
    for (std::size_t j = 0; j < d.size(); ++j)
      if (idle[s][j] < d[j]) return false;
    return true;
  }

  void adjust(ServerId s, const ResourceVector& d, int sign) {
    for (std::size_t j = 0; j < d.size(); ++j) idle[s][j] += sign * d[j];
  }

  /// Lower bounds given the services placed so far: failure probabilities
  /// only grow as VNFs are added, so partial hinges are valid bounds.
  void bounds(double& penalty, bool& all_reliable) const {
    penalty = 0.0;
    all_reliable = true;
    for (std::size_t k = 0; k < running.size(); ++k) {
      const auto& type = catalog[plan.services[k].service_type];
      const double e = 1.0 - running[k];
      if (!meets_reliability(e, type.failure_cap)) all_reliable = false;
      penalty += type.penalty * std::max(0.0, e - type.failure_cap);
    }
  }

  void visit(std::size_t step, double cost) {
    double penalty;
    bool reliable;
    bounds(penalty, reliable);
    const bool want_reliable = reliable && cost < best_reliable;
    const bool want_penalized = cost + penalty < best_penalized;
    if (!want_reliable && !want_penalized) return;

    if (step == steps.size()) {
      if (want_reliable) {
        best_reliable = cost;
        reliable_plan = plan;
      }
      if (want_penalized) {
        best_penalized = cost + penalty;
        penalized_plan = plan;
      }
      return;
    }

    const auto [k, u] = steps[step];
    auto& service = plan.services[k];
    const auto& type = catalog[service.service_type];
    const auto& vnf = type.vnfs[u];
    const std::size_t n = infra.num_servers();

    for (std::size_t mi = 0; mi < n; ++mi) {
      const auto m = static_cast<ServerId>(mi);
      if (!fits(m, vnf.demands)) continue;
      adjust(m, vnf.demands, -1);
      // Backup index n stands for "no backup".
      for (std::size_t bi = 0; bi <= n; ++bi) {
        const bool has_backup = bi < n;
        const auto b = static_cast<ServerId>(bi);
        if (has_backup && (b == m || !fits(b, vnf.demands))) continue;
        if (has_backup) adjust(b, vnf.demands, -1);

        service.vnfs[u] = {m, has_backup ? std::optional<ServerId>(b) : std::nullopt};
        double added = vnf_cost(m, vnf) + (has_backup ? vnf_cost(b, vnf) : 0.0);
        if (u > 0) {
          const auto& prev = service.vnfs[u - 1];
          std::vector<ServerId> from{prev.main}, to{m};
          if (prev.backup) from.push_back(*prev.backup);
          if (has_backup) to.push_back(b);
          for (ServerId x : from)
            for (ServerId y : to)
              if (x != y) added += type.bandwidth * infra.link_cost(x, y);
        }
        const double f = infra.failure_prob(m) * (has_backup ? infra.failure_prob(b) : 1.0);
        const double saved = running[k];
        running[k] *= 1.0 - f;
        visit(step + 1, cost + added);
        running[k] = saved;

        if (has_backup) adjust(b, vnf.demands, +1);
      }
      adjust(m, vnf.demands, +1);
    }
  }
};

}  // namespace

OracleResult brute_force_placement(const std::vector<int>& services, const ServerTable& idle,
                                   const Infrastructure& infra, const ServiceCatalog& catalog,
                                   const OracleLimits& limits) {
  if (infra.num_servers() > limits.max_servers)
    throw std::invalid_argument("oracle instance exceeds the server bound");
  if (services.size() > limits.max_services)
    throw std::invalid_argument("oracle instance exceeds the service bound");
  for (int l : services)
    if (catalog.at(l).num_vnfs() > limits.max_vnfs)
      throw std::invalid_argument("oracle instance exceeds the VNF bound");
  if (idle.size() != infra.num_servers())
    throw std::invalid_argument("idle table must have one row per server");

  Search search{infra, catalog, {}, {}, idle, {}, kInf, kInf, {}, {}};
  for (std::size_t k = 0; k < services.size(); ++k) {
    const auto& type = catalog.at(services[k]);
    ServicePlacement p;
    p.service_type = services[k];
    p.vnfs.resize(type.vnfs.size());
    search.plan.services.push_back(std::move(p));
    search.running.push_back(1.0);
    for (int u = 0; u < type.num_vnfs(); ++u) search.steps.emplace_back(static_cast<int>(k), u);
  }
  search.visit(0, 0.0);

  OracleResult out;
  out.reliable_plan = search.reliable_plan;
  out.penalized_plan = search.penalized_plan;
  if (out.reliable_plan) out.reliable_cost = placement_cost(*out.reliable_plan, infra, catalog).total;
  if (out.penalized_plan)
    out.penalized_objective = penalized_objective(*out.penalized_plan, infra, catalog);
  return out;
}

double penalized_objective(const PlacementPlan& plan, const Infrastructure& infra,
                           const ServiceCatalog& catalog) {
  double total = 0.0;
  for (const auto& s : plan.services) {
    const auto& type = catalog.at(s.service_type);
    const double e = service_failure_probability(s.vnfs, infra);
    total += placement_cost(s, infra, catalog).total + type.penalty * std::max(0.0, e - type.failure_cap);
  }
  return total;
}

}  // namespace relplace
