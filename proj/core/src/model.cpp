#include "relplace/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace relplace {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_server(const Infrastructure& infra, ServerId s) {
  if (s < 0 || static_cast<std::size_t>(s) >= infra.num_servers())
    throw std::out_of_range("server id " + std::to_string(s) + " out of range");
}

}  // namespace

Infrastructure::Infrastructure(std::vector<InpSpec> inps, std::vector<double> alpha,
                               double beta, double v_base, Matrix<double> link_cost,
                               Matrix<Units> link_bandwidth, Matrix<double> deployment_cost)
    : inps_(std::move(inps)),
      alpha_(std::move(alpha)),
      beta_(beta),
      v_base_(v_base),
      link_cost_(std::move(link_cost)),
      link_bandwidth_(std::move(link_bandwidth)),
      deployment_cost_(std::move(deployment_cost)) {
  require(!inps_.empty(), "infrastructure needs at least one InP");
  require(!alpha_.empty(), "alpha must list one weight per resource type");
  require(beta_ > 0.0, "beta must be positive");
  require(v_base_ > 0.0 && v_base_ < 1.0, "v_base must lie in (0,1)");
  for (double a : alpha_) require(a >= 0.0 && a <= 1.0, "alpha weights must lie in [0,1]");

  for (std::size_t i = 0; i < inps_.size(); ++i) {
    const auto& inp = inps_[i];
    const std::string where = "inp " + std::to_string(i) + ": ";
    require(inp.failure_prob >= 0.0 && inp.failure_prob < 1.0,
            where + "failure_prob must lie in [0,1)");
    require(inp.failure_prob <= v_base_ + kProbabilityTolerance,
            where + "failure_prob exceeds v_base");
    require(!inp.servers.empty(), where + "no servers");
    for (std::size_t s = 0; s < inp.servers.size(); ++s) {
      require(inp.servers[s].size() == alpha_.size(),
              where + "server capacity length differs from number of resources");
      for (Units c : inp.servers[s]) require(c >= 0, where + "negative capacity");
      server_inp_.push_back(static_cast<int>(i));
      server_local_.push_back(static_cast<int>(s));
    }
  }

  const std::size_t n = server_inp_.size();
  require(link_cost_.size() == n, "link_cost must be |S| x |S|");
  require(link_bandwidth_.size() == n, "link_bandwidth must be |S| x |S|");
  for (std::size_t a = 0; a < n; ++a) {
    require(link_cost_[a].size() == n, "link_cost must be |S| x |S|");
    require(link_bandwidth_[a].size() == n, "link_bandwidth must be |S| x |S|");
    require(link_cost_[a][a] == 0.0, "link cost of a server to itself must be 0");
    require(link_bandwidth_[a][a] == 0, "link bandwidth of a server to itself must be 0");
    for (std::size_t b = 0; b < n; ++b) {
      require(link_cost_[a][b] >= 0.0, "negative link cost");
      require(link_bandwidth_[a][b] >= 0, "negative link bandwidth");
      require(link_cost_[a][b] == link_cost_[b][a], "link_cost must be symmetric");
      require(link_bandwidth_[a][b] == link_bandwidth_[b][a], "link_bandwidth must be symmetric");
    }
  }

  require(deployment_cost_.size() == inps_.size(), "deployment_cost needs one row per InP");
  for (const auto& row : deployment_cost_) {
    require(!row.empty() && row.size() == deployment_cost_.front().size(),
            "deployment_cost rows must share one length (number of VNF types)");
    for (double c : row) require(c >= 0.0, "negative deployment cost");
  }

  unit_cost_.assign(inps_.size(), std::vector<double>(alpha_.size()));
  for (std::size_t i = 0; i < inps_.size(); ++i)
    for (std::size_t j = 0; j < alpha_.size(); ++j)
      unit_cost_[i][j] = alpha_[j] * std::exp(beta_ * (v_base_ - inps_[i].failure_prob));
}

std::size_t Infrastructure::num_vnf_types() const { return deployment_cost_.front().size(); }

ServerId Infrastructure::server_id(int inp, int local) const {
  ServerId base = 0;
  for (int i = 0; i < inp; ++i) base += static_cast<ServerId>(inps_.at(i).servers.size());
  if (local < 0 || static_cast<std::size_t>(local) >= inps_.at(inp).servers.size())
    throw std::out_of_range("server index out of range");
  return base + local;
}

const ResourceVector& Infrastructure::capacity(ServerId s) const {
  return inps_.at(inp_of(s)).servers.at(local_index(s));
}

ServerTable Infrastructure::capacities() const {
  ServerTable out;
  out.reserve(num_servers());
  for (const auto& inp : inps_)
    for (const auto& cap : inp.servers) out.push_back(cap);
  return out;
}

Units ServiceType::total_demand(int vnf) const {
  const auto& d = vnfs.at(vnf).demands;
  return std::accumulate(d.begin(), d.end(), Units{0});
}

void validate_catalog(const ServiceCatalog& catalog, const Infrastructure& infra) {
  require(!catalog.empty(), "catalog needs at least one service type");
  for (std::size_t l = 0; l < catalog.size(); ++l) {
    const auto& t = catalog[l];
    const std::string where = "service type " + std::to_string(l) + ": ";
    require(t.failure_cap > 0.0 && t.failure_cap < 1.0, where + "failure_cap must lie in (0,1)");
    require(t.departure_prob > 0.0 && t.departure_prob <= 1.0,
            where + "departure_prob must lie in (0,1]");
    require(t.bandwidth >= 0.0, where + "negative bandwidth");
    require(!t.vnfs.empty(), where + "SFC needs at least one VNF");
    for (const auto& v : t.vnfs) {
      require(v.vnf_type >= 0 && static_cast<std::size_t>(v.vnf_type) < infra.num_vnf_types(),
              where + "vnf_type out of range");
      require(v.demands.size() == infra.num_resources(),
              where + "demand vector length differs from number of resources");
      for (Units d : v.demands) require(d >= 0, where + "negative demand");
    }
    require(!t.arrival_pmf.empty(), where + "arrival_pmf is empty");
    double sum = 0.0;
    for (double p : t.arrival_pmf) {
      require(p >= 0.0, where + "arrival_pmf has a negative entry");
      sum += p;
    }
    require(std::abs(sum - 1.0) <= 1e-12, where + "arrival_pmf must sum to 1");
    require(t.penalty > 0.0, where + "penalty must be positive");
    require(t.sigma_max >= 0, where + "sigma_max must be non-negative");
  }
}

CostBreakdown& CostBreakdown::operator+=(const CostBreakdown& other) {
  server += other.server;
  forwarding += other.forwarding;
  deployment += other.deployment;
  total += other.total;
  return *this;
}

ResourceLedger ResourceLedger::full(const Infrastructure& infra) {
  return ResourceLedger{infra.capacities(), infra.link_bandwidth_table()};
}

ResourceUsage ResourceUsage::zero(const Infrastructure& infra) {
  const std::size_t n = infra.num_servers();
  return ResourceUsage{ServerTable(n, ResourceVector(infra.num_resources(), 0)),
                       Matrix<Units>(n, std::vector<Units>(n, 0))};
}

ResourceUsage& ResourceUsage::operator+=(const ResourceUsage& other) {
  for (std::size_t s = 0; s < server.size(); ++s)
    for (std::size_t j = 0; j < server[s].size(); ++j) server[s][j] += other.server[s][j];
  for (std::size_t a = 0; a < link.size(); ++a)
    for (std::size_t b = 0; b < link[a].size(); ++b) link[a][b] += other.link[a][b];
  return *this;
}

double server_unit_cost(const Infrastructure& infra, int inp, int resource) {
  if (inp < 0 || static_cast<std::size_t>(inp) >= infra.num_inps())
    throw std::out_of_range("inp index out of range");
  if (resource < 0 || static_cast<std::size_t>(resource) >= infra.num_resources())
    throw std::out_of_range("resource index out of range");
  return infra.alpha()[resource] *
         std::exp(infra.beta() * (infra.v_base() - infra.inp_failure_prob(inp)));
}

std::vector<std::pair<ServerId, ServerId>> forwarding_links(const ServicePlacement& service) {
  std::vector<std::pair<ServerId, ServerId>> links;
  for (std::size_t u = 0; u + 1 < service.vnfs.size(); ++u) {
    const auto& from = service.vnfs[u];
    const auto& to = service.vnfs[u + 1];
    std::vector<ServerId> a{from.main}, b{to.main};
    if (from.backup) a.push_back(*from.backup);
    if (to.backup) b.push_back(*to.backup);
    for (ServerId x : a)
      for (ServerId y : b)
        if (x != y) links.emplace_back(x, y);
  }
  return links;
}

CostBreakdown placement_cost(const ServicePlacement& service, const Infrastructure& infra,
                             const ServiceCatalog& catalog) {
  const auto& type = catalog.at(service.service_type);
  if (service.vnfs.size() != type.vnfs.size())
    throw std::invalid_argument("placement VNF count differs from the service type's SFC");
  CostBreakdown cost;
  for (std::size_t u = 0; u < service.vnfs.size(); ++u) {
    const auto& vnf = type.vnfs[u];
    auto charge = [&](ServerId s) {
      check_server(infra, s);
      const int inp = infra.inp_of(s);
      for (std::size_t j = 0; j < vnf.demands.size(); ++j)
        cost.server += static_cast<double>(vnf.demands[j]) * infra.unit_cost(inp, static_cast<int>(j));
      cost.deployment += infra.deployment_cost(inp, vnf.vnf_type);
    };
    charge(service.vnfs[u].main);
    if (service.vnfs[u].backup) charge(*service.vnfs[u].backup);
  }
  for (auto [a, b] : forwarding_links(service)) cost.forwarding += type.bandwidth * infra.link_cost(a, b);
  cost.total = cost.server + cost.forwarding + cost.deployment;
  return cost;
}

CostBreakdown placement_cost(const PlacementPlan& plan, const Infrastructure& infra,
                             const ServiceCatalog& catalog) {
  CostBreakdown cost;
  for (const auto& s : plan.services) cost += placement_cost(s, infra, catalog);
  return cost;
}

double service_failure_probability(std::span<const VnfAssignment> vnfs,
                                   const Infrastructure& infra) {
  double running = 1.0;
  for (const auto& a : vnfs) {
    double vnf_failure = infra.failure_prob(a.main);
    if (a.backup) vnf_failure *= infra.failure_prob(*a.backup);
    running *= 1.0 - vnf_failure;
  }
  return 1.0 - running;
}

bool meets_reliability(double failure_prob, double failure_cap) {
  return failure_cap - failure_prob >= 0.0;
}

ResourceUsage resource_usage(const ServicePlacement& service, const Infrastructure& infra,
                             const ServiceCatalog& catalog) {
  ResourceUsage usage = ResourceUsage::zero(infra);
  const auto& type = catalog.at(service.service_type);
  for (std::size_t u = 0; u < service.vnfs.size(); ++u) {
    const auto& demands = type.vnfs.at(u).demands;
    auto take = [&](ServerId s) {
      check_server(infra, s);
      for (std::size_t j = 0; j < demands.size(); ++j) usage.server[s][j] += demands[j];
    };
    take(service.vnfs[u].main);
    if (service.vnfs[u].backup) take(*service.vnfs[u].backup);
  }
  const auto bw = static_cast<Units>(std::llround(type.bandwidth));
  for (auto [a, b] : forwarding_links(service)) {
    usage.link[a][b] += bw;
    usage.link[b][a] += bw;
  }
  return usage;
}

ResourceUsage resource_usage(const PlacementPlan& plan, const Infrastructure& infra,
                             const ServiceCatalog& catalog) {
  ResourceUsage usage = ResourceUsage::zero(infra);
  for (const auto& s : plan.services) usage += resource_usage(s, infra, catalog);
  return usage;
}

std::string to_string(Constraint c) {
  switch (c) {
    case Constraint::Placement: return "H_p";
    case Constraint::Resource: return "H_g";
    case Constraint::Bandwidth: return "H_b";
    case Constraint::Forwarding: return "H_f";
    case Constraint::Reliability: return "H_r";
  }
  return "?";
}

std::vector<Violation> validate_plan(const PlacementPlan& plan, const ResourceLedger& ledger,
                                     const Infrastructure& infra, const ServiceCatalog& catalog) {
  std::vector<Violation> out;
  const auto n = static_cast<ServerId>(infra.num_servers());
  auto valid_server = [&](ServerId s) { return s >= 0 && s < n; };

  PlacementPlan structurally_ok;
  for (std::size_t k = 0; k < plan.services.size(); ++k) {
    const auto& svc = plan.services[k];
    const int sk = static_cast<int>(k);
    if (svc.service_type < 0 || static_cast<std::size_t>(svc.service_type) >= catalog.size()) {
      out.push_back({Constraint::Placement, sk, -1, -1, -1, "unknown service type"});
      continue;
    }
    const auto& type = catalog[svc.service_type];
    bool ok = true;
    if (svc.vnfs.size() != type.vnfs.size()) {
      out.push_back({Constraint::Forwarding, sk, -1, -1, -1,
                     "chain has " + std::to_string(svc.vnfs.size()) + " VNFs, type requires " +
                         std::to_string(type.vnfs.size())});
      ok = false;
    }
    for (std::size_t u = 0; u < svc.vnfs.size(); ++u) {
      const auto& a = svc.vnfs[u];
      const int su = static_cast<int>(u);
      if (!valid_server(a.main) || (a.backup && !valid_server(*a.backup))) {
        out.push_back({Constraint::Placement, sk, su, a.main, a.backup.value_or(-1),
                       "dangling server reference"});
        ok = false;
        continue;
      }
      if (a.backup && *a.backup == a.main) {
        out.push_back({Constraint::Placement, sk, su, a.main, a.main,
                       "main and backup on the same server"});
        ok = false;
      }
    }
    if (!ok) continue;
    structurally_ok.services.push_back(svc);
    const double e = service_failure_probability(svc.vnfs, infra);
    if (!meets_reliability(e, type.failure_cap)) {
      std::ostringstream msg;
      msg << "failure probability " << e << " exceeds cap " << type.failure_cap;
      out.push_back({Constraint::Reliability, sk, -1, -1, -1, msg.str()});
    }
  }

  const ResourceUsage usage = resource_usage(structurally_ok, infra, catalog);
  for (ServerId s = 0; s < n; ++s) {
    for (std::size_t j = 0; j < infra.num_resources(); ++j) {
      if (usage.server[s][j] > ledger.server_idle.at(s).at(j)) {
        out.push_back({Constraint::Resource, -1, -1, s, -1,
                       "resource " + std::to_string(j) + " demand " +
                           std::to_string(usage.server[s][j]) + " exceeds idle " +
                           std::to_string(ledger.server_idle[s][j])});
      }
    }
  }
  for (ServerId a = 0; a < n; ++a) {
    for (ServerId b = a + 1; b < n; ++b) {
      if (usage.link[a][b] > ledger.link_idle.at(a).at(b)) {
        out.push_back({Constraint::Bandwidth, -1, -1, a, b,
                       "bandwidth demand " + std::to_string(usage.link[a][b]) + " exceeds idle " +
                           std::to_string(ledger.link_idle[a][b])});
      }
    }
  }
  return out;
}

void apply_usage(ResourceLedger& ledger, const ResourceUsage& usage) {
  for (std::size_t s = 0; s < usage.server.size(); ++s)
    for (std::size_t j = 0; j < usage.server[s].size(); ++j)
      if (ledger.server_idle[s][j] < usage.server[s][j])
        throw std::logic_error("server resource would go negative on server " + std::to_string(s));
  for (std::size_t s = 0; s < usage.server.size(); ++s)
    for (std::size_t j = 0; j < usage.server[s].size(); ++j)
      ledger.server_idle[s][j] -= usage.server[s][j];
}

void release_usage(ResourceLedger& ledger, const ResourceUsage& usage,
                   const Infrastructure& infra) {
  for (std::size_t s = 0; s < usage.server.size(); ++s) {
    const auto& cap = infra.capacity(static_cast<ServerId>(s));
    for (std::size_t j = 0; j < usage.server[s].size(); ++j) {
      ledger.server_idle[s][j] += usage.server[s][j];
      if (ledger.server_idle[s][j] > cap[j])
        throw std::logic_error("released more resources than server capacity");
    }
  }
}

}  // namespace relplace
