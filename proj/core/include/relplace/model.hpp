#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace relplace {

/// Integral amount of a server resource or of link bandwidth.
using Units = std::int64_t;
using ResourceVector = std::vector<Units>;

/// Global, zero-based server index over all InPs (InP-major order).
using ServerId = int;

/// Per-server resource table, indexed [server][resource].
using ServerTable = std::vector<ResourceVector>;

template <typename T>
using Matrix = std::vector<std::vector<T>>;

constexpr double kCostTolerance = 1e-9;
constexpr double kProbabilityTolerance = 1e-12;

struct InpSpec {
  double failure_prob = 0.0;
  std::vector<ResourceVector> servers;  // capacity vector per server
};

/// Servers, links and prices of all infrastructure providers.
///
/// Link tables are indexed by global server id. The constructor validates
/// every invariant and throws std::invalid_argument on violation.
class Infrastructure {
 public:
  Infrastructure(std::vector<InpSpec> inps, std::vector<double> alpha,
                 double beta, double v_base, Matrix<double> link_cost,
                 Matrix<Units> link_bandwidth, Matrix<double> deployment_cost);

  std::size_t num_inps() const { return inps_.size(); }
  std::size_t num_servers() const { return server_inp_.size(); }
  std::size_t num_resources() const { return alpha_.size(); }
  std::size_t num_vnf_types() const;

  int inp_of(ServerId s) const { return server_inp_.at(s); }
  int local_index(ServerId s) const { return server_local_.at(s); }
  ServerId server_id(int inp, int local) const;

  double inp_failure_prob(int inp) const { return inps_.at(inp).failure_prob; }
  double failure_prob(ServerId s) const { return inp_failure_prob(inp_of(s)); }
  const ResourceVector& capacity(ServerId s) const;

  double link_cost(ServerId a, ServerId b) const { return link_cost_.at(a).at(b); }
  Units link_bandwidth(ServerId a, ServerId b) const { return link_bandwidth_.at(a).at(b); }
  double deployment_cost(int inp, int vnf_type) const { return deployment_cost_.at(inp).at(vnf_type); }

  const std::vector<InpSpec>& inps() const { return inps_; }
  const std::vector<double>& alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double v_base() const { return v_base_; }
  const Matrix<double>& link_cost_table() const { return link_cost_; }
  const Matrix<Units>& link_bandwidth_table() const { return link_bandwidth_; }
  const Matrix<double>& deployment_cost_table() const { return deployment_cost_; }

  /// Full-capacity table, [server][resource].
  ServerTable capacities() const;

  /// Cached per-unit resource price of an InP (see server_unit_cost).
  double unit_cost(int inp, int resource) const { return unit_cost_.at(inp).at(resource); }

 private:
  std::vector<InpSpec> inps_;
  std::vector<double> alpha_;
  double beta_;
  double v_base_;
  Matrix<double> link_cost_;
  Matrix<Units> link_bandwidth_;
  Matrix<double> deployment_cost_;
  std::vector<int> server_inp_;
  std::vector<int> server_local_;
  Matrix<double> unit_cost_;
};

struct VnfSpec {
  int vnf_type = 0;
  ResourceVector demands;
};

/// One service type of the catalog: SLA, SFC and traffic statistics.
struct ServiceType {
  std::string name;
  double failure_cap = 0.0;     // maximum tolerable failure probability F
  double departure_prob = 1.0;  // per-slot departure probability d
  double bandwidth = 0.0;       // b, charged on every inter-VNF link used
  std::vector<VnfSpec> vnfs;
  std::vector<double> arrival_pmf;  // f(0..lambda_max)
  double admission_reward = 0.0;    // q
  double penalty = 1e6;             // M, reliability-violation weight
  int sigma_max = 0;                // cap on concurrently active services

  int num_vnfs() const { return static_cast<int>(vnfs.size()); }
  int lambda_max() const { return static_cast<int>(arrival_pmf.size()) - 1; }
  Units total_demand(int vnf) const;
};

using ServiceCatalog = std::vector<ServiceType>;

/// Throws std::invalid_argument naming the first violated invariant.
void validate_catalog(const ServiceCatalog& catalog, const Infrastructure& infra);

struct VnfAssignment {
  ServerId main = 0;
  std::optional<ServerId> backup;
};

struct ServicePlacement {
  int service_type = 0;
  std::vector<VnfAssignment> vnfs;
};

struct PlacementPlan {
  std::vector<ServicePlacement> services;
};

struct CostBreakdown {
  double server = 0.0;
  double forwarding = 0.0;
  double deployment = 0.0;
  double total = 0.0;

  CostBreakdown& operator+=(const CostBreakdown& other);
};

/// Idle server resources and idle link bandwidth.
struct ResourceLedger {
  ServerTable server_idle;
  Matrix<Units> link_idle;

  static ResourceLedger full(const Infrastructure& infra);
};

/// Resource and bandwidth consumption of a placement.
struct ResourceUsage {
  ServerTable server;   // [server][resource]
  Matrix<Units> link;   // [server][server], both directions filled

  static ResourceUsage zero(const Infrastructure& infra);
  ResourceUsage& operator+=(const ResourceUsage& other);
};

/// Per-unit price of `resource` on servers of `inp`: alpha_j * exp(beta * (v_base - v_i)).
double server_unit_cost(const Infrastructure& infra, int inp, int resource);

CostBreakdown placement_cost(const ServicePlacement& service, const Infrastructure& infra,
                             const ServiceCatalog& catalog);
CostBreakdown placement_cost(const PlacementPlan& plan, const Infrastructure& infra,
                             const ServiceCatalog& catalog);

/// Failure probability of a chain whose VNFs fail independently; a VNF fails
/// when its main and (if present) its backup both fail.
double service_failure_probability(std::span<const VnfAssignment> vnfs,
                                   const Infrastructure& infra);

bool meets_reliability(double failure_prob, double failure_cap);

ResourceUsage resource_usage(const ServicePlacement& service, const Infrastructure& infra,
                             const ServiceCatalog& catalog);
ResourceUsage resource_usage(const PlacementPlan& plan, const Infrastructure& infra,
                             const ServiceCatalog& catalog);

/// Server pairs that carry traffic between consecutive VNFs: every
/// combination of {main, backup} of VNF u with {main, backup} of VNF u+1.
/// Pairs on the same server are omitted (internal routing).
std::vector<std::pair<ServerId, ServerId>> forwarding_links(const ServicePlacement& service);

enum class Constraint { Placement, Resource, Bandwidth, Forwarding, Reliability };

std::string to_string(Constraint c);

struct Violation {
  Constraint constraint;
  int service = -1;
  int vnf = -1;
  ServerId server = -1;
  ServerId peer = -1;
  std::string detail;
};

/// Checks a plan against the ledger. Violations are returned, never thrown.
std::vector<Violation> validate_plan(const PlacementPlan& plan, const ResourceLedger& ledger,
                                     const Infrastructure& infra, const ServiceCatalog& catalog);

/// Subtracts server usage from the ledger; throws std::logic_error if any
/// entry would go negative. Link bandwidth is not enforced by the placement
/// algorithms, so link_idle is left untouched (see validate_plan for H_b).
void apply_usage(ResourceLedger& ledger, const ResourceUsage& usage);
void release_usage(ResourceLedger& ledger, const ResourceUsage& usage,
                   const Infrastructure& infra);

}  // namespace relplace
