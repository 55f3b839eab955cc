#include "relplace/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace relplace {

namespace {

BaselineId baseline_of(Strategy s) {
  switch (s) {
    case Strategy::MinResource: return BaselineId::MinResource;
    case Strategy::MinReliability: return BaselineId::MinReliability;
    case Strategy::Cera: return BaselineId::Cera;
    case Strategy::RedundantVnf: return BaselineId::RedundantVnf;
    default: return BaselineId::VrsspGreedy;
  }
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Mdp: return "mdp";
    case Strategy::Vrssp: return "vrssp";
    case Strategy::MinResource: return "min_resource";
    case Strategy::MinReliability: return "min_reliability";
    case Strategy::Cera: return "cera";
    case Strategy::RedundantVnf: return "redundant_vnf";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& name) {
  for (Strategy s : all_strategies())
    if (to_string(s) == name) return s;
  throw std::invalid_argument("unknown strategy '" + name + "'");
}

std::vector<Strategy> all_strategies() {
  return {Strategy::Mdp,         Strategy::Vrssp, Strategy::MinResource, Strategy::MinReliability,
          Strategy::Cera, Strategy::RedundantVnf};
}

std::vector<int> SlotState::active_counts(std::size_t num_types) const {
  std::vector<int> counts(num_types, 0);
  for (const auto& a : active) ++counts.at(a.service_type);
  return counts;
}

SlotState initial_slot_state(const Infrastructure& infra, std::uint64_t seed) {
  SlotState s;
  s.ledger = ResourceLedger::full(infra);
  s.rng.seed(seed);
  return s;
}

double MetricsReport::admission_ratio() const {
  return arrived == 0 ? 0.0 : static_cast<double>(admitted) / static_cast<double>(arrived);
}

double MetricsReport::mean_cost() const {
  return admitted == 0 ? 0.0 : total_cost / static_cast<double>(admitted);
}

double MetricsReport::backups_per_vnf() const {
  return admitted_vnfs == 0 ? 0.0
                            : static_cast<double>(backups) / static_cast<double>(admitted_vnfs);
}

double MetricsReport::mean_chain_length() const {
  return admitted == 0 ? 0.0
                       : static_cast<double>(admitted_vnfs) / static_cast<double>(admitted);
}

std::vector<int> sample_arrivals(std::mt19937_64& rng, const ServiceCatalog& catalog) {
  std::vector<int> out(catalog.size(), 0);
  for (std::size_t l = 0; l < catalog.size(); ++l) {
    const auto& pmf = catalog[l].arrival_pmf;
    std::discrete_distribution<int> dist(pmf.begin(), pmf.end());
    out[l] = dist(rng);
  }
  return out;
}

std::vector<bool> sample_departures(std::mt19937_64& rng, const std::vector<ActiveService>& active,
                                    const ServiceCatalog& catalog) {
  std::vector<bool> out(active.size(), false);
  for (std::size_t i = 0; i < active.size(); ++i) {
    std::bernoulli_distribution leave(catalog.at(active[i].service_type).departure_prob);
    out[i] = leave(rng);
  }
  return out;
}

bool conserved(const SlotState& state, const Infrastructure& infra) {
  ServerTable total = state.ledger.server_idle;
  for (const auto& a : state.active)
    for (std::size_t s = 0; s < total.size(); ++s)
      for (std::size_t j = 0; j < total[s].size(); ++j) total[s][j] += a.usage.server[s][j];
  return total == infra.capacities();
}

SlotMetrics run_slot(SlotState& state, Strategy strategy, const SimContext& ctx) {
  const auto& catalog = ctx.catalog;
  const auto& infra = ctx.infra;
  SlotMetrics m;
  m.slot = state.slot;
  m.arrivals = sample_arrivals(state.rng, catalog);
  m.admissions.assign(catalog.size(), 0);

  std::vector<int> requests;
  for (std::size_t l = 0; l < catalog.size(); ++l)
    requests.insert(requests.end(), static_cast<std::size_t>(m.arrivals[l]), static_cast<int>(l));

  BaselineOutcome outcome;
  if (strategy == Strategy::Mdp) {
    if (ctx.policy == nullptr) throw std::invalid_argument("the mdp strategy needs a policy");
    const MdpState s{m.arrivals, state.active_counts(catalog.size())};
    const PolicyEntry& entry = policy_lookup(*ctx.policy, s);
    for (std::size_t l = 0; l < catalog.size(); ++l)
      if (entry.action.at(l) > m.arrivals[l])
        throw std::logic_error("policy admits more services than arrived");
    outcome = vrssp_place(entry.arrangement, state.ledger, infra, catalog);
  } else {
    std::shuffle(requests.begin(), requests.end(), state.rng);
    outcome = run_baseline(baseline_of(strategy), requests, state.ledger, infra, catalog);
  }

  for (const auto& placement : outcome.plan.services) {
    ResourceUsage usage = resource_usage(placement, infra, catalog);
    const auto& type = catalog.at(placement.service_type);
    if (!meets_reliability(service_failure_probability(placement.vnfs, infra), type.failure_cap)) {
      release_usage(state.ledger, usage, infra);
      continue;
    }
    ++m.admissions[placement.service_type];
    m.placement_cost += placement_cost(placement, infra, catalog).total;
    m.vnfs += type.num_vnfs();
    for (const auto& v : placement.vnfs) m.backups += v.backup ? 1 : 0;
    state.active.push_back({placement.service_type, placement, std::move(usage)});
  }

  if (strategy == Strategy::Mdp) {
    const auto counts = state.active_counts(catalog.size());
    for (std::size_t l = 0; l < catalog.size(); ++l)
      if (counts[l] > ctx.policy->sigma_max.at(l))
        throw std::logic_error("active services exceed sigma_max under the mdp strategy");
  }

  const auto leaving = sample_departures(state.rng, state.active, catalog);
  std::vector<ActiveService> staying;
  staying.reserve(state.active.size());
  for (std::size_t i = 0; i < state.active.size(); ++i) {
    if (leaving[i]) {
      release_usage(state.ledger, state.active[i].usage, infra);
      ++m.departures;
    } else {
      staying.push_back(std::move(state.active[i]));
    }
  }
  state.active = std::move(staying);

  if (!conserved(state, infra))
    throw std::logic_error("resource conservation violated at slot " + std::to_string(state.slot));
  ++state.slot;
  return m;
}

MetricsReport run_experiment(const SimContext& ctx, Strategy strategy, long slots,
                             std::uint64_t seed, bool keep_slots) {
  if (slots < 1) throw std::invalid_argument("slots must be >= 1");
  MetricsReport report;
  report.strategy = to_string(strategy);
  report.seed = seed;
  report.slots = slots;
  report.per_type.assign(ctx.catalog.size(), {});
  SlotState state = initial_slot_state(ctx.infra, seed);

  for (long n = 0; n < slots; ++n) {
    SlotMetrics m = run_slot(state, strategy, ctx);
    for (std::size_t l = 0; l < ctx.catalog.size(); ++l) {
      const int len = ctx.catalog[l].num_vnfs();
      report.per_type[l].arrived += m.arrivals[l];
      report.per_type[l].admitted += m.admissions[l];
      report.per_chain_length[len].arrived += m.arrivals[l];
      report.per_chain_length[len].admitted += m.admissions[l];
      report.arrived += m.arrivals[l];
      report.admitted += m.admissions[l];
    }
    report.admitted_vnfs += m.vnfs;
    report.backups += m.backups;
    report.total_cost += m.placement_cost;
    if (keep_slots) report.per_slot.push_back(std::move(m));
  }
  return report;
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void write_metrics_csv(const MetricsReport& report, const ServiceCatalog& catalog,
                       std::ostream& out) {
  out << "slot";
  for (const auto& t : catalog) out << ",arrivals_" << t.name;
  for (const auto& t : catalog) out << ",admissions_" << t.name;
  out << ",placement_cost,backups,cumulative_admission_ratio\n";
  long arrived = 0, admitted = 0;
  for (const auto& m : report.per_slot) {
    out << m.slot;
    for (int a : m.arrivals) {
      out << ',' << a;
      arrived += a;
    }
    for (int a : m.admissions) {
      out << ',' << a;
      admitted += a;
    }
    const double ratio =
        arrived == 0 ? 0.0 : static_cast<double>(admitted) / static_cast<double>(arrived);
    out << ',' << format_number(m.placement_cost) << ',' << m.backups << ','
        << format_number(ratio) << '\n';
  }
}

}  // namespace relplace
