#include "relplace/trellis.hpp"

#include <algorithm>
#include <stdexcept>

namespace relplace {

namespace {

double hinge(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

PlacementPlan VrsspOutput::plan() const {
  PlacementPlan p;
  for (const auto& s : services) p.services.push_back(s.placement);
  return p;
}

void validate_input(const VrsspInput& input, const ServiceCatalog& catalog,
                    const Infrastructure& infra) {
  if (input.action.size() != catalog.size())
    throw std::invalid_argument("action length differs from number of service types");
  std::vector<int> counts(catalog.size(), 0);
  for (int l : input.arrangement) {
    if (l < 0 || static_cast<std::size_t>(l) >= catalog.size())
      throw std::invalid_argument("arrangement references unknown service type");
    ++counts[l];
  }
  if (counts != input.action)
    throw std::invalid_argument("arrangement is not a permutation of the action's services");
  if (input.snapshot.size() != infra.num_servers())
    throw std::invalid_argument("snapshot must have one row per server");
  for (std::size_t s = 0; s < input.snapshot.size(); ++s) {
    if (input.snapshot[s].size() != infra.num_resources())
      throw std::invalid_argument("snapshot row length differs from number of resources");
    for (std::size_t j = 0; j < input.snapshot[s].size(); ++j)
      if (input.snapshot[s][j] < 0 ||
          input.snapshot[s][j] > infra.capacity(static_cast<ServerId>(s))[j])
        throw std::invalid_argument("snapshot outside [0, capacity]");
  }
}

int stage_count(const VrsspInput& input, const ServiceCatalog& catalog) {
  int total = 0;
  for (int l : input.arrangement) total += 2 * catalog.at(l).num_vnfs();
  return total;
}

std::vector<StateId> stage_states(int m, const Infrastructure& infra) {
  if (m < 1) throw std::out_of_range("stages are numbered from 1");
  std::vector<StateId> states;
  states.reserve(infra.num_servers() + 1);
  if (m % 2 == 0) states.push_back(kNoServer);
  for (std::size_t s = 0; s < infra.num_servers(); ++s)
    states.push_back(state_of_server(static_cast<ServerId>(s)));
  return states;
}

Trellis::Trellis(const Infrastructure& infra, const ServiceCatalog& catalog, VrsspInput input)
    : infra_(infra), catalog_(catalog), input_(std::move(input)),
      num_resources_(infra.num_resources()) {
  validate_input(input_, catalog_, infra_);
  for (std::size_t k = 0; k < input_.arrangement.size(); ++k) {
    const int type = input_.arrangement[k];
    for (int u = 0; u < catalog_[type].num_vnfs(); ++u) {
      stages_info_.push_back({static_cast<int>(k), type, u, false});
      stages_info_.push_back({static_cast<int>(k), type, u, true});
    }
  }
  TrellisNode root;
  root.remaining.reserve(infra_.num_servers() * num_resources_);
  for (const auto& row : input_.snapshot)
    root.remaining.insert(root.remaining.end(), row.begin(), row.end());
  nodes_.push_back({std::move(root)});
}

double Trellis::state_failure_prob(StateId x) const {
  // The no-server state fails with certainty, so a missing backup leaves the
  // main's failure probability unchanged in every pairwise product.
  return x == kNoServer ? 1.0 : infra_.failure_prob(server_of_state(x));
}

double Trellis::link_cost(StateId a, StateId b) const {
  if (a == kNoServer || b == kNoServer) return 0.0;
  return infra_.link_cost(server_of_state(a), server_of_state(b));
}

StateId Trellis::ancestor(int m, int index, int steps) const {
  for (int i = 0; i < steps; ++i) {
    index = nodes_.at(m).at(index).predecessor;
    --m;
    if (index < 0) return kNoServer;
  }
  return nodes_.at(m).at(index).id;
}

bool Trellis::admissible(int m, int pred, StateId x2) const {
  if (x2 == kNoServer) return true;
  const auto& info = stage_info(m);
  const auto& from = nodes_.at(m - 1).at(pred);
  if (info.backup && from.id == x2) return false;
  const auto& demands = catalog_[info.service_type].vnfs[info.vnf].demands;
  const std::size_t base = static_cast<std::size_t>(server_of_state(x2)) * num_resources_;
  for (std::size_t j = 0; j < num_resources_; ++j)
    if (from.remaining[base + j] - demands[j] < 0) return false;
  return true;
}

double Trellis::transition_reliability(int m, int pred, StateId x2) const {
  const auto& info = stage_info(m);
  const auto& from = nodes_.at(m - 1).at(pred);
  const double v2 = state_failure_prob(x2);
  if (!info.backup) {
    return info.vnf == 0 ? 1.0 - v2 : from.reliability * (1.0 - v2);
  }
  // On a backup stage the predecessor is the main of the same VNF.
  const double v_main = state_failure_prob(from.id);
  if (info.vnf == 0) return 1.0 - v_main * v2;
  return from.reliability * (1.0 - v_main * v2) / (1.0 - v_main);
}

TransitionCost Trellis::transition_cost(int m, int pred, StateId x2) const {
  const auto& info = stage_info(m);
  const auto& type = catalog_[info.service_type];
  const auto& vnf = type.vnfs[info.vnf];
  const auto& from = nodes_.at(m - 1).at(pred);

  TransitionCost tc;
  tc.path_cost = from.cost;
  if (x2 != kNoServer) {
    const int inp = infra_.inp_of(server_of_state(x2));
    for (std::size_t j = 0; j < num_resources_; ++j)
      tc.server += static_cast<double>(vnf.demands[j]) * infra_.unit_cost(inp, static_cast<int>(j));
    tc.deployment = infra_.deployment_cost(inp, vnf.vnf_type);

    if (info.vnf > 0) {
      // Odd stage: previous VNF's main (m-2) and backup (m-1).
      // Even stage: previous VNF's backup (m-2) and main (m-3).
      const StateId near = info.backup ? ancestor(m - 1, pred, 1) : from.id;
      const StateId far = info.backup ? ancestor(m - 1, pred, 2) : ancestor(m - 1, pred, 1);
      tc.routing = type.bandwidth * (link_cost(near, x2) + link_cost(far, x2));
    }
  }

  const double objective = (info.backup && x2 == kNoServer) ? 1.0 : 1.0 - type.failure_cap;
  tc.reliability_penalty = type.penalty * hinge(objective - transition_reliability(m, pred, x2));

  if (!info.backup && info.vnf == 0 && info.service > 0) {
    const auto& prev = catalog_[input_.arrangement[info.service - 1]];
    tc.boundary_penalty = prev.penalty * hinge((1.0 - prev.failure_cap) - from.reliability);
  }
  return tc;
}

bool Trellis::run() {
  const int total = stage_count();
  const std::size_t n_servers = infra_.num_servers();
  for (int m = completed_stages() + 1; m <= total; ++m) {
    const auto& info = stage_info(m);
    const auto& demands = catalog_[info.service_type].vnfs[info.vnf].demands;
    const auto& prev = nodes_.at(m - 1);
    std::vector<TrellisNode> next;
    next.reserve(n_servers + 1);

    for (StateId x2 : stage_states(m, infra_)) {
      int best = -1;
      TransitionCost best_tc;
      double best_theta = 0.0;
      for (int p = 0; p < static_cast<int>(prev.size()); ++p) {
        if (!admissible(m, p, x2)) continue;
        const TransitionCost tc = transition_cost(m, p, x2);
        const double theta = tc.theta();
        if (best < 0 || theta < best_theta) {
          best = p;
          best_theta = theta;
          best_tc = tc;
        }
      }
      if (best < 0) continue;  // removed state

      TrellisNode node;
      node.id = x2;
      node.predecessor = best;
      node.cost = best_tc.path_cost + best_tc.placement();
      node.reliability = transition_reliability(m, best, x2);
      node.remaining = prev[best].remaining;
      if (x2 != kNoServer) {
        const std::size_t base = static_cast<std::size_t>(server_of_state(x2)) * num_resources_;
        for (std::size_t j = 0; j < num_resources_; ++j) node.remaining[base + j] -= demands[j];
      }
      next.push_back(std::move(node));
    }

    if (next.empty()) {
      valid_ = false;
      failed_service_ = info.service;
      return false;
    }
    nodes_.push_back(std::move(next));
  }
  return true;
}

std::vector<StateId> Trellis::path(int m, int index) const {
  std::vector<StateId> out(static_cast<std::size_t>(m));
  for (int stage = m; stage >= 1; --stage) {
    const auto& node = nodes_.at(stage).at(index);
    out[stage - 1] = node.id;
    index = node.predecessor;
  }
  return out;
}

int Trellis::best_final_node() const {
  const int last = completed_stages();
  if (last == 0) return 0;
  const auto& type = catalog_[input_.arrangement.back()];
  const auto& nodes = nodes_.at(last);
  int best = 0;
  double best_score = 0.0;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    const double score =
        nodes[i].cost + type.penalty * hinge((1.0 - type.failure_cap) - nodes[i].reliability);
    if (i == 0 || score < best_score) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

VrsspOutput Trellis::outputs() const {
  if (!valid_) throw std::logic_error("outputs requested from an invalid trellis");
  if (completed_stages() != stage_count())
    throw std::logic_error("outputs requested before the trellis was run");

  VrsspOutput out;
  const int total = stage_count();
  if (total == 0) return out;

  const std::vector<StateId> best = path(total, best_final_node());
  std::vector<int> admitted(catalog_.size(), 0);
  std::vector<double> running;

  for (int m = 1; m <= total; ++m) {
    const auto& info = stage_info(m);
    const auto& type = catalog_[info.service_type];
    const auto& vnf = type.vnfs[info.vnf];
    const StateId x = best[m - 1];

    if (info.vnf == 0 && !info.backup) {
      ServiceOutcome svc;
      svc.service_type = info.service_type;
      svc.ordinal = admitted[info.service_type]++;
      svc.usage.assign(infra_.num_servers(), ResourceVector(num_resources_, 0));
      svc.placement.service_type = info.service_type;
      svc.placement.vnfs.resize(type.vnfs.size());
      out.services.push_back(std::move(svc));
      running.push_back(1.0);
    }
    auto& svc = out.services.back();

    if (x != kNoServer) {
      const ServerId s = server_of_state(x);
      const int inp = infra_.inp_of(s);
      for (std::size_t j = 0; j < num_resources_; ++j) {
        svc.usage[s][j] += vnf.demands[j];
        svc.cost += static_cast<double>(vnf.demands[j]) * infra_.unit_cost(inp, static_cast<int>(j));
      }
      svc.cost += infra_.deployment_cost(inp, vnf.vnf_type);
      if (info.backup)
        svc.placement.vnfs[info.vnf].backup = s;
      else
        svc.placement.vnfs[info.vnf].main = s;
    }
    if (info.vnf > 0) {
      const StateId near = info.backup ? best[m - 3] : best[m - 2];
      const StateId far = info.backup ? best[m - 4] : best[m - 3];
      svc.cost += type.bandwidth * (link_cost(near, x) + link_cost(far, x));
    }
    if (info.backup) {
      running.back() *= 1.0 - state_failure_prob(best[m - 2]) * state_failure_prob(x);
      if (info.vnf + 1 == type.num_vnfs()) svc.failure_prob = 1.0 - running.back();
    }
  }
  return out;
}

VrsspOutput compute_outputs(const Trellis& trellis) { return trellis.outputs(); }

VrsspOutput run_vrssp(const VrsspInput& input, const ServiceCatalog& catalog,
                      const Infrastructure& infra) {
  Trellis trellis(infra, catalog, input);
  if (!trellis.run()) {
    VrsspOutput out;
    out.valid = false;
    out.failed_service = trellis.failed_service();
    return out;
  }
  return trellis.outputs();
}

}  // namespace relplace
