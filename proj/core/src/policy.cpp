#include "relplace/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace relplace {

Action realized_action(const Action& action, const VrsspOutput& output,
                       const ServiceCatalog& catalog) {
  Action realized(action.size(), 0);
  if (!output.valid) return realized;
  for (const auto& s : output.services)
    if (admitted_reliably(s.failure_prob, catalog.at(s.service_type).failure_cap))
      ++realized.at(s.service_type);
  return realized;
}

ServerTable reliable_usage(const VrsspOutput& output, const ServiceCatalog& catalog,
                           const Infrastructure& infra) {
  ServerTable usage(infra.num_servers(), ResourceVector(infra.num_resources(), 0));
  if (!output.valid) return usage;
  for (const auto& s : output.services) {
    if (!admitted_reliably(s.failure_prob, catalog.at(s.service_type).failure_cap)) continue;
    for (std::size_t i = 0; i < usage.size(); ++i)
      for (std::size_t j = 0; j < usage[i].size(); ++j) usage[i][j] += s.usage[i][j];
  }
  return usage;
}

ActionEvaluator vrssp_evaluator(const Infrastructure& infra, const ServiceCatalog& catalog) {
  return [&infra, &catalog](const MdpState&, const Action& action, const Arrangement& arrangement,
                            const ServerTable& snapshot) {
    Evaluation ev;
    ev.realized.assign(action.size(), 0);
    if (arrangement.empty()) {
      ev.valid = true;
      ev.usage.assign(infra.num_servers(), ResourceVector(infra.num_resources(), 0));
      return ev;
    }
    const VrsspOutput out = run_vrssp({action, arrangement, snapshot}, catalog, infra);
    ev.valid = out.valid;
    ev.reward = reward(out, catalog);
    ev.realized = realized_action(action, out, catalog);
    ev.usage = reliable_usage(out, catalog, infra);
    return ev;
  };
}

ResourceEstimate::ResourceEstimate(std::size_t active_count, const Infrastructure& infra,
                                   double alpha_init, double discount)
    : width_(infra.num_servers() * infra.num_resources()),
      num_resources_(infra.num_resources()),
      values_(active_count * width_, 0.0),
      alpha_(active_count, alpha_init),
      discount_(discount) {
  if (!(alpha_init > 0.0 && alpha_init <= 1.0))
    throw std::invalid_argument("alpha_init must lie in (0, 1]");
  if (!(discount > 0.0 && discount <= 1.0))
    throw std::invalid_argument("discount must lie in (0, 1]");
  if (active_count == 0) throw std::invalid_argument("estimate needs at least one active state");
  for (const auto& row : infra.capacities())
    for (Units c : row) capacity_.push_back(static_cast<double>(c));
  // The empty system has everything idle.
  std::copy(capacity_.begin(), capacity_.end(), values_.begin());
}

std::span<const double> ResourceEstimate::values(std::size_t active_index) const {
  if (active_index >= alpha_.size()) throw std::out_of_range("active index out of range");
  return {values_.data() + active_index * width_, width_};
}

ServerTable ResourceEstimate::snapshot(std::size_t active_index) const {
  const auto v = values(active_index);
  ServerTable out(width_ / std::max<std::size_t>(num_resources_, 1),
                  ResourceVector(num_resources_, 0));
  for (std::size_t k = 0; k < width_; ++k) {
    const double clamped = std::clamp(std::floor(v[k] + 1e-9), 0.0, capacity_[k]);
    out[k / num_resources_][k % num_resources_] = static_cast<Units>(clamped);
  }
  return out;
}

void ResourceEstimate::update(std::size_t target, std::span<const double> source,
                              const ServerTable& usage) {
  if (target >= alpha_.size()) throw std::out_of_range("active index out of range");
  if (target == 0) return;  // pinned to full capacity
  const double a = alpha_[target];
  double* omega = values_.data() + target * width_;
  for (std::size_t k = 0; k < width_; ++k) {
    const double n = static_cast<double>(usage[k / num_resources_][k % num_resources_]);
    const double next = a * (source[k] - n) + (1.0 - a) * omega[k];
    omega[k] = std::clamp(next, 0.0, capacity_[k]);
  }
  alpha_[target] = a * discount_;
}

std::vector<Arrangement> generate_arrangements(const Action& action, int count,
                                               std::mt19937_64& rng) {
  Arrangement stv;
  for (std::size_t l = 0; l < action.size(); ++l)
    stv.insert(stv.end(), static_cast<std::size_t>(action[l]), static_cast<int>(l));
  std::vector<Arrangement> pool;
  if (stv.empty()) {
    pool.push_back(stv);
    return pool;
  }
  for (int i = 0; i < count; ++i) {
    Arrangement perm = stv;
    std::shuffle(perm.begin(), perm.end(), rng);
    if (std::find(pool.begin(), pool.end(), perm) == pool.end()) pool.push_back(std::move(perm));
  }
  return pool;
}

double default_epsilon(const ServiceCatalog& catalog) {
  double q = 0.0;
  for (const auto& t : catalog) q = std::max(q, t.admission_reward);
  return q > 0.0 ? 1e-3 * q : 1e-6;
}

ValueIterationSolver::ValueIterationSolver(const StateSpace& space, const TransitionModel& model,
                                           const Infrastructure& infra,
                                           ActionEvaluator evaluator, SolverOptions options)
    : space_(space),
      model_(model),
      evaluator_(std::move(evaluator)),
      options_(options),
      estimate_(space.active_count(), infra, options.alpha_init, options.discount),
      rng_(options.seed),
      ledgers_(space.size()),
      values_(space.size(), 0.0),
      chosen_(space.size(), 0) {
  if (!(options_.gamma > 0.0 && options_.gamma < 1.0))
    throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!(options_.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (options_.num_arrangements < 1) throw std::invalid_argument("num_arrangements must be >= 1");
  if (options_.max_iterations < 2) throw std::invalid_argument("max_iterations must be >= 2");
  for (std::size_t s = 0; s < space_.size(); ++s)
    for (auto& a : feasible_actions(space_.state_of(s), space_.sigma_max()))
      ledgers_[s].push_back(ActionLedger{std::move(a), {}, false, {},
                                         -std::numeric_limits<double>::infinity(), {}});
}

double ValueIterationSolver::sweep() {
  const std::vector<double> previous = values_;
  const std::vector<double> expected = model_.arrival_expectation(previous);

  for (std::size_t s = 0; s < space_.size(); ++s) {
    const MdpState state = space_.state_of(s);
    const std::size_t eta = space_.active_index(state.actives);
    ServerTable snapshot;
    if (!frozen_) snapshot = estimate_.snapshot(eta);

    double best_q = 0.0;
    std::size_t best_a = 0;
    for (std::size_t a = 0; a < ledgers_[s].size(); ++a) {
      auto& ledger = ledgers_[s][a];
      if (!frozen_) {
        if (!ledger.pool_ready) {
          auto pool = generate_arrangements(ledger.action, options_.num_arrangements, rng_);
          ledger.pool.assign(pool.begin(), pool.end());
          ledger.best_arrangement = ledger.pool.front();
          ledger.pool_ready = true;
        }
        Arrangement rho;
        if (!ledger.pool.empty()) {
          rho = std::move(ledger.pool.front());
          ledger.pool.pop_front();
        } else {
          rho = ledger.best_arrangement;
        }

        Evaluation ev = evaluator_(state, ledger.action, rho, snapshot);
        if (!ev.valid) ev.realized.assign(ledger.action.size(), 0);
        for (std::size_t l = 0; l < ev.realized.size(); ++l)
          if (ev.realized[l] > ledger.action[l] || ev.realized[l] < 0)
            throw std::logic_error("realized action exceeds the chosen action");

        if (ev.valid) {
          const bool admitted = std::any_of(ev.realized.begin(), ev.realized.end(),
                                            [](int x) { return x > 0; });
          if (admitted) {
            const std::size_t next = model_.admitted_index(state, ev.realized);
            estimate_.update(next, estimate_.values(eta), ev.usage);
          }
          if (ledger.best_reward <= ev.reward) {
            ledger.best_reward = ev.reward;
            ledger.best_arrangement = rho;
          }
        }
        ledger.last = std::move(ev);
      }

      const Evaluation& ev = ledger.last;
      const std::size_t next = ev.realized.empty()
                                   ? space_.active_index(state.actives)
                                   : model_.admitted_index(state, ev.realized);
      const double q = ev.reward + options_.gamma * model_.expected_value(next, expected);
      if (a == 0 || q > best_q) {
        best_q = q;
        best_a = a;
      }
    }
    values_[s] = best_q;
    chosen_[s] = best_a;
  }

  ++iterations_;
  double diff = 0.0, mean = 0.0;
  for (std::size_t s = 0; s < values_.size(); ++s) {
    diff = std::max(diff, std::abs(values_[s] - previous[s]));
    mean += values_[s];
  }
  mean_trace_.push_back(mean / static_cast<double>(values_.size()));
  residual_trace_.push_back(diff);
  return diff;
}

Policy ValueIterationSolver::solve() {
  converged_ = false;
  while (iterations_ < options_.max_iterations) {
    const double diff = sweep();
    if (iterations_ >= 2 && diff < options_.epsilon) {
      converged_ = true;
      break;
    }
  }
  return policy();
}

Policy ValueIterationSolver::policy() const {
  Policy p;
  p.sigma_max = space_.sigma_max();
  p.lambda_max = space_.lambda_max();
  p.gamma = options_.gamma;
  p.epsilon = options_.epsilon;
  p.seed = options_.seed;
  p.iterations = iterations_;
  p.converged = converged_;
  p.mean_value_trace = mean_trace_;
  p.residual_trace = residual_trace_;
  p.entries.resize(space_.size());
  for (std::size_t s = 0; s < space_.size(); ++s) {
    const auto& ledger = ledgers_[s][chosen_[s]];
    p.entries[s].action = ledger.action;
    p.entries[s].arrangement = ledger.best_arrangement;
    p.entries[s].value = values_[s];
  }
  return p;
}

double ValueIterationSolver::best_reward(std::size_t state, std::size_t action) const {
  return ledgers_.at(state).at(action).best_reward;
}

std::vector<Action> ValueIterationSolver::actions(std::size_t state) const {
  std::vector<Action> out;
  for (const auto& l : ledgers_.at(state)) out.push_back(l.action);
  return out;
}

const Evaluation& ValueIterationSolver::last_evaluation(std::size_t state,
                                                        std::size_t action) const {
  return ledgers_.at(state).at(action).last;
}

Policy value_iteration(const Infrastructure& infra, const ServiceCatalog& catalog,
                       SolverOptions options) {
  if (options.epsilon <= 0.0) options.epsilon = default_epsilon(catalog);
  const StateSpace space = StateSpace::from_catalog(catalog);
  const TransitionModel model(space, catalog, options.departure_mode);
  ValueIterationSolver solver(space, model, infra, vrssp_evaluator(infra, catalog), options);
  return solver.solve();
}

const PolicyEntry& policy_lookup(const Policy& policy, const MdpState& state) {
  const StateSpace space(policy.sigma_max, policy.lambda_max,
                         std::numeric_limits<std::size_t>::max());
  if (!space.contains(state)) throw std::out_of_range("state outside the policy's state space");
  const std::size_t idx = space.index(state);
  if (idx >= policy.entries.size()) throw std::out_of_range("policy table is truncated");
  return policy.entries[idx];
}

}  // namespace relplace
