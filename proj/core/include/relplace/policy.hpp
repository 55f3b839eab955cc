#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "relplace/mdp.hpp"
#include "relplace/model.hpp"
#include "relplace/trellis.hpp"

namespace relplace {

/// Outcome of trying one (state, action, arrangement) against an idle-resource snapshot.
struct Evaluation {
  bool valid = false;
  double reward = 0.0;
  Action realized;    // services that met their reliability target
  ServerTable usage;  // resources held by the realized services
};

using ActionEvaluator = std::function<Evaluation(
    const MdpState& state, const Action& action, const Arrangement& arrangement,
    const ServerTable& snapshot)>;

/// Evaluator that places the action with the trellis and scores it.
ActionEvaluator vrssp_evaluator(const Infrastructure& infra, const ServiceCatalog& catalog);

/// Per-type count of placed services whose failure probability is within the cap.
Action realized_action(const Action& action, const VrsspOutput& output,
                       const ServiceCatalog& catalog);

/// Summed usage of the reliably placed services.
ServerTable reliable_usage(const VrsspOutput& output, const ServiceCatalog& catalog,
                           const Infrastructure& infra);

/// Learned idle resources per active-count vector.
///
/// The empty system is pinned to full capacity; every other entry starts at
/// zero and moves toward (source - usage) with a factor that shrinks by
/// `discount` after each update.
class ResourceEstimate {
 public:
  ResourceEstimate(std::size_t active_count, const Infrastructure& infra,
                   double alpha_init = 1.0, double discount = 0.5);

  std::size_t active_count() const { return alpha_.size(); }
  std::span<const double> values(std::size_t active_index) const;
  double alpha(std::size_t active_index) const { return alpha_.at(active_index); }

  /// Integer snapshot (floored, clamped to capacity) for the placement.
  ServerTable snapshot(std::size_t active_index) const;

  /// omega[target] = alpha * (source - usage) + (1 - alpha) * omega[target];
  /// alpha[target] *= discount.
  void update(std::size_t target, std::span<const double> source, const ServerTable& usage);

 private:
  std::size_t width_;
  std::size_t num_resources_;
  std::vector<double> capacity_;
  std::vector<double> values_;  // [active][server * R + j]
  std::vector<double> alpha_;
  double discount_;
};

/// Distinct random orderings of the action's type multiset (STV), at most
/// `count` of them, in first-drawn order.
std::vector<Arrangement> generate_arrangements(const Action& action, int count,
                                               std::mt19937_64& rng);

struct SolverOptions {
  double gamma = 0.9;
  /// Stopping threshold on the sup-norm change. value_iteration() replaces
  /// a value <= 0 with default_epsilon(); the solver itself requires > 0.
  double epsilon = 0.0;
  int num_arrangements = 10;
  double alpha_init = 1.0;
  double discount = 0.5;
  int max_iterations = 500;
  DepartureMode departure_mode = DepartureMode::Binomial;
  std::uint64_t seed = 1;
};

double default_epsilon(const ServiceCatalog& catalog);

struct PolicyEntry {
  Action action;
  Arrangement arrangement;
  double value = 0.0;
};

struct Policy {
  std::vector<int> sigma_max;
  std::vector<int> lambda_max;
  std::vector<PolicyEntry> entries;  // by combined state index
  double gamma = 0.9;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> mean_value_trace;  // V^M after each sweep
  std::vector<double> residual_trace;    // sup-norm change after each sweep
  std::string fingerprint;
};

/// Value iteration whose rewards come from placing each action with the
/// trellis against the learned resource estimate.
class ValueIterationSolver {
 public:
  ValueIterationSolver(const StateSpace& space, const TransitionModel& model,
                       const Infrastructure& infra, ActionEvaluator evaluator,
                       SolverOptions options);

  /// One synchronous sweep; returns ||V_n - V_{n-1}||_inf.
  double sweep();

  /// Reuse the last evaluation of every (state, action); rewards become
  /// stationary and sweeps reduce to plain Bellman backups.
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  /// Sweeps until the change drops below epsilon (at least two sweeps) or
  /// max_iterations is reached.
  Policy solve();

  const std::vector<double>& values() const { return values_; }
  const ResourceEstimate& estimate() const { return estimate_; }
  int iterations() const { return iterations_; }
  double epsilon() const { return options_.epsilon; }
  Policy policy() const;

  /// Best reward seen so far for (state, action index); for invariant checks.
  double best_reward(std::size_t state, std::size_t action) const;
  std::vector<Action> actions(std::size_t state) const;
  const Evaluation& last_evaluation(std::size_t state, std::size_t action) const;

 private:
  struct ActionLedger {
    Action action;
    std::deque<Arrangement> pool;
    bool pool_ready = false;
    Arrangement best_arrangement;
    double best_reward = 0.0;
    Evaluation last;
  };

  const StateSpace& space_;
  const TransitionModel& model_;
  ActionEvaluator evaluator_;
  SolverOptions options_;
  ResourceEstimate estimate_;
  std::mt19937_64 rng_;
  std::vector<std::vector<ActionLedger>> ledgers_;
  std::vector<double> values_;
  std::vector<std::size_t> chosen_;
  std::vector<double> mean_trace_;
  std::vector<double> residual_trace_;
  int iterations_ = 0;
  bool frozen_ = false;
  bool converged_ = false;
};

/// Builds the state space and transition model from the catalog and runs the solver.
Policy value_iteration(const Infrastructure& infra, const ServiceCatalog& catalog,
                       SolverOptions options);

/// Stored optimal (action, arrangement) of a state; throws std::out_of_range
/// for states outside the policy's state space.
const PolicyEntry& policy_lookup(const Policy& policy, const MdpState& state);

}  // namespace relplace
