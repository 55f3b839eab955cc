#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "relplace/model.hpp"
#include "relplace/trellis.hpp"

namespace relplace {

/// Fully observed MDP state: arrivals this slot and currently active services.
struct MdpState {
  std::vector<int> arrivals;
  std::vector<int> actives;

  bool operator==(const MdpState&) const = default;
};

/// Mixed-radix enumeration of (actives, arrivals) with per-type strides.
///
/// Indices are zero-based; the one-based index of the model is index + 1.
/// The combined index is active-major: index = active_index * arrival_count
/// + arrival_index, so a sweep visits every arrival vector of the empty
/// system first.
class StateSpace {
 public:
  static constexpr std::size_t kDefaultCap = 2'000'000;

  StateSpace(std::vector<int> sigma_max, std::vector<int> lambda_max,
             std::size_t cap = kDefaultCap);
  static StateSpace from_catalog(const ServiceCatalog& catalog, std::size_t cap = kDefaultCap);

  std::size_t num_types() const { return sigma_max_.size(); }
  std::size_t size() const { return active_count_ * arrival_count_; }
  std::size_t active_count() const { return active_count_; }
  std::size_t arrival_count() const { return arrival_count_; }

  const std::vector<int>& sigma_max() const { return sigma_max_; }
  const std::vector<int>& lambda_max() const { return lambda_max_; }
  const std::vector<std::size_t>& active_strides() const { return active_stride_; }
  const std::vector<std::size_t>& arrival_strides() const { return arrival_stride_; }

  std::size_t active_index(std::span<const int> actives) const;
  std::vector<int> actives_of(std::size_t active_index) const;
  std::size_t arrival_index(std::span<const int> arrivals) const;
  std::vector<int> arrivals_of(std::size_t arrival_index) const;

  std::size_t index(const MdpState& s) const;
  MdpState state_of(std::size_t index) const;
  std::size_t combine(std::size_t active_index, std::size_t arrival_index) const {
    return active_index * arrival_count_ + arrival_index;
  }

  bool contains(const MdpState& s) const;

 private:
  std::vector<int> sigma_max_;
  std::vector<int> lambda_max_;
  std::vector<std::size_t> active_stride_;
  std::vector<std::size_t> arrival_stride_;
  std::size_t active_count_ = 1;
  std::size_t arrival_count_ = 1;
};

/// Every a with a^l <= min(lambda^l, sigma_max^l - sigma^l), in mixed-radix
/// order starting from the zero action.
std::vector<Action> feasible_actions(const MdpState& state, std::span<const int> sigma_max);

enum class DepartureMode {
  Binomial,     // each active service leaves independently with probability d
  Unnormalized  // prod_l d^(j-k), kept for auditing; rows do not sum to 1
};

/// Probability that active vector `from` becomes `to` after end-of-slot departures.
double departure_prob(std::span<const int> from, std::span<const int> to,
                      const ServiceCatalog& catalog, DepartureMode mode);

/// prod_l f^l(i^l).
double arrival_prob(std::span<const int> arrivals, const ServiceCatalog& catalog);

/// Transition structure P(S, A_r, S') = Pr(arrivals') * Pr(departures).
///
/// Departure rows are stored sparsely per active index of sigma + A_r; the
/// arrival factor is separable and kept as a vector over arrival indices.
class TransitionModel {
 public:
  TransitionModel(const StateSpace& space, const ServiceCatalog& catalog,
                  DepartureMode mode = DepartureMode::Binomial);

  DepartureMode mode() const { return mode_; }
  const StateSpace& space() const { return *space_; }

  double arrival(std::size_t arrival_index) const { return arrival_probs_.at(arrival_index); }
  const std::vector<double>& arrival_probs() const { return arrival_probs_; }

  /// Non-zero entries (next active index, probability) for a post-admission
  /// active index.
  const std::vector<std::pair<std::size_t, double>>& departure_row(std::size_t active_index) const {
    return departure_rows_.at(active_index);
  }

  double transition_prob(const MdpState& state, std::span<const int> realized,
                         const MdpState& next) const;

  /// Sum over all next states; 1 in binomial mode.
  double row_sum(const MdpState& state, std::span<const int> realized) const;

  /// Post-admission active index sigma + A_r.
  std::size_t admitted_index(const MdpState& state, std::span<const int> realized) const;

  /// sum_{S'} P(S, A_r, S') V(S') using a precomputed expectation over
  /// arrivals: expected_by_active[k] = sum_i Pr(i) V(k, i).
  double expected_value(std::size_t admitted_active_index,
                        std::span<const double> expected_by_active) const;

  /// expected_by_active for a value table over the full state space.
  std::vector<double> arrival_expectation(std::span<const double> values) const;

 private:
  const StateSpace* space_;
  const ServiceCatalog* catalog_;
  DepartureMode mode_;
  std::vector<double> arrival_probs_;
  std::vector<std::vector<std::pair<std::size_t, double>>> departure_rows_;
};

/// Indicator used by the reward: a service earns q iff F - e >= 0.
inline bool admitted_reliably(double failure_prob, double failure_cap) {
  return meets_reliability(failure_prob, failure_cap);
}

/// Admission reward minus placement cost; zero when the placement was invalid.
double reward(const VrsspOutput& output, const ServiceCatalog& catalog);

}  // namespace relplace
