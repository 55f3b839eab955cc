#include "relplace/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace relplace {

namespace {

std::vector<std::size_t> strides(const std::vector<int>& max, std::size_t cap, std::size_t& count) {
  std::vector<std::size_t> out(max.size());
  count = 1;
  for (std::size_t l = 0; l < max.size(); ++l) {
    if (max[l] < 0) throw std::invalid_argument("negative maximum in state space");
    out[l] = count;
    const auto radix = static_cast<std::size_t>(max[l]) + 1;
    if (count > cap / radix)
      throw std::length_error("state space exceeds the configured cap of " + std::to_string(cap));
    count *= radix;
  }
  return out;
}

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

}  // namespace

StateSpace::StateSpace(std::vector<int> sigma_max, std::vector<int> lambda_max, std::size_t cap)
    : sigma_max_(std::move(sigma_max)), lambda_max_(std::move(lambda_max)) {
  if (sigma_max_.size() != lambda_max_.size() || sigma_max_.empty())
    throw std::invalid_argument("sigma_max and lambda_max need one entry per service type");
  active_stride_ = strides(sigma_max_, cap, active_count_);
  arrival_stride_ = strides(lambda_max_, cap, arrival_count_);
  if (active_count_ > cap / arrival_count_)
    throw std::length_error("state space exceeds the configured cap of " + std::to_string(cap));
}

StateSpace StateSpace::from_catalog(const ServiceCatalog& catalog, std::size_t cap) {
  std::vector<int> sigma, lambda;
  for (const auto& t : catalog) {
    sigma.push_back(t.sigma_max);
    lambda.push_back(t.lambda_max());
  }
  return StateSpace(std::move(sigma), std::move(lambda), cap);
}

std::size_t StateSpace::active_index(std::span<const int> actives) const {
  if (actives.size() != sigma_max_.size()) throw std::out_of_range("active vector length");
  std::size_t idx = 0;
  for (std::size_t l = 0; l < actives.size(); ++l) {
    if (actives[l] < 0 || actives[l] > sigma_max_[l]) throw std::out_of_range("active count out of range");
    idx += static_cast<std::size_t>(actives[l]) * active_stride_[l];
  }
  return idx;
}

std::vector<int> StateSpace::actives_of(std::size_t idx) const {
  if (idx >= active_count_) throw std::out_of_range("active index out of range");
  std::vector<int> out(sigma_max_.size());
  for (std::size_t l = 0; l < out.size(); ++l) {
    out[l] = static_cast<int>(idx % (static_cast<std::size_t>(sigma_max_[l]) + 1));
    idx /= static_cast<std::size_t>(sigma_max_[l]) + 1;
  }
  return out;
}

std::size_t StateSpace::arrival_index(std::span<const int> arrivals) const {
  if (arrivals.size() != lambda_max_.size()) throw std::out_of_range("arrival vector length");
  std::size_t idx = 0;
  for (std::size_t l = 0; l < arrivals.size(); ++l) {
    if (arrivals[l] < 0 || arrivals[l] > lambda_max_[l]) throw std::out_of_range("arrival count out of range");
    idx += static_cast<std::size_t>(arrivals[l]) * arrival_stride_[l];
  }
  return idx;
}

std::vector<int> StateSpace::arrivals_of(std::size_t idx) const {
  if (idx >= arrival_count_) throw std::out_of_range("arrival index out of range");
  std::vector<int> out(lambda_max_.size());
  for (std::size_t l = 0; l < out.size(); ++l) {
    out[l] = static_cast<int>(idx % (static_cast<std::size_t>(lambda_max_[l]) + 1));
    idx /= static_cast<std::size_t>(lambda_max_[l]) + 1;
  }
  return out;
}

std::size_t StateSpace::index(const MdpState& s) const {
  return combine(active_index(s.actives), arrival_index(s.arrivals));
}

MdpState StateSpace::state_of(std::size_t idx) const {
  if (idx >= size()) throw std::out_of_range("state index out of range");
  return MdpState{arrivals_of(idx % arrival_count_), actives_of(idx / arrival_count_)};
}

bool StateSpace::contains(const MdpState& s) const {
  if (s.actives.size() != sigma_max_.size() || s.arrivals.size() != lambda_max_.size()) return false;
  for (std::size_t l = 0; l < sigma_max_.size(); ++l) {
    if (s.actives[l] < 0 || s.actives[l] > sigma_max_[l]) return false;
    if (s.arrivals[l] < 0 || s.arrivals[l] > lambda_max_[l]) return false;
  }
  return true;
}

std::vector<Action> feasible_actions(const MdpState& state, std::span<const int> sigma_max) {
  const std::size_t L = sigma_max.size();
  std::vector<int> bound(L);
  for (std::size_t l = 0; l < L; ++l)
    bound[l] = std::max(0, std::min(state.arrivals.at(l), sigma_max[l] - state.actives.at(l)));

  std::vector<Action> out;
  Action a(L, 0);
  while (true) {
    out.push_back(a);
    std::size_t l = 0;
    while (l < L && a[l] == bound[l]) a[l++] = 0;
    if (l == L) break;
    ++a[l];
  }
  return out;
}

double departure_prob(std::span<const int> from, std::span<const int> to,
                      const ServiceCatalog& catalog, DepartureMode mode) {
  double p = 1.0;
  for (std::size_t l = 0; l < from.size(); ++l) {
    const int leaving = from[l] - to[l];
    if (leaving < 0) return 0.0;
    const double d = catalog.at(l).departure_prob;
    if (mode == DepartureMode::Binomial)
      p *= binomial(from[l], to[l]) * std::pow(d, leaving) * std::pow(1.0 - d, to[l]);
    else
      p *= std::pow(d, leaving);
  }
  return p;
}

double arrival_prob(std::span<const int> arrivals, const ServiceCatalog& catalog) {
  double p = 1.0;
  for (std::size_t l = 0; l < arrivals.size(); ++l) {
    const auto& pmf = catalog.at(l).arrival_pmf;
    if (arrivals[l] < 0 || static_cast<std::size_t>(arrivals[l]) >= pmf.size()) return 0.0;
    p *= pmf[arrivals[l]];
  }
  return p;
}

TransitionModel::TransitionModel(const StateSpace& space, const ServiceCatalog& catalog,
                                 DepartureMode mode)
    : space_(&space), catalog_(&catalog), mode_(mode) {
  arrival_probs_.resize(space.arrival_count());
  for (std::size_t i = 0; i < space.arrival_count(); ++i)
    arrival_probs_[i] = arrival_prob(space.arrivals_of(i), catalog);

  departure_rows_.resize(space.active_count());
  for (std::size_t j = 0; j < space.active_count(); ++j) {
    const auto from = space.actives_of(j);
    // Enumerate every to <= from componentwise.
    std::vector<int> to(from.size(), 0);
    while (true) {
      const double p = departure_prob(from, to, catalog, mode);
      if (p != 0.0) departure_rows_[j].emplace_back(space.active_index(to), p);
      std::size_t l = 0;
      while (l < to.size() && to[l] == from[l]) to[l++] = 0;
      if (l == to.size()) break;
      ++to[l];
    }
  }
}

std::size_t TransitionModel::admitted_index(const MdpState& state,
                                            std::span<const int> realized) const {
  std::vector<int> j(state.actives);
  for (std::size_t l = 0; l < j.size(); ++l) j[l] += realized[l];
  return space_->active_index(j);
}

double TransitionModel::transition_prob(const MdpState& state, std::span<const int> realized,
                                        const MdpState& next) const {
  std::vector<int> j(state.actives);
  for (std::size_t l = 0; l < j.size(); ++l) j[l] += realized[l];
  return arrival_prob(next.arrivals, *catalog_) *
         departure_prob(j, next.actives, *catalog_, mode_);
}

double TransitionModel::row_sum(const MdpState& state, std::span<const int> realized) const {
  const std::size_t j = admitted_index(state, realized);
  double dep = 0.0;
  for (const auto& [k, p] : departure_rows_[j]) dep += p;
  double arr = 0.0;
  for (double p : arrival_probs_) arr += p;
  return dep * arr;
}

double TransitionModel::expected_value(std::size_t admitted_active_index,
                                       std::span<const double> expected_by_active) const {
  double sum = 0.0;
  for (const auto& [k, p] : departure_rows_.at(admitted_active_index))
    sum += p * expected_by_active[k];
  return sum;
}

std::vector<double> TransitionModel::arrival_expectation(std::span<const double> values) const {
  const std::size_t arrivals = space_->arrival_count();
  std::vector<double> out(space_->active_count(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < arrivals; ++i) sum += arrival_probs_[i] * values[k * arrivals + i];
    out[k] = sum;
  }
  return out;
}

double reward(const VrsspOutput& output, const ServiceCatalog& catalog) {
  if (!output.valid) return 0.0;
  double r = 0.0;
  for (const auto& s : output.services) {
    const auto& type = catalog.at(s.service_type);
    if (admitted_reliably(s.failure_prob, type.failure_cap)) r += type.admission_reward;
    r -= s.cost;
  }
  return r;
}

}  // namespace relplace
