#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "relplace/model.hpp"
#include "relplace/trellis.hpp"

namespace fixtures {

using namespace relplace;

inline Matrix<double> grouped_links(const std::vector<int>& servers_per_inp, double intra,
                                    double inter) {
  std::vector<int> owner;
  for (std::size_t i = 0; i < servers_per_inp.size(); ++i)
    owner.insert(owner.end(), static_cast<std::size_t>(servers_per_inp[i]), static_cast<int>(i));
  Matrix<double> m(owner.size(), std::vector<double>(owner.size(), 0.0));
  for (std::size_t a = 0; a < owner.size(); ++a)
    for (std::size_t b = 0; b < owner.size(); ++b)
      if (a != b) m[a][b] = owner[a] == owner[b] ? intra : inter;
  return m;
}

inline Matrix<Units> uniform_bandwidth(std::size_t n, Units bw) {
  Matrix<Units> m(n, std::vector<Units>(n, bw));
  for (std::size_t a = 0; a < n; ++a) m[a][a] = 0;
  return m;
}

/// Two InPs with one server each: v = 0.1 at 2 per unit, v = 0.2 at 1 per unit.
inline Infrastructure tiny_infrastructure(Units capacity = 10) {
  std::vector<InpSpec> inps{{0.1, {{capacity}}}, {0.2, {{capacity}}}};
  return Infrastructure(inps, {1.0}, std::log(2.0) / 0.1, 0.2, grouped_links({1, 1}, 0.0, 1.0),
                        uniform_bandwidth(2, 100), {{0.0}, {0.0}});
}

inline ServiceType make_type(std::vector<Units> demands, double cap, double q = 100.0,
                             int sigma_max = 1, std::vector<double> pmf = {0.0, 1.0},
                             double departure = 0.5, double bandwidth = 0.0) {
  ServiceType t;
  t.name = "t" + std::to_string(demands.size());
  t.failure_cap = cap;
  t.departure_prob = departure;
  t.bandwidth = bandwidth;
  t.admission_reward = q;
  t.sigma_max = sigma_max;
  t.arrival_pmf = std::move(pmf);
  for (Units d : demands) t.vnfs.push_back({0, {d}});
  return t;
}

inline ServiceCatalog tiny_catalog() { return {make_type({5}, 0.05)}; }

/// 7 InPs (v = 0.07 .. 0.01), 3 servers each, one resource.
inline Infrastructure full_scale_infrastructure(Units capacity = 80, double beta = 15.0) {
  std::vector<InpSpec> inps;
  for (int i = 0; i < 7; ++i) inps.push_back({0.07 - 0.01 * i, {{capacity}, {capacity}, {capacity}}});
  return Infrastructure(inps, {1.0}, beta, 0.07, grouped_links(std::vector<int>(7, 3), 0.05, 0.2),
                        uniform_bandwidth(21, 1000),
                        Matrix<double>(7, std::vector<double>(6, 5.0)));
}

inline ServiceCatalog full_scale_catalog(std::uint64_t seed = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Units> demand(20, 30);
  std::uniform_int_distribution<int> vtype(0, 5);
  const double caps[] = {0.04, 0.03, 0.02, 0.01};
  ServiceCatalog c;
  for (int l = 0; l < 4; ++l) {
    ServiceType t;
    t.name = "s" + std::to_string(l + 1);
    t.failure_cap = caps[l];
    t.departure_prob = 0.5;
    t.bandwidth = 10.0;
    t.admission_reward = 4000.0;
    t.sigma_max = 5;
    t.arrival_pmf = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    for (int u = 0; u < 3 + l; ++u) t.vnfs.push_back({vtype(rng), {demand(rng)}});
    c.push_back(t);
  }
  return c;
}

/// Random snapshot between `low` and full capacity.
inline ServerTable random_snapshot(const Infrastructure& infra, std::mt19937_64& rng,
                                   double low = 0.0) {
  ServerTable t = infra.capacities();
  for (auto& row : t)
    for (auto& x : row) {
      std::uniform_int_distribution<Units> d(static_cast<Units>(low * static_cast<double>(x)), x);
      x = d(rng);
    }
  return t;
}

/// Random arrangement of up to `max_services` services and its action.
inline VrsspInput random_input(const Infrastructure& infra, const ServiceCatalog& catalog,
                               std::mt19937_64& rng, int max_services, double low = 0.0) {
  VrsspInput in;
  in.action.assign(catalog.size(), 0);
  std::uniform_int_distribution<int> count(1, max_services);
  std::uniform_int_distribution<int> type(0, static_cast<int>(catalog.size()) - 1);
  const int k = count(rng);
  for (int i = 0; i < k; ++i) {
    const int l = type(rng);
    in.arrangement.push_back(l);
    ++in.action[l];
  }
  in.snapshot = random_snapshot(infra, rng, low);
  return in;
}

/// Failure probability by enumerating every up/down pattern of the
/// assigned servers (each assignment fails independently).
inline double enumerated_failure(const std::vector<VnfAssignment>& vnfs,
                                 const Infrastructure& infra) {
  std::vector<double> p;
  std::vector<std::pair<int, int>> slot;  // (vnf, 0 main / 1 backup)
  for (std::size_t u = 0; u < vnfs.size(); ++u) {
    p.push_back(infra.failure_prob(vnfs[u].main));
    slot.emplace_back(static_cast<int>(u), 0);
    if (vnfs[u].backup) {
      p.push_back(infra.failure_prob(*vnfs[u].backup));
      slot.emplace_back(static_cast<int>(u), 1);
    }
  }
  double down = 0.0;
  const std::size_t n = p.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double prob = 1.0;
    std::vector<int> up(vnfs.size(), 0);
    for (std::size_t b = 0; b < n; ++b) {
      const bool failed = (mask >> b) & 1U;
      prob *= failed ? p[b] : 1.0 - p[b];
      if (!failed) up[slot[b].first] = 1;
    }
    bool service_up = true;
    for (int x : up) service_up = service_up && x;
    if (!service_up) down += prob;
  }
  return down;
}

}  // namespace fixtures
