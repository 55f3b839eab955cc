#include "doctest.h"

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "relplace/trellis.hpp"

using namespace relplace;

namespace {

VrsspInput single(const Infrastructure& infra, int type = 0, std::size_t types = 1) {
  VrsspInput in;
  in.action.assign(types, 0);
  in.action[type] = 1;
  in.arrangement = {type};
  in.snapshot = infra.capacities();
  return in;
}

double fail_prob(const Infrastructure& infra, StateId x) {
  return x == kNoServer ? 1.0 : infra.failure_prob(server_of_state(x));
}

/// Path cost recomputed from scratch: every assigned server pays demand and
/// deployment; each VNF after the first pays b per link from the previous
/// VNF's main and backup.
double replay_cost(const Trellis& t, const std::vector<StateId>& path,
                   const Infrastructure& infra, const ServiceCatalog& catalog) {
  double cost = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const int m = static_cast<int>(i) + 1;
    const auto& info = t.stage_info(m);
    const auto& type = catalog[info.service_type];
    const StateId x = path[i];
    if (x == kNoServer) continue;
    const ServerId s = server_of_state(x);
    const auto& vnf = type.vnfs[info.vnf];
    cost += static_cast<double>(vnf.demands[0]) * server_unit_cost(infra, infra.inp_of(s), 0) +
            infra.deployment_cost(infra.inp_of(s), vnf.vnf_type);
    if (info.vnf > 0) {
      // Previous VNF's main and backup sit at stages m-2/m-1 (main) or m-3/m-2 (backup).
      const std::size_t prev_main = info.backup ? i - 3 : i - 2;
      for (std::size_t p : {prev_main, prev_main + 1}) {
        if (path[p] == kNoServer) continue;
        cost += type.bandwidth * infra.link_cost(server_of_state(path[p]), s);
      }
    }
  }
  return cost;
}

double replay_reliability(const Trellis& t, const std::vector<StateId>& path,
                          const Infrastructure& infra) {
  const int m = static_cast<int>(path.size());
  const auto& last = t.stage_info(m);
  double tau = 1.0;
  // Walk back to the first stage of the current service.
  int first = m;
  while (first > 1 && t.stage_info(first - 1).service == last.service) --first;
  for (int s = first; s <= m; s += 2) {
    const double vm = fail_prob(infra, path[s - 1]);
    if (s + 1 <= m)
      tau *= 1.0 - vm * fail_prob(infra, path[s]);
    else
      tau *= 1.0 - vm;
  }
  return tau;
}

}  // namespace

TEST_CASE("stage count and states") {
  const auto infra = fixtures::full_scale_infrastructure();
  const auto cat = fixtures::full_scale_catalog();
  CHECK(stage_count(VrsspInput{{0, 0, 0, 0}, {}, infra.capacities()}, cat) == 0);
  ServiceCatalog two{fixtures::make_type({1, 1, 1}, 0.5), fixtures::make_type({1, 1, 1, 1, 1}, 0.5)};
  CHECK(stage_count(VrsspInput{{1, 1}, {0, 1}, {}}, two) == 16);
  ServiceCatalog four{fixtures::make_type({1, 1, 1, 1}, 0.5)};
  CHECK(stage_count(VrsspInput{{1}, {0}, {}}, four) == 8);

  CHECK(stage_states(1, infra).size() == 21);
  CHECK(stage_states(2, infra).size() == 22);
  CHECK(stage_states(2, infra).front() == kNoServer);

  const Infrastructure one({{0.05, {{10}}}}, {1.0}, 15.0, 0.07, {{0.0}}, {{0}}, {{0.0}});
  CHECK(stage_states(2, one) == std::vector<StateId>{kNoServer, state_of_server(0)});
  CHECK(stage_states(1, one) == std::vector<StateId>{state_of_server(0)});
}

TEST_CASE("transition reliability cases") {
  const auto infra = fixtures::tiny_infrastructure();  // v = 0.1, 0.2
  const auto cat = fixtures::tiny_catalog();
  Trellis t(infra, cat, single(infra));
  REQUIRE(t.run());
  // Stage 1 survivor 0 is server 0 (v = 0.1).
  CHECK(t.transition_reliability(1, 0, state_of_server(0)) == doctest::Approx(0.9));
  CHECK(t.stage(1)[0].reliability == doctest::Approx(0.9));
  CHECK(t.transition_reliability(2, 0, state_of_server(1)) == doctest::Approx(0.98));
  CHECK(t.transition_reliability(2, 0, kNoServer) == doctest::Approx(0.9));

  SUBCASE("later VNF replaces the main-only factor") {
    const ServiceCatalog cat2{fixtures::make_type({1, 1}, 0.5)};
    Trellis t2(infra, cat2, single(infra));
    REQUIRE(t2.run());
    // Stage 4 (backup of VNF 2) from each stage-3 survivor.
    for (int p = 0; p < static_cast<int>(t2.stage(3).size()); ++p) {
      const auto& node = t2.stage(3)[p];
      const double tau = node.reliability;
      const double vm = fail_prob(infra, node.id);
      const StateId other = node.id == state_of_server(0) ? state_of_server(1) : state_of_server(0);
      const double expected = tau * (1.0 - vm * fail_prob(infra, other)) / (1.0 - vm);
      CHECK(t2.transition_reliability(4, p, other) == doctest::Approx(expected).epsilon(1e-14));
    }
  }
}

TEST_CASE("transition cost terms") {
  // Server 0: 2 per unit, DC 3; server 1: 1 per unit, DC 3.
  const Infrastructure infra({{0.1, {{10}}}, {0.2, {{10}}}}, {1.0}, std::log(2.0) / 0.1, 0.2,
                             fixtures::grouped_links({1, 1}, 0.0, 1.0),
                             fixtures::uniform_bandwidth(2, 10), {{3.0}, {3.0}});
  SUBCASE("first stage, reliable enough") {
    const ServiceCatalog cat{fixtures::make_type({5}, 0.5)};
    Trellis t(infra, cat, single(infra));
    const auto tc = t.transition_cost(1, 0, state_of_server(0));
    CHECK(tc.server == doctest::Approx(10.0));
    CHECK(tc.deployment == doctest::Approx(3.0));
    CHECK(tc.reliability_penalty == 0.0);
    CHECK(tc.theta() == doctest::Approx(13.0));
  }
  SUBCASE("hinge penalty on a shortfall") {
    const ServiceCatalog cat{fixtures::make_type({5}, 0.05)};
    Trellis t(infra, cat, single(infra));
    const auto tc = t.transition_cost(1, 0, state_of_server(0));
    // T = 0.90, objective 0.95.
    CHECK(tc.reliability_penalty == doctest::Approx(5e4));
  }
  SUBCASE("no-server state costs nothing but the carried path") {
    const ServiceCatalog cat{fixtures::make_type({5}, 0.05)};
    Trellis t(infra, cat, single(infra));
    REQUIRE(t.run());
    const auto tc = t.transition_cost(2, 0, kNoServer);
    CHECK(tc.server == 0.0);
    CHECK(tc.deployment == 0.0);
    CHECK(tc.routing == 0.0);
    CHECK(tc.path_cost == doctest::Approx(t.stage(1)[0].cost));
    // Objective 1 for the empty backup: 1e6 * (1 - 0.9).
    CHECK(tc.reliability_penalty == doctest::Approx(1e5));
  }
}

TEST_CASE("tiny two-InP instance") {
  const auto infra = fixtures::tiny_infrastructure();
  const auto cat = fixtures::tiny_catalog();
  const auto out = run_vrssp(single(infra), cat, infra);
  REQUIRE(out.valid);
  REQUIRE(out.services.size() == 1);
  const auto& s = out.services[0];
  CHECK(s.cost == doctest::Approx(15.0));
  CHECK(s.failure_prob == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(s.usage == ServerTable{{5}, {5}});
  const auto& v = s.placement.vnfs.at(0);
  REQUIRE(v.backup.has_value());
  CHECK(v.main != *v.backup);
  CHECK(placement_cost(s.placement, infra, cat).total == doctest::Approx(s.cost));
}

TEST_CASE("infeasible main gives an invalid result") {
  const auto infra = fixtures::tiny_infrastructure(4);
  const auto cat = fixtures::tiny_catalog();
  const auto out = run_vrssp(single(infra), cat, infra);
  CHECK_FALSE(out.valid);
  CHECK(out.failed_service == 0);
  CHECK(out.services.empty());
}

TEST_CASE("empty action") {
  const auto infra = fixtures::tiny_infrastructure();
  const auto cat = fixtures::tiny_catalog();
  const auto out = run_vrssp(VrsspInput{{0}, {}, infra.capacities()}, cat, infra);
  CHECK(out.valid);
  CHECK(out.services.empty());
}

TEST_CASE("input validation") {
  const auto infra = fixtures::tiny_infrastructure();
  const auto cat = fixtures::tiny_catalog();
  CHECK_THROWS_AS(run_vrssp(VrsspInput{{2}, {0}, infra.capacities()}, cat, infra),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_vrssp(VrsspInput{{1}, {0}, {{11}, {10}}}, cat, infra),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_vrssp(VrsspInput{{1}, {1}, infra.capacities()}, cat, infra),
                  std::invalid_argument);
}

TEST_CASE("only a backup-less state survives when no second server fits") {
  // Both VNF copies cannot fit: server 1 is full.
  const auto infra = fixtures::tiny_infrastructure();
  const auto cat = fixtures::tiny_catalog();
  auto in = single(infra);
  in.snapshot = {{10}, {0}};
  const auto out = run_vrssp(in, cat, infra);
  REQUIRE(out.valid);
  CHECK(out.services[0].placement.vnfs[0].main == 0);
  CHECK_FALSE(out.services[0].placement.vnfs[0].backup.has_value());
  CHECK(out.services[0].failure_prob == doctest::Approx(0.1));
}

TEST_CASE("path and resource replay on random inputs") {
  const auto infra = fixtures::full_scale_infrastructure();
  const auto cat = fixtures::full_scale_catalog();
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    const auto in = fixtures::random_input(infra, cat, rng, 3, 0.3);
    Trellis t(infra, cat, in);
    t.run();
    for (int m = 1; m <= t.completed_stages(); ++m) {
      for (int i = 0; i < static_cast<int>(t.stage(m).size()); ++i) {
        const auto& node = t.stage(m)[i];
        const auto path = t.path(m, i);
        CHECK(std::abs(node.cost - replay_cost(t, path, infra, cat)) <= 1e-9);
        CHECK(std::abs(node.reliability - replay_reliability(t, path, infra)) <= 1e-12);

        std::vector<Units> remaining;
        for (const auto& row : in.snapshot) remaining.insert(remaining.end(), row.begin(), row.end());
        for (int s = 1; s <= m; ++s) {
          if (path[s - 1] == kNoServer) continue;
          const auto& info = t.stage_info(s);
          remaining[static_cast<std::size_t>(server_of_state(path[s - 1]))] -=
              cat[info.service_type].vnfs[info.vnf].demands[0];
        }
        CHECK(remaining == node.remaining);
      }
    }
  }
}

TEST_CASE("outputs agree with the model on random inputs") {
  const auto infra = fixtures::full_scale_infrastructure();
  const auto cat = fixtures::full_scale_catalog();
  std::mt19937_64 rng(43);
  int valid = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto in = fixtures::random_input(infra, cat, rng, 4, 0.2);
    const auto out = run_vrssp(in, cat, infra);
    if (!out.valid) {
      CHECK(out.services.empty());
      continue;
    }
    ++valid;
    ResourceUsage total = ResourceUsage::zero(infra);
    for (const auto& s : out.services) {
      for (const auto& v : s.placement.vnfs)
        if (v.backup) CHECK(*v.backup != v.main);
      CHECK(std::abs(placement_cost(s.placement, infra, cat).total - s.cost) <= 1e-9);
      CHECK(std::abs(service_failure_probability(s.placement.vnfs, infra) - s.failure_prob) <=
            1e-12);
      CHECK(resource_usage(s.placement, infra, cat).server == s.usage);
      total += resource_usage(s.placement, infra, cat);
    }
    for (std::size_t srv = 0; srv < infra.num_servers(); ++srv)
      CHECK(total.server[srv][0] <= in.snapshot[srv][0]);
  }
  CHECK(valid > 0);
}

TEST_CASE("deterministic") {
  const auto infra = fixtures::full_scale_infrastructure();
  const auto cat = fixtures::full_scale_catalog();
  std::mt19937_64 rng(47);
  const auto in = fixtures::random_input(infra, cat, rng, 5);
  const auto a = run_vrssp(in, cat, infra);
  const auto b = run_vrssp(in, cat, infra);
  REQUIRE(a.services.size() == b.services.size());
  for (std::size_t k = 0; k < a.services.size(); ++k) {
    CHECK(a.services[k].cost == b.services[k].cost);
    CHECK(a.services[k].usage == b.services[k].usage);
  }
}
