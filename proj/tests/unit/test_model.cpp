#include "doctest.h"

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "relplace/model.hpp"

using namespace relplace;
using fixtures::grouped_links;
using fixtures::uniform_bandwidth;

namespace {

Infrastructure two_servers(double v0, double v1, double alpha = 1.0, double beta = 15.0,
                           double v_base = 0.07) {
  return Infrastructure({{v0, {{100}}}, {v1, {{100}}}}, {alpha}, beta, v_base,
                        grouped_links({1, 1}, 0.0, 0.4), uniform_bandwidth(2, 100),
                        {{3.0}, {3.0}});
}

}  // namespace

TEST_CASE("server unit cost") {
  SUBCASE("exponent vanishes at v_base") {
    const auto infra = two_servers(0.07, 0.01, 0.7);
    CHECK(server_unit_cost(infra, 0, 0) == doctest::Approx(0.7).epsilon(1e-15));
  }
  SUBCASE("cheaper InP is the less reliable one") {
    const auto infra = two_servers(0.07, 0.01);
    // e^{15 * 0.06} computed independently as a power series.
    double series = 0.0, term = 1.0;
    for (int k = 1; k < 40; ++k) {
      series += term;
      term *= 0.9 / k;
    }
    CHECK(server_unit_cost(infra, 1, 0) == doctest::Approx(series).epsilon(1e-12));
    CHECK(server_unit_cost(infra, 1, 0) == doctest::Approx(2.4596031111569497).epsilon(1e-12));
    CHECK(server_unit_cost(infra, 1, 0) > server_unit_cost(infra, 0, 0));
  }
  SUBCASE("downtime calibration endpoints") {
    // Ratios 1 : 1.66 : 5 come from downtimes 18.26 : 10.96 : 3.65 days/yr.
    // One exponential matches the outer pair exactly; the middle point lies
    // between the outer ones.
    const double beta = std::log(5.0) / 0.04;
    const auto infra = Infrastructure({{0.05, {{1}}}, {0.03, {{1}}}, {0.01, {{1}}}}, {1.0}, beta,
                                      0.05, grouped_links({1, 1, 1}, 0.0, 0.1),
                                      uniform_bandwidth(3, 1), {{0.0}, {0.0}, {0.0}});
    const double c0 = server_unit_cost(infra, 0, 0);
    CHECK(c0 == doctest::Approx(1.0));
    CHECK(server_unit_cost(infra, 2, 0) / c0 == doctest::Approx(5.0).epsilon(1e-12));
    const double mid = server_unit_cost(infra, 1, 0) / c0;
    CHECK(mid > 1.66);
    CHECK(mid < 5.0);
  }
  SUBCASE("monotone decreasing in v") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> v(0.0, 0.07);
    for (int i = 0; i < 200; ++i) {
      double a = v(rng), b = v(rng);
      if (a > b) std::swap(a, b);
      const auto infra = two_servers(a, b);
      CHECK(server_unit_cost(infra, 0, 0) >= server_unit_cost(infra, 1, 0));
    }
  }
  SUBCASE("index errors") {
    const auto infra = two_servers(0.05, 0.01);
    CHECK_THROWS_AS(server_unit_cost(infra, 2, 0), std::out_of_range);
    CHECK_THROWS_AS(server_unit_cost(infra, 0, 1), std::out_of_range);
  }
}

TEST_CASE("infrastructure invariants are enforced") {
  CHECK_THROWS_AS(two_servers(0.08, 0.01), std::invalid_argument);  // above v_base
  CHECK_THROWS_AS(two_servers(0.05, 0.01, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(two_servers(0.05, 0.01, 1.0, -1.0), std::invalid_argument);
  Matrix<double> asym = grouped_links({1, 1}, 0.0, 0.4);
  asym[0][1] = 0.5;
  CHECK_THROWS_AS(Infrastructure({{0.05, {{1}}}, {0.01, {{1}}}}, {1.0}, 15.0, 0.07, asym,
                                 uniform_bandwidth(2, 1), {{0.0}, {0.0}}),
                  std::invalid_argument);
  Matrix<double> self = grouped_links({1, 1}, 0.0, 0.4);
  self[1][1] = 0.1;
  CHECK_THROWS_AS(Infrastructure({{0.05, {{1}}}, {0.01, {{1}}}}, {1.0}, 15.0, 0.07, self,
                                 uniform_bandwidth(2, 1), {{0.0}, {0.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Infrastructure({{0.05, {{-1}}}, {0.01, {{1}}}}, {1.0}, 15.0, 0.07,
                                 grouped_links({1, 1}, 0.0, 0.4), uniform_bandwidth(2, 1),
                                 {{0.0}, {0.0}}),
                  std::invalid_argument);
}

TEST_CASE("placement cost") {
  // Server 0 costs 2 per unit, server 1 costs 1 per unit; DC = 3; link 0.4.
  const auto infra = Infrastructure({{0.1, {{100}}}, {0.2, {{100}}}}, {1.0}, std::log(2.0) / 0.1,
                                    0.2, grouped_links({1, 1}, 0.0, 0.4), uniform_bandwidth(2, 100),
                                    {{3.0}, {3.0}});
  SUBCASE("empty plan") {
    const auto c = placement_cost(PlacementPlan{}, infra, {});
    CHECK(c.total == 0.0);
    CHECK(c.server == 0.0);
    CHECK(c.forwarding == 0.0);
    CHECK(c.deployment == 0.0);
  }
  SUBCASE("single main-only VNF") {
    const ServiceCatalog cat{fixtures::make_type({5}, 0.5)};
    const ServicePlacement p{0, {{0, std::nullopt}}};
    const auto c = placement_cost(p, infra, cat);
    CHECK(c.server == doctest::Approx(10.0));
    CHECK(c.deployment == doctest::Approx(3.0));
    CHECK(c.forwarding == 0.0);
    CHECK(c.total == doctest::Approx(13.0));
  }
  SUBCASE("forwarding between consecutive mains") {
    const ServiceCatalog cat{fixtures::make_type({1, 1}, 0.5, 1.0, 1, {0.0, 1.0}, 0.5, 10.0)};
    const ServicePlacement p{0, {{0, std::nullopt}, {1, std::nullopt}}};
    const auto c = placement_cost(p, infra, cat);
    CHECK(c.forwarding == doctest::Approx(4.0));
    CHECK(c.total == doctest::Approx(c.server + c.forwarding + c.deployment));
  }
  SUBCASE("all four main/backup pairs are charged") {
    const ServiceCatalog cat{fixtures::make_type({1, 1}, 0.5, 1.0, 1, {0.0, 1.0}, 0.5, 10.0)};
    const ServicePlacement p{0, {{0, 1}, {1, 0}}};
    // Pairs (0,1), (0,0), (1,1), (1,0): two cross-server links.
    CHECK(placement_cost(p, infra, cat).forwarding == doctest::Approx(8.0));
    CHECK(forwarding_links(p).size() == 2);
  }
  SUBCASE("additive over disjoint plans") {
    const ServiceCatalog cat{fixtures::make_type({2, 3}, 0.5, 1.0, 1, {0.0, 1.0}, 0.5, 7.0)};
    const ServicePlacement a{0, {{0, 1}, {1, std::nullopt}}};
    const ServicePlacement b{0, {{1, std::nullopt}, {0, 1}}};
    const double sum = placement_cost(a, infra, cat).total + placement_cost(b, infra, cat).total;
    CHECK(placement_cost(PlacementPlan{{a, b}}, infra, cat).total == doctest::Approx(sum));
  }
  SUBCASE("dangling server") {
    const ServiceCatalog cat{fixtures::make_type({5}, 0.5)};
    CHECK_THROWS_AS(placement_cost(ServicePlacement{0, {{7, std::nullopt}}}, infra, cat),
                    std::out_of_range);
  }
}

TEST_CASE("service failure probability") {
  const auto infra = Infrastructure(
      {{0.0, {{1}}}, {0.05, {{1}, {1}}}, {0.07, {{1}}}}, {1.0}, 15.0, 0.07,
      grouped_links({1, 2, 1}, 0.0, 0.1), uniform_bandwidth(4, 1), {{0.0}, {0.0}, {0.0}});
  std::vector<VnfAssignment> vnfs{{0, std::nullopt}};
  CHECK(service_failure_probability(vnfs, infra) == 0.0);

  vnfs = {{1, 3}};
  CHECK(service_failure_probability(vnfs, infra) == doctest::Approx(0.0035).epsilon(1e-12));
  CHECK(fixtures::enumerated_failure(vnfs, infra) == doctest::Approx(0.0035).epsilon(1e-12));

  vnfs = {{1, 2}, {2, 1}};
  CHECK(std::abs(service_failure_probability(vnfs, infra) - 0.00499375) < 1e-12);
  CHECK(std::abs(fixtures::enumerated_failure(vnfs, infra) - 0.00499375) < 1e-12);
}

TEST_CASE("closed-form failure matches enumeration on random plans") {
  const auto infra = fixtures::full_scale_infrastructure();
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> server(0, 20), len(1, 4), coin(0, 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<VnfAssignment> vnfs;
    int assigned = 0;
    const int u = len(rng);
    for (int k = 0; k < u && assigned < 8; ++k) {
      VnfAssignment a{server(rng), std::nullopt};
      ++assigned;
      if (coin(rng) && assigned < 8) {
        ServerId b = server(rng);
        if (b != a.main) {
          a.backup = b;
          ++assigned;
        }
      }
      vnfs.push_back(a);
    }
    CHECK(std::abs(service_failure_probability(vnfs, infra) -
                   fixtures::enumerated_failure(vnfs, infra)) <= 1e-12);
  }
}

TEST_CASE("validate_plan") {
  const auto infra = fixtures::tiny_infrastructure(80);
  ServiceCatalog cat{fixtures::make_type({5}, 0.04)};
  const auto ledger = ResourceLedger::full(infra);

  SUBCASE("main equals backup") {
    const PlacementPlan plan{{{0, {{0, 0}}}}};
    const auto v = validate_plan(plan, ledger, infra, cat);
    REQUIRE(!v.empty());
    CHECK(to_string(v.front().constraint) == "H_p");
  }
  SUBCASE("demand above idle") {
    cat = {fixtures::make_type({90}, 0.5)};
    const PlacementPlan plan{{{0, {{0, std::nullopt}}}}};
    const auto v = validate_plan(plan, ledger, infra, cat);
    REQUIRE(v.size() == 1);
    CHECK(v.front().constraint == Constraint::Resource);
    CHECK(v.front().server == 0);
  }
  SUBCASE("reliability threshold") {
    // e = 0.1 * 0.2 = 0.02
    const PlacementPlan plan{{{0, {{0, 1}}}}};
    cat = {fixtures::make_type({5}, 0.03)};
    CHECK(validate_plan(plan, ledger, infra, cat).empty());
    cat = {fixtures::make_type({5}, 0.01)};
    const auto v = validate_plan(plan, ledger, infra, cat);
    REQUIRE(v.size() == 1);
    CHECK(v.front().constraint == Constraint::Reliability);
  }
  SUBCASE("chain length mismatch is a forwarding violation") {
    const PlacementPlan plan{{{0, {{0, std::nullopt}, {1, std::nullopt}}}}};
    const auto v = validate_plan(plan, ledger, infra, cat);
    REQUIRE(!v.empty());
    CHECK(v.front().constraint == Constraint::Forwarding);
  }
  SUBCASE("bandwidth is checked against idle links") {
    cat = {fixtures::make_type({1, 1}, 0.9, 1.0, 1, {0.0, 1.0}, 0.5, 150.0)};
    const PlacementPlan plan{{{0, {{0, std::nullopt}, {1, std::nullopt}}}}};
    const auto v = validate_plan(plan, ledger, infra, cat);
    REQUIRE(v.size() == 1);
    CHECK(to_string(v.front().constraint) == "H_b");
  }
}

TEST_CASE("validated plans apply without negative idle resources") {
  const auto infra = fixtures::full_scale_infrastructure(60);
  const auto cat = fixtures::full_scale_catalog();
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> server(0, 20), type(0, 3), coin(0, 2);
  int applied = 0;
  for (int trial = 0; trial < 300; ++trial) {
    ResourceLedger ledger = ResourceLedger::full(infra);
    ledger.server_idle = fixtures::random_snapshot(infra, rng);
    PlacementPlan plan;
    for (int k = 0; k < 2; ++k) {
      ServicePlacement p{type(rng), {}};
      for (int u = 0; u < cat[p.service_type].num_vnfs(); ++u) {
        VnfAssignment a{server(rng), std::nullopt};
        if (coin(rng) == 0) a.backup = server(rng);
        p.vnfs.push_back(a);
      }
      plan.services.push_back(p);
    }
    bool structural = true;
    for (const auto& v : validate_plan(plan, ledger, infra, cat))
      if (v.constraint != Constraint::Reliability) structural = false;
    if (!structural) continue;
    ++applied;
    CHECK_NOTHROW(apply_usage(ledger, resource_usage(plan, infra, cat)));
    for (const auto& row : ledger.server_idle)
      for (Units x : row) CHECK(x >= 0);
  }
  CHECK(applied > 0);
}

TEST_CASE("catalog validation") {
  const auto infra = fixtures::tiny_infrastructure();
  ServiceCatalog cat{fixtures::make_type({5}, 0.05)};
  CHECK_NOTHROW(validate_catalog(cat, infra));
  cat[0].arrival_pmf = {0.5, 0.4};
  CHECK_THROWS_WITH_AS(validate_catalog(cat, infra), doctest::Contains("sum to 1"),
                       std::invalid_argument);
  cat = {fixtures::make_type({5}, 0.05)};
  cat[0].vnfs.clear();
  CHECK_THROWS_AS(validate_catalog(cat, infra), std::invalid_argument);
  cat = {fixtures::make_type({5}, 0.05)};
  cat[0].penalty = 0.0;
  CHECK_THROWS_AS(validate_catalog(cat, infra), std::invalid_argument);
}

TEST_CASE("ledger apply and release round-trip") {
  const auto infra = fixtures::tiny_infrastructure(10);
  const ServiceCatalog cat{fixtures::make_type({5}, 0.05)};
  ResourceLedger ledger = ResourceLedger::full(infra);
  const auto usage = resource_usage(ServicePlacement{0, {{0, 1}}}, infra, cat);
  apply_usage(ledger, usage);
  CHECK(ledger.server_idle == ServerTable{{5}, {5}});
  apply_usage(ledger, usage);
  CHECK_THROWS_AS(apply_usage(ledger, usage), std::logic_error);
  release_usage(ledger, usage, infra);
  release_usage(ledger, usage, infra);
  CHECK(ledger.server_idle == infra.capacities());
  CHECK_THROWS_AS(release_usage(ledger, usage, infra), std::logic_error);
}
