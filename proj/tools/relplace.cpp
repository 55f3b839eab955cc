#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "relplace/commands.hpp"

namespace {

int fail(const std::string& code, const std::string& message) {
  std::cerr << nlohmann::json{{"error", code}, {"message", message}}.dump() << '\n';
  return code == "usage" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reliability-aware service placement: solve, simulate, compare, oracle"};
  app.require_subcommand(1);

  std::string config, out, policy_path, strategy, instance;
  long slots = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> strategies;
  std::vector<std::uint64_t> seeds;

  auto* solve = app.add_subcommand("solve", "Run value iteration and write the policy");
  solve->add_option("--config", config, "Experiment config (JSON)")->required();
  solve->add_option("--out", out, "Policy output path")->required();

  auto* simulate = app.add_subcommand("simulate", "Run the slotted simulator");
  simulate->add_option("--config", config)->required();
  auto* policy_opt = simulate->add_option("--policy", policy_path, "Policy artifact (mdp only)");
  simulate->add_option("--strategy", strategy, "mdp, vrssp, min_resource, min_reliability, cera, redundant_vnf")
      ->required();
  auto* slots_opt = simulate->add_option("--slots", slots);
  auto* seed_opt = simulate->add_option("--seed", seed);
  simulate->add_option("--out", out, "Per-slot CSV path")->required();

  auto* cmp = app.add_subcommand("compare", "Run several strategies over several seeds");
  cmp->add_option("--config", config)->required();
  cmp->add_option("--strategies", strategies)->required()->delimiter(',');
  cmp->add_option("--seeds", seeds)->required()->delimiter(',');
  auto* cmp_slots = cmp->add_option("--slots", slots);
  auto* cmp_policy = cmp->add_option("--policy", policy_path);
  cmp->add_option("--out", out)->required();

  auto* oracle = app.add_subcommand("oracle", "Exhaustive placement optimum of a tiny instance");
  oracle->add_option("--config", config)->required();
  oracle->add_option("--instance", instance)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (*solve) {
      relplace::cmd_solve(config, out);
    } else if (*simulate) {
      relplace::cmd_simulate(config,
                             *policy_opt ? std::optional<std::string>(policy_path) : std::nullopt,
                             strategy, *slots_opt ? std::optional<long>(slots) : std::nullopt,
                             *seed_opt ? std::optional<std::uint64_t>(seed) : std::nullopt, out);
    } else if (*cmp) {
      relplace::cmd_compare(config, strategies, seeds,
                            *cmp_slots ? std::optional<long>(slots) : std::nullopt,
                            *cmp_policy ? std::optional<std::string>(policy_path) : std::nullopt,
                            out);
    } else if (*oracle) {
      std::cout << relplace::cmd_oracle(config, instance);
    }
  } catch (const relplace::CommandError& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
