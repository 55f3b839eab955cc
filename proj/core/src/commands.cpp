#include "relplace/commands.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <sstream>

#include "json.hpp"
#include "relplace/oracle.hpp"

namespace relplace {

namespace {

using nlohmann::json;

ExperimentConfig load(const std::string& path) {
  try {
    return load_config(path);
  } catch (const ConfigError& e) {
    throw CommandError("config", e.what());
  }
}

Policy load_policy(const std::string& path, const ExperimentConfig& config) {
  Policy p;
  try {
    p = parse_policy(read_file(path));
  } catch (const ConfigError& e) {
    throw CommandError("config", e.what());
  } catch (const std::runtime_error& e) {
    throw CommandError("io", e.what());
  }
  if (p.fingerprint != fingerprint(config))
    throw CommandError("fingerprint", "policy fingerprint " + p.fingerprint +
                                          " does not match configuration fingerprint " +
                                          fingerprint(config));
  return p;
}

void write(const std::string& path, const std::string& content) {
  try {
    write_file(path, content);
  } catch (const std::runtime_error& e) {
    throw CommandError("io", e.what());
  }
}

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
}

json plan_json(const PlacementPlan& plan, const Infrastructure& infra) {
  json out = json::array();
  for (const auto& s : plan.services) {
    json vnfs = json::array();
    for (const auto& v : s.vnfs)
      vnfs.push_back({{"main", v.main}, {"backup", v.backup ? json(*v.backup) : json(nullptr)}});
    out.push_back({{"service_type", s.service_type},
                   {"failure_prob", service_failure_probability(s.vnfs, infra)},
                   {"vnfs", vnfs}});
  }
  return out;
}

}  // namespace

Policy solve_policy(const ExperimentConfig& config) {
  const SolverOptions options = solver_options(config);
  const StateSpace space = StateSpace::from_catalog(config.catalog, config.mdp.state_cap);
  const TransitionModel model(space, config.catalog, options.departure_mode);
  ValueIterationSolver solver(space, model, config.infra,
                              vrssp_evaluator(config.infra, config.catalog), options);
  Policy p = solver.solve();
  p.fingerprint = fingerprint(config);
  return p;
}

std::string trace_csv(const Policy& policy) {
  std::ostringstream out;
  out << "iteration,mean_value,residual\n";
  for (std::size_t n = 0; n < policy.mean_value_trace.size(); ++n)
    out << n + 1 << ',' << format_number(policy.mean_value_trace[n]) << ','
        << format_number(policy.residual_trace.at(n)) << '\n';
  return out.str();
}

std::string summary_json(const MetricsReport& r, const ServiceCatalog& catalog) {
  json per_type = json::array();
  for (std::size_t l = 0; l < r.per_type.size(); ++l)
    per_type.push_back({{"name", catalog.at(l).name},
                        {"arrived", r.per_type[l].arrived},
                        {"admitted", r.per_type[l].admitted}});
  json per_length = json::array();
  for (const auto& [len, c] : r.per_chain_length)
    per_length.push_back({{"num_vnfs", len}, {"arrived", c.arrived}, {"admitted", c.admitted}});
  const json out = {{"strategy", r.strategy},
                    {"seed", r.seed},
                    {"slots", r.slots},
                    {"arrived", r.arrived},
                    {"admitted", r.admitted},
                    {"admission_ratio", r.admission_ratio()},
                    {"total_cost", r.total_cost},
                    {"mean_cost", r.mean_cost()},
                    {"backups_per_vnf", r.backups_per_vnf()},
                    {"mean_chain_length", r.mean_chain_length()},
                    {"per_type", per_type},
                    {"per_chain_length", per_length}};
  return out.dump(2) + "\n";
}

std::vector<CompareRow> compare(const ExperimentConfig& config,
                                const std::vector<Strategy>& strategies,
                                const std::vector<std::uint64_t>& seeds, long slots,
                                const Policy* policy, std::vector<MetricsReport>* reports) {
  if (strategies.empty()) throw CommandError("usage", "compare needs at least one strategy");
  if (seeds.empty()) throw CommandError("usage", "compare needs at least one seed");
  for (Strategy s : strategies)
    if (s == Strategy::Mdp && policy == nullptr)
      throw CommandError("usage", "the mdp strategy needs a policy");
  const SimContext ctx{config.infra, config.catalog, policy};

  std::vector<std::future<MetricsReport>> jobs;
  for (Strategy s : strategies) {
    for (std::uint64_t seed : seeds)
      jobs.push_back(std::async(std::launch::async, [&ctx, s, slots, seed] {
        return run_experiment(ctx, s, slots, seed, false);
      }));
  }

  std::vector<CompareRow> rows;
  std::size_t job = 0;
  for (Strategy s : strategies) {
    std::vector<double> ratio, cost, backups, length;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      MetricsReport r = jobs[job++].get();
      ratio.push_back(r.admission_ratio());
      cost.push_back(r.mean_cost());
      backups.push_back(r.backups_per_vnf());
      length.push_back(r.mean_chain_length());
      if (reports) reports->push_back(std::move(r));
    }
    CompareRow row;
    row.strategy = to_string(s);
    row.runs = static_cast<int>(seeds.size());
    mean_std(ratio, row.admission_ratio_mean, row.admission_ratio_std);
    mean_std(cost, row.mean_cost_mean, row.mean_cost_std);
    mean_std(backups, row.backups_per_vnf_mean, row.backups_per_vnf_std);
    double unused;
    mean_std(length, row.chain_length_mean, unused);
    rows.push_back(row);
  }
  return rows;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << "strategy,runs,admission_ratio_mean,admission_ratio_std,mean_cost_mean,mean_cost_std,"
         "backups_per_vnf_mean,backups_per_vnf_std,mean_chain_length\n";
  for (const auto& r : rows)
    out << r.strategy << ',' << r.runs << ',' << format_number(r.admission_ratio_mean) << ','
        << format_number(r.admission_ratio_std) << ',' << format_number(r.mean_cost_mean) << ','
        << format_number(r.mean_cost_std) << ',' << format_number(r.backups_per_vnf_mean) << ','
        << format_number(r.backups_per_vnf_std) << ',' << format_number(r.chain_length_mean)
        << '\n';
  return out.str();
}

std::string chain_length_csv(const std::vector<MetricsReport>& reports) {
  std::vector<std::string> order;
  std::map<std::string, std::map<int, CountPair>> totals;
  for (const auto& r : reports) {
    if (!totals.count(r.strategy)) order.push_back(r.strategy);
    for (const auto& [len, c] : r.per_chain_length) {
      totals[r.strategy][len].arrived += c.arrived;
      totals[r.strategy][len].admitted += c.admitted;
    }
  }
  std::ostringstream out;
  out << "strategy,num_vnfs,arrived,admitted,admission_ratio\n";
  for (const auto& s : order)
    for (const auto& [len, c] : totals[s]) {
      const double ratio = c.arrived == 0 ? 0.0
                                          : static_cast<double>(c.admitted) /
                                                static_cast<double>(c.arrived);
      out << s << ',' << len << ',' << c.arrived << ',' << c.admitted << ','
          << format_number(ratio) << '\n';
    }
  return out.str();
}

void cmd_solve(const std::string& config_path, const std::string& out_path) {
  const ExperimentConfig config = load(config_path);
  Policy p;
  try {
    p = solve_policy(config);
  } catch (const std::invalid_argument& e) {
    throw CommandError("config", e.what());
  }
  write(out_path, serialize_policy(p));
  write(out_path + ".trace.csv", trace_csv(p));
  if (!p.converged)
    throw CommandError("nonconvergence",
                       "value iteration stopped after " + std::to_string(p.iterations) +
                           " iterations with residual " +
                           format_number(p.residual_trace.empty() ? 0.0 : p.residual_trace.back()) +
                           "; trace written to " + out_path + ".trace.csv");
}

void cmd_simulate(const std::string& config_path, const std::optional<std::string>& policy_path,
                  const std::string& strategy, std::optional<long> slots,
                  std::optional<std::uint64_t> seed, const std::string& out_path) {
  const ExperimentConfig config = load(config_path);
  Strategy s;
  try {
    s = strategy_from_string(strategy);
  } catch (const std::invalid_argument& e) {
    throw CommandError("usage", e.what());
  }
  std::optional<Policy> policy;
  if (s == Strategy::Mdp) {
    if (!policy_path) throw CommandError("usage", "strategy mdp requires --policy");
    policy = load_policy(*policy_path, config);
  }
  const SimContext ctx{config.infra, config.catalog, policy ? &*policy : nullptr};
  const long n = slots.value_or(config.sim.slots);
  if (n < 1) throw CommandError("usage", "--slots must be >= 1");
  const MetricsReport report = run_experiment(ctx, s, n, seed.value_or(config.sim.seed));
  std::ostringstream csv;
  write_metrics_csv(report, config.catalog, csv);
  write(out_path, csv.str());
  write(out_path + ".summary.json", summary_json(report, config.catalog));
}

void cmd_compare(const std::string& config_path, const std::vector<std::string>& strategies,
                 const std::vector<std::uint64_t>& seeds, std::optional<long> slots,
                 const std::optional<std::string>& policy_path, const std::string& out_path) {
  const ExperimentConfig config = load(config_path);
  std::vector<Strategy> ids;
  try {
    for (const auto& name : strategies) ids.push_back(strategy_from_string(name));
  } catch (const std::invalid_argument& e) {
    throw CommandError("usage", e.what());
  }
  std::optional<Policy> policy;
  if (std::find(ids.begin(), ids.end(), Strategy::Mdp) != ids.end())
    policy = policy_path ? load_policy(*policy_path, config) : solve_policy(config);
  const long n = slots.value_or(config.sim.slots);
  if (n < 1) throw CommandError("usage", "--slots must be >= 1");
  std::vector<MetricsReport> reports;
  const auto rows = compare(config, ids, seeds, n, policy ? &*policy : nullptr, &reports);
  write(out_path, compare_csv(rows));
  write(out_path + ".by_length.csv", chain_length_csv(reports));
}

std::string cmd_oracle(const std::string& config_path, const std::string& instance_path) {
  const ExperimentConfig config = load(config_path);
  json inst;
  try {
    inst = json::parse(read_file(instance_path));
  } catch (const json::exception& e) {
    throw CommandError("config", std::string("instance parse error: ") + e.what());
  } catch (const std::runtime_error& e) {
    throw CommandError("io", e.what());
  }
  std::vector<int> services;
  ServerTable idle = config.infra.capacities();
  try {
    services = inst.at("services").get<std::vector<int>>();
    if (inst.contains("idle")) idle = inst.at("idle").get<ServerTable>();
  } catch (const json::exception& e) {
    throw CommandError("config", std::string("instance field error: ") + e.what());
  }
  for (int l : services)
    if (l < 0 || static_cast<std::size_t>(l) >= config.catalog.size())
      throw CommandError("config", "instance references unknown service type " + std::to_string(l));

  OracleResult r;
  try {
    r = brute_force_placement(services, idle, config.infra, config.catalog);
  } catch (const std::invalid_argument& e) {
    throw CommandError("bound", e.what());
  }
  json out = {{"feasible", r.feasible()}};
  if (r.reliable_plan) {
    out["cost"] = r.reliable_cost;
    out["plan"] = plan_json(*r.reliable_plan, config.infra);
  } else {
    out["cost"] = nullptr;
    out["plan"] = nullptr;
  }
  out["penalized_objective"] = r.penalized_plan ? json(r.penalized_objective) : json(nullptr);
  return out.dump(2) + "\n";
}

}  // namespace relplace
