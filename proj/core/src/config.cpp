#include "relplace/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace relplace {

namespace {

using nlohmann::json;

constexpr int kPolicyVersion = 1;
constexpr Units kDefaultBandwidth = 1'000'000;

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw ConfigError("field '" + path + "' must be an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing required field '" + path + "." + key + "'");
  return *it;
}

template <typename T>
T get(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("field '" + path + "' has the wrong type: " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* key, const std::string& path) {
  return get<T>(require(j, key, path), path + "." + key);
}

template <typename T>
T field_or(const json& j, const char* key, const std::string& path, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  return get<T>(*it, path + "." + key);
}

/// Either a full |S| x |S| matrix or {"intra_inp": x, "inter_inp": y}.
template <typename T>
Matrix<T> server_matrix(const json& j, const std::string& path,
                        const std::vector<int>& server_inp) {
  const std::size_t n = server_inp.size();
  if (j.is_array()) {
    auto m = get<Matrix<T>>(j, path);
    if (m.size() != n) throw ConfigError("field '" + path + "' must have one row per server");
    for (const auto& row : m)
      if (row.size() != n) throw ConfigError("field '" + path + "' must be square");
    return m;
  }
  const T intra = field<T>(j, "intra_inp", path);
  const T inter = field<T>(j, "inter_inp", path);
  Matrix<T> m(n, std::vector<T>(n, T{}));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b) m[a][b] = server_inp[a] == server_inp[b] ? intra : inter;
  return m;
}

ServiceCatalog parse_catalog(const json& arr) {
  if (!arr.is_array() || arr.empty())
    throw ConfigError("field 'service_types' must be a non-empty array");
  ServiceCatalog catalog;
  for (std::size_t l = 0; l < arr.size(); ++l) {
    const std::string path = "service_types[" + std::to_string(l) + "]";
    const json& t = arr[l];
    ServiceType type;
    type.name = field_or<std::string>(t, "name", path, "type" + std::to_string(l));
    type.failure_cap = field<double>(t, "failure_cap", path);
    type.departure_prob = field<double>(t, "departure_prob", path);
    type.bandwidth = field<double>(t, "bandwidth", path);
    type.admission_reward = field<double>(t, "admission_reward", path);
    type.penalty = field_or<double>(t, "penalty", path, 1e6);
    type.sigma_max = field_or<int>(t, "sigma_max", path, 0);
    type.arrival_pmf = field<std::vector<double>>(t, "arrival_pmf", path);
    const json& vnfs = require(t, "vnfs", path);
    if (!vnfs.is_array()) throw ConfigError("field '" + path + ".vnfs' must be an array");
    for (std::size_t u = 0; u < vnfs.size(); ++u) {
      const std::string vpath = path + ".vnfs[" + std::to_string(u) + "]";
      VnfSpec v;
      v.vnf_type = field<int>(vnfs[u], "type", vpath);
      v.demands = field<ResourceVector>(vnfs[u], "demands", vpath);
      type.vnfs.push_back(std::move(v));
    }
    catalog.push_back(std::move(type));
  }
  return catalog;
}

Infrastructure parse_infrastructure(const json& j, const ServiceCatalog& catalog) {
  const std::string path = "infrastructure";
  const auto alpha = field<std::vector<double>>(j, "alpha", path);
  const auto beta = field<double>(j, "beta", path);
  const auto v_base = field<double>(j, "v_base", path);

  const json& inps_json = require(j, "inps", path);
  if (!inps_json.is_array() || inps_json.empty())
    throw ConfigError("field 'infrastructure.inps' must be a non-empty array");
  std::vector<InpSpec> inps;
  std::vector<int> server_inp;
  for (std::size_t i = 0; i < inps_json.size(); ++i) {
    const std::string ipath = path + ".inps[" + std::to_string(i) + "]";
    InpSpec inp;
    inp.failure_prob = field<double>(inps_json[i], "failure_prob", ipath);
    inp.servers = field<std::vector<ResourceVector>>(inps_json[i], "servers", ipath);
    for (std::size_t s = 0; s < inp.servers.size(); ++s) server_inp.push_back(static_cast<int>(i));
    inps.push_back(std::move(inp));
  }

  auto link_cost = server_matrix<double>(require(j, "link_cost", path), path + ".link_cost",
                                         server_inp);
  Matrix<Units> link_bw;
  if (j.contains("link_bandwidth")) {
    link_bw = server_matrix<Units>(j.at("link_bandwidth"), path + ".link_bandwidth", server_inp);
  } else {
    link_bw.assign(server_inp.size(), std::vector<Units>(server_inp.size(), kDefaultBandwidth));
    for (std::size_t s = 0; s < server_inp.size(); ++s) link_bw[s][s] = 0;
  }

  const json& dc = require(j, "deployment_cost", path);
  Matrix<double> deployment;
  if (dc.is_number()) {
    int types = 0;
    for (const auto& t : catalog)
      for (const auto& v : t.vnfs) types = std::max(types, v.vnf_type + 1);
    types = field_or<int>(j, "num_vnf_types", path, types);
    deployment.assign(inps.size(), std::vector<double>(static_cast<std::size_t>(types),
                                                       get<double>(dc, path + ".deployment_cost")));
  } else {
    deployment = get<Matrix<double>>(dc, path + ".deployment_cost");
  }

  try {
    return Infrastructure(std::move(inps), alpha, beta, v_base, std::move(link_cost),
                          std::move(link_bw), std::move(deployment));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("semantic error in infrastructure: ") + e.what());
  }
}

const char* mode_name(DepartureMode m) {
  return m == DepartureMode::Binomial ? "binomial" : "unnormalized";
}

json infrastructure_json(const Infrastructure& infra) {
  json inps = json::array();
  for (const auto& inp : infra.inps())
    inps.push_back({{"failure_prob", inp.failure_prob}, {"servers", inp.servers}});
  return {{"alpha", infra.alpha()},
          {"beta", infra.beta()},
          {"v_base", infra.v_base()},
          {"inps", inps},
          {"link_cost", infra.link_cost_table()},
          {"link_bandwidth", infra.link_bandwidth_table()},
          {"deployment_cost", infra.deployment_cost_table()}};
}

json catalog_json(const ServiceCatalog& catalog) {
  json out = json::array();
  for (const auto& t : catalog) {
    json vnfs = json::array();
    for (const auto& v : t.vnfs) vnfs.push_back({{"type", v.vnf_type}, {"demands", v.demands}});
    out.push_back({{"name", t.name},
                   {"failure_cap", t.failure_cap},
                   {"departure_prob", t.departure_prob},
                   {"bandwidth", t.bandwidth},
                   {"admission_reward", t.admission_reward},
                   {"penalty", t.penalty},
                   {"sigma_max", t.sigma_max},
                   {"arrival_pmf", t.arrival_pmf},
                   {"vnfs", vnfs}});
  }
  return out;
}

json config_json(const ExperimentConfig& c) {
  json out = {{"infrastructure", infrastructure_json(c.infra)},
              {"service_types", catalog_json(c.catalog)},
              {"mdp",
               {{"gamma", c.mdp.gamma},
                {"epsilon", c.mdp.epsilon},
                {"num_arrangements", c.mdp.num_arrangements},
                {"alpha_init", c.mdp.alpha_init},
                {"discount_D", c.mdp.discount},
                {"departure_mode", mode_name(c.mdp.departure_mode)},
                {"max_iterations", c.mdp.max_iterations},
                {"state_cap", c.mdp.state_cap}}},
              {"sim", {{"slots", c.sim.slots}, {"seed", c.sim.seed}}}};
  if (!c.output_dir.empty()) out["output_dir"] = c.output_dir;
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("configuration root must be an object");

  ServiceCatalog catalog = parse_catalog(require(j, "service_types", "$"));
  Infrastructure infra = parse_infrastructure(require(j, "infrastructure", "$"), catalog);

  MdpConfig mdp;
  const json mj = j.value("mdp", json::object());
  mdp.gamma = field_or(mj, "gamma", "mdp", mdp.gamma);
  mdp.epsilon = field_or(mj, "epsilon", "mdp", mdp.epsilon);
  mdp.num_arrangements = field_or(mj, "num_arrangements", "mdp", mdp.num_arrangements);
  mdp.alpha_init = field_or(mj, "alpha_init", "mdp", mdp.alpha_init);
  mdp.discount = field_or(mj, "discount_D", "mdp", mdp.discount);
  mdp.max_iterations = field_or(mj, "max_iterations", "mdp", mdp.max_iterations);
  mdp.state_cap = field_or(mj, "state_cap", "mdp", mdp.state_cap);
  const auto mode = field_or<std::string>(mj, "departure_mode", "mdp", "binomial");
  if (mode == "binomial")
    mdp.departure_mode = DepartureMode::Binomial;
  else if (mode == "unnormalized")
    mdp.departure_mode = DepartureMode::Unnormalized;
  else
    throw ConfigError("field 'mdp.departure_mode' must be 'binomial' or 'unnormalized'");
  if (mj.contains("sigma_max")) {
    const auto sigma = get<std::vector<int>>(mj.at("sigma_max"), "mdp.sigma_max");
    if (sigma.size() != catalog.size())
      throw ConfigError("field 'mdp.sigma_max' needs one entry per service type");
    for (std::size_t l = 0; l < sigma.size(); ++l) catalog[l].sigma_max = sigma[l];
  }
  if (!(mdp.gamma > 0.0 && mdp.gamma < 1.0)) throw ConfigError("mdp.gamma must lie in (0, 1)");
  if (mdp.num_arrangements < 1) throw ConfigError("mdp.num_arrangements must be >= 1");
  if (!(mdp.alpha_init > 0.0 && mdp.alpha_init <= 1.0))
    throw ConfigError("mdp.alpha_init must lie in (0, 1]");
  if (!(mdp.discount > 0.0 && mdp.discount <= 1.0))
    throw ConfigError("mdp.discount_D must lie in (0, 1]");
  if (mdp.max_iterations < 2) throw ConfigError("mdp.max_iterations must be >= 2");

  SimConfig sim;
  const json sj = j.value("sim", json::object());
  sim.slots = field_or(sj, "slots", "sim", sim.slots);
  sim.seed = field_or(sj, "seed", "sim", sim.seed);
  if (sim.slots < 1) throw ConfigError("sim.slots must be >= 1");

  try {
    validate_catalog(catalog, infra);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("semantic error in service_types: ") + e.what());
  }
  try {
    (void)StateSpace::from_catalog(catalog, mdp.state_cap);
  } catch (const std::length_error& e) {
    throw ConfigError(std::string("state space too large: ") + e.what());
  }

  ExperimentConfig config{std::move(infra), std::move(catalog), mdp, sim, {}};
  config.output_dir = field_or<std::string>(j, "output_dir", "$", "");
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

std::string serialize_config(const ExperimentConfig& config) {
  return config_json(config).dump(2) + "\n";
}

std::string fingerprint(const ExperimentConfig& config) {
  const json world = {{"infrastructure", infrastructure_json(config.infra)},
                      {"service_types", catalog_json(config.catalog)}};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(world.dump())));
  return buf;
}

SolverOptions solver_options(const ExperimentConfig& config) {
  SolverOptions o;
  o.gamma = config.mdp.gamma;
  o.epsilon = config.mdp.epsilon > 0.0 ? config.mdp.epsilon : default_epsilon(config.catalog);
  o.num_arrangements = config.mdp.num_arrangements;
  o.alpha_init = config.mdp.alpha_init;
  o.discount = config.mdp.discount;
  o.max_iterations = config.mdp.max_iterations;
  o.departure_mode = config.mdp.departure_mode;
  o.seed = config.sim.seed;
  return o;
}

std::string serialize_policy(const Policy& p) {
  json entries = json::array();
  for (const auto& e : p.entries) entries.push_back({e.action, e.arrangement, e.value});
  const json out = {{"format", "relplace-policy"},
                    {"version", kPolicyVersion},
                    {"fingerprint", p.fingerprint},
                    {"gamma", p.gamma},
                    {"epsilon", p.epsilon},
                    {"seed", p.seed},
                    {"iterations", p.iterations},
                    {"converged", p.converged},
                    {"sigma_max", p.sigma_max},
                    {"lambda_max", p.lambda_max},
                    {"mean_value_trace", p.mean_value_trace},
                    {"residual_trace", p.residual_trace},
                    {"entries", entries}};
  return out.dump() + "\n";
}

Policy parse_policy(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("policy parse error: ") + e.what());
  }
  if (j.value("format", "") != "relplace-policy")
    throw ConfigError("not a policy artifact (format field missing or wrong)");
  if (j.value("version", 0) != kPolicyVersion)
    throw ConfigError("unsupported policy version " + j.value("version", json()).dump());
  Policy p;
  p.fingerprint = field<std::string>(j, "fingerprint", "policy");
  p.gamma = field<double>(j, "gamma", "policy");
  p.epsilon = field<double>(j, "epsilon", "policy");
  p.seed = field<std::uint64_t>(j, "seed", "policy");
  p.iterations = field<int>(j, "iterations", "policy");
  p.converged = field<bool>(j, "converged", "policy");
  p.sigma_max = field<std::vector<int>>(j, "sigma_max", "policy");
  p.lambda_max = field<std::vector<int>>(j, "lambda_max", "policy");
  p.mean_value_trace = field<std::vector<double>>(j, "mean_value_trace", "policy");
  p.residual_trace = field<std::vector<double>>(j, "residual_trace", "policy");
  const json& entries = require(j, "entries", "policy");
  for (const auto& e : entries) {
    if (!e.is_array() || e.size() != 3) throw ConfigError("policy entry must be [action, arrangement, value]");
    p.entries.push_back({get<Action>(e[0], "policy.entries"), get<Arrangement>(e[1], "policy.entries"),
                         get<double>(e[2], "policy.entries")});
  }
  std::size_t expected = 1;
  for (std::size_t l = 0; l < p.sigma_max.size(); ++l)
    expected *= static_cast<std::size_t>(p.sigma_max[l] + 1) *
                static_cast<std::size_t>(p.lambda_max.at(l) + 1);
  if (p.entries.size() != expected) throw ConfigError("policy entry count does not match its state space");
  return p;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace relplace
