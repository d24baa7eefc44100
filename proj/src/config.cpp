#include "shepherd/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace shepherd {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("config: cannot format value");
  return std::string(buf, end);
}

double parse_double(const std::string& key, const std::string& text) {
  double v;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" + text + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  // Accept 1e6-style integers.
  const double v = parse_double(key, text);
  if (v != std::floor(v))
    throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + text + "'");
  return static_cast<long long>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("config: '" + key + "' expects a boolean, got '" + text + "'");
}

struct Field {
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

// Ordered so that to_ini() groups keys by section.
const std::vector<std::pair<std::string, Field>>& registry() {
  static const std::vector<std::pair<std::string, Field>> fields = [] {
    std::vector<std::pair<std::string, Field>> f;
    auto dbl = [&f](std::string key, std::function<double&(ExperimentConfig&)> ref) {
      f.push_back({key,
                   {[ref](const ExperimentConfig& c) {
                      return format_double(ref(const_cast<ExperimentConfig&>(c)));
                    },
                    [ref, key](ExperimentConfig& c, const std::string& v) {
                      ref(c) = parse_double(key, v);
                    }}});
    };
    auto integer = [&f](std::string key, auto ref) {
      f.push_back({key,
                   {[ref](const ExperimentConfig& c) {
                      return std::to_string(ref(const_cast<ExperimentConfig&>(c)));
                    },
                    [ref, key](ExperimentConfig& c, const std::string& v) {
                      auto& slot = ref(c);
                      slot = static_cast<std::remove_reference_t<decltype(slot)>>(parse_int(key, v));
                    }}});
    };

    integer("dx_nodes", [](ExperimentConfig& c) -> int& { return c.physics.n_nodes; });
    dbl("dt", [](ExperimentConfig& c) -> double& { return c.physics.dt; });
    dbl("dt_pde", [](ExperimentConfig& c) -> double& { return c.physics.dt_pde; });
    dbl("T_horizon", [](ExperimentConfig& c) -> double& { return c.physics.T_horizon; });
    integer("N_herders", [](ExperimentConfig& c) -> int& { return c.physics.n_herders; });
    dbl("D", [](ExperimentConfig& c) -> double& { return c.physics.D; });
    dbl("L", [](ExperimentConfig& c) -> double& { return c.physics.L; });
    dbl("kappa", [](ExperimentConfig& c) -> double& { return c.physics.kappa; });
    dbl("v_max", [](ExperimentConfig& c) -> double& { return c.physics.v_max; });
    dbl("M_H", [](ExperimentConfig& c) -> double& { return c.physics.M_H; });
    dbl("M_T", [](ExperimentConfig& c) -> double& { return c.physics.M_T; });
    dbl("alpha", [](ExperimentConfig& c) -> double& { return c.physics.alpha; });
    dbl("kernel_eps", [](ExperimentConfig& c) -> double& { return c.physics.kernel_eps; });
    f.push_back({"flux_scheme",
                 {[](const ExperimentConfig& c) {
                    return std::string(c.physics.scheme == FluxScheme::kCentral ? "central"
                                                                                : "upwind");
                  },
                  [](ExperimentConfig& c, const std::string& v) {
                    if (v == "central")
                      c.physics.scheme = FluxScheme::kCentral;
                    else if (v == "upwind")
                      c.physics.scheme = FluxScheme::kUpwind;
                    else
                      throw std::invalid_argument("config: flux_scheme must be central|upwind");
                  }}});

    integer("env.episode_steps", [](ExperimentConfig& c) -> int& { return c.env.episode_steps; });
    dbl("env.reward_k1", [](ExperimentConfig& c) -> double& { return c.env.reward_k1; });
    dbl("env.reward_k2", [](ExperimentConfig& c) -> double& { return c.env.reward_k2; });
    f.push_back({"env.reward_mode",
                 {[](const ExperimentConfig& c) { return to_string(c.env.reward_mode); },
                  [](ExperimentConfig& c, const std::string& v) {
                    c.env.reward_mode = reward_mode_from_string(v);
                  }}});
    dbl("env.disturbance_vd", [](ExperimentConfig& c) -> double& { return c.env.disturbance_vd; });
    dbl("env.noise_std_Dm", [](ExperimentConfig& c) -> double& { return c.env.noise_std_Dm; });
    dbl("env.gain_K", [](ExperimentConfig& c) -> double& { return c.env.gain_K; });
    integer("env.rng_seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.env.rng_seed; });

    dbl("ppo.discount_gamma", [](ExperimentConfig& c) -> double& { return c.ppo.discount_gamma; });
    dbl("ppo.gae_lambda", [](ExperimentConfig& c) -> double& { return c.ppo.gae_lambda; });
    dbl("ppo.clip_epsilon", [](ExperimentConfig& c) -> double& { return c.ppo.clip_epsilon; });
    dbl("ppo.learning_rate", [](ExperimentConfig& c) -> double& { return c.ppo.learning_rate; });
    integer("ppo.rollout_length", [](ExperimentConfig& c) -> int& { return c.ppo.rollout_length; });
    integer("ppo.minibatch_size", [](ExperimentConfig& c) -> int& { return c.ppo.minibatch_size; });
    integer("ppo.epochs_per_update",
            [](ExperimentConfig& c) -> int& { return c.ppo.epochs_per_update; });
    dbl("ppo.value_coef", [](ExperimentConfig& c) -> double& { return c.ppo.value_coef; });
    dbl("ppo.entropy_coef", [](ExperimentConfig& c) -> double& { return c.ppo.entropy_coef; });
    integer("ppo.total_env_steps",
            [](ExperimentConfig& c) -> long long& { return c.ppo.total_env_steps; });
    dbl("ppo.max_grad_norm", [](ExperimentConfig& c) -> double& { return c.ppo.max_grad_norm; });
    integer("ppo.n_envs", [](ExperimentConfig& c) -> int& { return c.ppo.n_envs; });
    f.push_back({"ppo.anneal_lr",
                 {[](const ExperimentConfig& c) {
                    return std::string(c.ppo.anneal_lr ? "true" : "false");
                  },
                  [](ExperimentConfig& c, const std::string& v) {
                    c.ppo.anneal_lr = parse_bool("ppo.anneal_lr", v);
                  }}});
    dbl("ppo.adam_eps", [](ExperimentConfig& c) -> double& { return c.ppo.adam_eps; });
    integer("ppo.checkpoint_every",
            [](ExperimentConfig& c) -> int& { return c.ppo.checkpoint_every; });
    integer("ppo.seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.ppo.seed; });
    integer("ppo.hidden_layers", [](ExperimentConfig& c) -> int& { return c.hidden_layers; });
    integer("ppo.hidden_width", [](ExperimentConfig& c) -> int& { return c.hidden_width; });
    dbl("ppo.log_std_init", [](ExperimentConfig& c) -> double& { return c.log_std_init; });

    integer("eval.n_runs", [](ExperimentConfig& c) -> int& { return c.eval.n_runs; });
    integer("eval.base_seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.eval.base_seed; });
    dbl("eval.switch_time", [](ExperimentConfig& c) -> double& { return c.eval.switch_time; });
    integer("eval.sweep_points", [](ExperimentConfig& c) -> int& { return c.eval.sweep_points; });
    dbl("eval.vd_max", [](ExperimentConfig& c) -> double& { return c.eval.vd_max; });
    dbl("eval.Dm_max", [](ExperimentConfig& c) -> double& { return c.eval.Dm_max; });
    integer("eval.noise_runs", [](ExperimentConfig& c) -> int& { return c.eval.noise_runs; });
    dbl("eval.oracle_horizon", [](ExperimentConfig& c) -> double& { return c.eval.oracle_horizon; });
    integer("eval.oracle_particles",
            [](ExperimentConfig& c) -> int& { return c.eval.oracle_particles; });
    dbl("eval.oracle_match_time",
        [](ExperimentConfig& c) -> double& { return c.eval.oracle_match_time; });
    integer("eval.threads", [](ExperimentConfig& c) -> int& { return c.eval.threads; });
    return f;
  }();
  return fields;
}

const Field& lookup(const std::string& key) {
  for (const auto& [name, field] : registry())
    if (name == key) return field;
  throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

ppo::NetworkSpec ExperimentConfig::network_spec() const {
  ppo::NetworkSpec spec;
  spec.observation_dim = 2 * physics.n_herders;
  spec.action_dim = physics.n_herders;
  spec.hidden.assign(hidden_layers, hidden_width);
  spec.action_bound = physics.v_max;
  spec.log_std_init = log_std_init;
  return spec;
}

void ExperimentConfig::validate() const {
  physics.validate();
  env.validate();
  ppo.validate();
  if (hidden_layers < 0 || hidden_width < 1)
    throw std::invalid_argument("config: invalid hidden layer sizes");
  if (eval.n_runs < 1 || eval.sweep_points < 1 || eval.noise_runs < 1)
    throw std::invalid_argument("config: eval counts must be positive");
}

void set_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  lookup(key).set(cfg, trim(value));
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("config: override '" + assignment + "' is not key=value");
  set_value(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      set_value(cfg, name, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) set_value(cfg, name + "." + key, leaf.data());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_ini(const ExperimentConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, field] : registry()) {
    const auto dot = key.find('.');
    const std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    if (sec != section) {
      out << "\n[" << sec << "]\n";
      section = sec;
    }
    out << name << " = " << field.get(cfg) << '\n';
  }
  return out.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : to_ini(cfg)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

}  // namespace shepherd
