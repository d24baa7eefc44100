#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "shepherd/experiments.hpp"
#include "shepherd/interaction.hpp"
#include "shepherd/ppo/checkpoint.hpp"

namespace py = pybind11;
using namespace shepherd;

namespace {

std::vector<double> values(const DensityField& d) { return {d.values().begin(), d.values().end()}; }

py::dict record_dict(const RunRecord& r) {
  py::dict d;
  d["seed"] = r.seed;
  d["disturbance_vd"] = r.disturbance_vd;
  d["noise_std_Dm"] = r.noise_std_Dm;
  d["alpha"] = r.alpha;
  d["e_T_ss"] = r.e_T_ss;
  d["u_m"] = r.u_m;
  d["tau_H"] = r.tau_H;
  d["tau_T"] = r.tau_T;
  d["final_K"] = r.final_K;
  d["effort_decay_time"] = r.effort_decay_time;
  d["config_hash"] = r.config_hash;
  return d;
}

py::dict closed_loop(const Controller& controller, const ExperimentConfig& cfg,
                     std::uint64_t seed, double disturbance_vd, double noise_std_Dm,
                     std::optional<double> alpha, double adapt_start) {
  RunSettings s;
  s.disturbance_vd = disturbance_vd;
  s.noise_std_Dm = noise_std_Dm;
  s.alpha = alpha.value_or(cfg.physics.alpha);
  s.adapt_start = adapt_start;
  s.initial_gain = cfg.env.gain_K;
  RunTrace trace;
  {
    py::gil_scoped_release release;
    trace = run_closed_loop(
        [&](const std::vector<double>& obs) {
          py::gil_scoped_acquire acquire;
          return controller(obs);
        },
        cfg.physics, s, seed);
  }
  auto record = summarize_run(trace, cfg.physics, s, seed);
  record.config_hash = config_hash(cfg);
  py::dict d;
  d["record"] = record_dict(record);
  d["times"] = trace.times;
  d["error"] = trace.error;
  d["gain"] = trace.gain;
  d["positions"] = trace.positions;
  d["actions"] = trace.actions;
  d["final_density"] = values(trace.final_density);
  return d;
}

}  // namespace

PYBIND11_MODULE(_shepherd, m) {
  m.doc() = "Density shepherding on the circle: PDE, steady state, PPO and experiments.";

  m.def("kernel", [](double x, double L, double eps) { return kernel_eval(x, {L, eps}); },
        py::arg("x"), py::arg("L") = kPi, py::arg("eps") = 0.0);
  m.def("kernel_antiderivative",
        [](double x, double L, double eps) { return kernel_antiderivative(x, {L, eps}); },
        py::arg("x"), py::arg("L") = kPi, py::arg("eps") = 0.0);
  m.def("wrap", &wrap, py::arg("x"));
  m.def("grid_nodes", [](int n) { return PeriodicGrid(n).nodes(); }, py::arg("n_nodes") = 250);

  py::class_<ExperimentConfig>(m, "Config")
      .def(py::init<>())
      .def_static("from_ini", &parse_config, py::arg("text"))
      .def_static("load", &load_config, py::arg("path"))
      .def("to_ini", [](const ExperimentConfig& c) { return to_ini(c); })
      .def("hash", [](const ExperimentConfig& c) { return config_hash(c); })
      .def(
          "set",
          [](ExperimentConfig& c, const std::string& assignment) {
            apply_override(c, assignment);
            c.validate();
          },
          py::arg("assignment"));

  m.def(
      "desired_distribution",
      [](const ExperimentConfig& c) { return values(c.physics.desired()); },
      py::arg("config") = ExperimentConfig{});
  m.def(
      "steady_state_density",
      [](const std::vector<double>& herders, double K, const ExperimentConfig& c) {
        const auto& p = c.physics;
        return values(steady_state_density({herders, p.M_H}, K, p.grid(), p.steady_state()));
      },
      py::arg("herders"), py::arg("gain_K"), py::arg("config") = ExperimentConfig{});
  m.def(
      "ss_error",
      [](const std::vector<double>& herders, double K, const ExperimentConfig& c) {
        const auto& p = c.physics;
        return ss_error({herders, p.M_H}, K, p.desired(), p.steady_state());
      },
      py::arg("herders"), py::arg("gain_K"), py::arg("config") = ExperimentConfig{});
  m.def(
      "simulate",
      [](const std::vector<double>& herders, double K, double t_end, double interval,
         const ExperimentConfig& c) {
        Snapshots s;
        {
          py::gil_scoped_release release;
          s = simulate_fixed(c.physics, {herders, K}, t_end, interval);
        }
        py::dict d;
        d["times"] = s.times;
        d["densities"] = s.rows;
        return d;
      },
      py::arg("herders"), py::arg("gain_K") = 1.0, py::arg("t_end") = 50.0,
      py::arg("interval") = 1.0, py::arg("config") = ExperimentConfig{});
  m.def(
      "oracle_check",
      [](const ExperimentConfig& c, double horizon, int particles) {
        OracleSettings s;
        s.long_horizon = horizon;
        s.particles = particles;
        s.match_time = c.eval.oracle_match_time;
        std::vector<OracleResult> results;
        {
          py::gil_scoped_release release;
          results = run_oracle_check(c.physics, default_oracle_cases(), s, c.eval.threads);
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["herders"] = r.config.herders;
          d["gain_K"] = r.config.gain_K;
          d["pde_vs_closed_form"] = r.pde_vs_closed_form;
          d["sde_vs_pde"] = r.sde_vs_pde;
          d["pde_mass_error"] = r.pde_mass_error;
          out.append(d);
        }
        return out;
      },
      py::arg("config") = ExperimentConfig{}, py::arg("horizon") = 2000.0,
      py::arg("particles") = 0);

  py::class_<ppo::PolicyNetwork>(m, "Policy")
      .def_static(
          "random", [](const ExperimentConfig& c, std::uint64_t seed) {
            return ppo::PolicyNetwork::initialized(c.network_spec(), seed);
          },
          py::arg("config") = ExperimentConfig{}, py::arg("seed") = 0)
      .def_static(
          "load", [](const std::filesystem::path& p) { return ppo::load_checkpoint(p); },
          py::arg("path"))
      .def(
          "save", [](const ppo::PolicyNetwork& n, const std::filesystem::path& p) {
            ppo::save_checkpoint(n, p);
          },
          py::arg("path"))
      .def_property_readonly("parameter_count",
                             [](const ppo::PolicyNetwork& n) { return n.parameter_count(); })
      .def(
          "act",
          [](const ppo::PolicyNetwork& n, const std::vector<double>& obs) {
            return policy_controller(n)(obs);
          },
          py::arg("observation"))
      .def(
          "value",
          [](const ppo::PolicyNetwork& n, const std::vector<double>& obs) {
            const Eigen::Map<const ppo::Vector> x(obs.data(), static_cast<Eigen::Index>(obs.size()));
            return n.value(x)(0, 0);
          },
          py::arg("observation"))
      .def("__eq__", &ppo::PolicyNetwork::operator==);

  py::class_<ShepherdEnv>(m, "Env")
      .def(py::init([](const ExperimentConfig& c) { return ShepherdEnv(c.physics, c.env); }),
           py::arg("config") = ExperimentConfig{})
      .def("reset", &ShepherdEnv::reset, py::arg("seed") = 0)
      .def(
          "step",
          [](ShepherdEnv& env, const std::vector<double>& action) {
            const auto r = env.step_detailed(action);
            py::dict info;
            info["positions"] = r.positions;
            info["applied_actions"] = r.applied_actions;
            info["ss_error"] = r.ss_error;
            return py::make_tuple(r.observation, r.reward, r.done, info);
          },
          py::arg("action"))
      .def_property_readonly("positions", [](const ShepherdEnv& e) { return e.herders().positions; })
      .def_property_readonly("gain", &ShepherdEnv::gain)
      .def_property_readonly("step_index", &ShepherdEnv::step_index);

  m.def(
      "run_closed_loop",
      [](const ppo::PolicyNetwork& policy, const ExperimentConfig& c, std::uint64_t seed,
         double vd, double Dm, std::optional<double> alpha, double adapt_start) {
        return closed_loop(policy_controller(policy), c, seed, vd, Dm, alpha, adapt_start);
      },
      py::arg("policy"), py::arg("config") = ExperimentConfig{}, py::arg("seed") = 0,
      py::arg("disturbance_vd") = 0.0, py::arg("noise_std_Dm") = 0.0,
      py::arg("alpha") = py::none(), py::arg("adapt_start") = 0.0);
  m.def(
      "run_closed_loop",
      [](const Controller& controller, const ExperimentConfig& c, std::uint64_t seed, double vd,
         double Dm, std::optional<double> alpha, double adapt_start) {
        return closed_loop(controller, c, seed, vd, Dm, alpha, adapt_start);
      },
      py::arg("controller"), py::arg("config") = ExperimentConfig{}, py::arg("seed") = 0,
      py::arg("disturbance_vd") = 0.0, py::arg("noise_std_Dm") = 0.0,
      py::arg("alpha") = py::none(), py::arg("adapt_start") = 0.0);

  m.def(
      "train",
      [](const ExperimentConfig& c, const std::filesystem::path& output_dir, bool verbose) {
        ppo::TrainResult result;
        {
          py::gil_scoped_release release;
          result = train_policy(c, {output_dir, 20, verbose});
        }
        py::list smoothed;
        for (const auto& e : result.episodes) smoothed.append(e.smoothed_reward);
        py::dict d;
        d["policy"] = result.policy;
        d["smoothed_reward"] = smoothed;
        d["episodes"] = result.episodes.size();
        d["wall_seconds"] = result.wall_seconds;
        return d;
      },
      py::arg("config"), py::arg("output_dir") = std::filesystem::path{},
      py::arg("verbose") = false);
}
