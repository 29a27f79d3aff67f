// Python bindings for the core operations: building circuits, evaluating
// CHSH scores and herald probabilities, optimizing parameters, sweeping
// loss, random search, and PPO training.

#include "hpl/circuit_io.hpp"
#include "hpl/fock.hpp"
#include "hpl/optimize.hpp"
#include "hpl/ppo.hpp"
#include "hpl/search_env.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;

namespace {

hpl::Gate make_gate(const std::string& kind, const std::vector<int>& modes, double param) {
  hpl::Gate gate;
  if (kind == "R") {
    gate.kind = hpl::GateKind::PhaseShifter;
  } else if (kind == "S1") {
    gate.kind = hpl::GateKind::SingleModeSqueezer;
  } else if (kind == "B") {
    gate.kind = hpl::GateKind::BeamSplitter;
  } else if (kind == "S2") {
    gate.kind = hpl::GateKind::TwoModeSqueezer;
  } else {
    throw std::invalid_argument("unknown gate kind: " + kind);
  }
  const std::size_t want = hpl::is_two_mode(gate.kind) ? 2 : 1;
  if (modes.size() != want) {
    throw std::invalid_argument(kind + " takes " + std::to_string(want) + " mode(s)");
  }
  gate.modes = {modes[0], modes.size() > 1 ? modes[1] : 0};
  gate.param = param;
  return gate;
}

std::vector<std::vector<double>> matrix_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows[i].assign(m.row(i).begin(), m.row(i).end());
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_hpl, m) {
  m.doc() = "Photonic Bell-test circuit simulator";

  py::register_exception<hpl::HeraldImpossible>(m, "HeraldImpossible");
  py::register_exception<hpl::OptimizationInfeasible>(m, "OptimizationInfeasible");
  py::register_exception<hpl::ParseError>(m, "CircuitParseError");

  py::enum_<hpl::HeraldScheme>(m, "HeraldScheme")
      .value("CLICK", hpl::HeraldScheme::Click)
      .value("SINGLE_PHOTON_PROJECTION", hpl::HeraldScheme::SinglePhotonProjection);

  py::class_<hpl::Gate>(m, "Gate")
      .def(py::init(&make_gate), py::arg("kind"), py::arg("modes"), py::arg("param"))
      .def_property_readonly("kind",
                             [](const hpl::Gate& g) { return std::string(hpl::kind_name(g.kind)); })
      .def_property_readonly("modes",
                             [](const hpl::Gate& g) {
                               std::vector<int> modes{g.modes[0]};
                               if (hpl::is_two_mode(g.kind)) modes.push_back(g.modes[1]);
                               return modes;
                             })
      .def_readonly("param", &hpl::Gate::param)
      .def("__repr__", [](const hpl::Gate& g) {
        std::string out = std::string(hpl::kind_name(g.kind)) + "(" + std::to_string(g.param) +
                          ")[" + std::to_string(g.modes[0]);
        if (hpl::is_two_mode(g.kind)) out += "," + std::to_string(g.modes[1]);
        return out + "]";
      });

  py::class_<hpl::Circuit>(m, "Circuit")
      .def(py::init([](int n_modes, const std::vector<hpl::Gate>& gates, hpl::HeraldScheme scheme,
                       double eta) {
             hpl::Circuit circuit;
             circuit.n_modes = n_modes;
             circuit.gates = gates;
             circuit.herald = hpl::HeraldSpec::uniform(n_modes, scheme, eta);
             hpl::validate_circuit(circuit);
             return circuit;
           }),
           py::arg("n_modes"), py::arg("gates"), py::arg("scheme") = hpl::HeraldScheme::Click,
           py::arg("eta") = 1.0)
      .def_readonly("n_modes", &hpl::Circuit::n_modes)
      .def_readonly("gates", &hpl::Circuit::gates);

  py::class_<hpl::BellMeasurement>(m, "BellMeasurement")
      .def(py::init([](double theta0, double theta1, double phi0, double phi1) {
             hpl::BellMeasurement meas = hpl::default_measurement();
             meas.theta0 = theta0;
             meas.theta1 = theta1;
             meas.phi0 = phi0;
             meas.phi1 = phi1;
             return meas;
           }),
           py::arg("theta0") = 0.0, py::arg("theta1") = 1.5707963267948966,
           py::arg("phi0") = -0.7853981633974483, py::arg("phi1") = 0.7853981633974483)
      .def_readonly("theta0", &hpl::BellMeasurement::theta0)
      .def_readonly("theta1", &hpl::BellMeasurement::theta1)
      .def_readonly("phi0", &hpl::BellMeasurement::phi0)
      .def_readonly("phi1", &hpl::BellMeasurement::phi1);

  m.def("default_measurement", &hpl::default_measurement);

  py::class_<hpl::EvalResult>(m, "EvalResult")
      .def_readonly("chsh", &hpl::EvalResult::chsh)
      .def_readonly("herald_probability", &hpl::EvalResult::herald_probability)
      .def_readonly("correlators", &hpl::EvalResult::correlators);

  m.def(
      "evaluate",
      [](const hpl::Circuit& circuit, const hpl::BellMeasurement& meas, double transmissivity) {
        hpl::EvalOptions options;
        options.loss_transmissivity = transmissivity;
        return hpl::evaluate_circuit(circuit, meas, options);
      },
      py::arg("circuit"), py::arg("measurement") = hpl::default_measurement(),
      py::arg("transmissivity") = 1.0,
      "CHSH score and herald probability of a heralded circuit");

  m.def(
      "conditional_state",
      [](const hpl::Circuit& circuit) {
        const hpl::Conditioned conditioned = hpl::herald_circuit(circuit);
        py::list components;
        for (const hpl::LcgComponent& c : conditioned.state.components) {
          py::dict entry;
          entry["weight"] = c.weight;
          entry["mean"] = std::vector<double>(c.state.mu.begin(), c.state.mu.end());
          entry["cov"] = matrix_rows(c.state.sigma);
          components.append(entry);
        }
        return py::make_tuple(conditioned.probability, components);
      },
      py::arg("circuit"),
      "Herald probability and the conditional two-mode state as Gaussian components");

  m.def(
      "parse_circuit_file",
      [](const std::string& text) {
        const hpl::CircuitFile file = hpl::parse_circuit(text);
        return py::make_tuple(file.circuit, file.measurement);
      },
      py::arg("text"), "Parse a circuit file; returns (circuit, measurement)");

  m.def(
      "serialize_circuit_file",
      [](const hpl::Circuit& circuit, const hpl::BellMeasurement& meas) {
        hpl::CircuitFile file;
        file.circuit = circuit;
        file.measurement = meas;
        return hpl::serialize_circuit(file);
      },
      py::arg("circuit"), py::arg("measurement") = hpl::default_measurement());

  m.def("squeeze_db", &hpl::squeeze_db, py::arg("r"),
        "Squeezing strength of S1(r)/S2(r) in decibels");

  py::class_<hpl::OptimizedCircuit>(m, "OptimizedCircuit")
      .def_readonly("circuit", &hpl::OptimizedCircuit::circuit)
      .def_readonly("chsh", &hpl::OptimizedCircuit::chsh)
      .def_readonly("herald_probability", &hpl::OptimizedCircuit::herald_probability);

  auto make_optimize_config = [](double cap_db, double tolerance, int max_iterations,
                                 std::uint64_t seed) {
    hpl::OptimizeConfig config;
    config.squeeze_cap_db = cap_db;
    config.simplex_tolerance = tolerance;
    config.max_iterations = max_iterations;
    config.seed = seed;
    return config;
  };

  m.def(
      "maximize_chsh",
      [make_optimize_config](const hpl::Circuit& circuit, const hpl::BellMeasurement& meas,
                             double cap_db, double tolerance, int max_iterations,
                             std::uint64_t seed) {
        return hpl::maximize_chsh(circuit, meas,
                                  make_optimize_config(cap_db, tolerance, max_iterations, seed));
      },
      py::arg("circuit"), py::arg("measurement") = hpl::default_measurement(),
      py::arg("cap_db") = 10.0, py::arg("tolerance") = 1e-8, py::arg("max_iterations") = 4000,
      py::arg("seed") = 1, "Tune every gate parameter to maximize the CHSH score");

  m.def(
      "maximize_herald_prob",
      [make_optimize_config](const hpl::Circuit& circuit, const hpl::BellMeasurement& meas,
                             double chsh_floor, double cap_db, double tolerance,
                             int max_iterations, std::uint64_t seed) {
        return hpl::maximize_herald_prob(
            circuit, meas, chsh_floor,
            make_optimize_config(cap_db, tolerance, max_iterations, seed));
      },
      py::arg("circuit"), py::arg("measurement"), py::arg("chsh_floor"), py::arg("cap_db") = 10.0,
      py::arg("tolerance") = 1e-8, py::arg("max_iterations") = 4000, py::arg("seed") = 1,
      "Maximize herald probability subject to the CHSH score staying above a floor");

  py::class_<hpl::SweepPoint>(m, "SweepPoint")
      .def_readonly("x", &hpl::SweepPoint::x)
      .def_readonly("chsh", &hpl::SweepPoint::chsh)
      .def_readonly("herald_probability", &hpl::SweepPoint::herald_probability)
      .def_readonly("params", &hpl::SweepPoint::params);

  m.def(
      "sweep_distance",
      [make_optimize_config](const hpl::Circuit& circuit, const hpl::BellMeasurement& meas,
                             double km_max, double km_step, double cap_db, std::uint64_t seed) {
        return hpl::sweep_distance(circuit, meas, km_max, km_step,
                                   make_optimize_config(cap_db, 1e-8, 4000, seed))
            .points;
      },
      py::arg("circuit"), py::arg("measurement") = hpl::default_measurement(),
      py::arg("km_max") = 12.0, py::arg("km_step") = 0.5, py::arg("cap_db") = 10.0,
      py::arg("seed") = 1, "Re-optimized CHSH under fiber loss on the second measured mode");

  m.def(
      "sweep_efficiency",
      [](const hpl::Circuit& circuit, const hpl::BellMeasurement& meas,
         const std::vector<double>& etas) {
        return hpl::sweep_efficiency(circuit, meas, etas).points;
      },
      py::arg("circuit"), py::arg("measurement"), py::arg("etas"),
      "Fixed-parameter CHSH and herald probability across detector efficiencies");

  py::class_<hpl::EnvConfig>(m, "EnvConfig")
      .def(py::init([](int strategy, int n_modes, int n_circuit, hpl::HeraldScheme scheme,
                       double eta, double nm_tolerance, int nm_iterations) {
             hpl::EnvConfig config;
             config.strategy = strategy;
             config.n_modes = n_modes;
             config.n_circuit = n_circuit;
             config.scheme = scheme;
             config.eta = eta;
             config.optimize.simplex_tolerance = nm_tolerance;
             config.optimize.max_iterations = nm_iterations;
             return config;
           }),
           py::arg("strategy") = 3, py::arg("n_modes") = 4, py::arg("n_circuit") = 5,
           py::arg("scheme") = hpl::HeraldScheme::Click, py::arg("eta") = 1.0,
           py::arg("nm_tolerance") = 1e-5, py::arg("nm_iterations") = 2000)
      .def_readonly("strategy", &hpl::EnvConfig::strategy)
      .def_readonly("n_modes", &hpl::EnvConfig::n_modes)
      .def_readonly("n_circuit", &hpl::EnvConfig::n_circuit);

  py::class_<hpl::EpisodeRecord>(m, "EpisodeRecord")
      .def_readonly("actions", &hpl::EpisodeRecord::actions)
      .def_readonly("circuit", &hpl::EpisodeRecord::circuit)
      .def_readonly("chsh", &hpl::EpisodeRecord::chsh)
      .def_readonly("herald_probability", &hpl::EpisodeRecord::herald_probability)
      .def_readonly("reward", &hpl::EpisodeRecord::reward);

  m.def(
      "random_search",
      [](const hpl::EnvConfig& config, int episodes, std::uint64_t seed, int workers) {
        py::gil_scoped_release release;
        return hpl::random_search(config, episodes, seed, workers);
      },
      py::arg("config"), py::arg("episodes"), py::arg("seed") = 1, py::arg("workers") = 0,
      "Uniform random episodes, returned best-first");

  m.def(
      "train_ppo",
      [](const hpl::EnvConfig& env_config, int episodes, std::uint64_t seed, double learning_rate,
         int update_frequency, int hidden1, int hidden2) {
        hpl::SearchEnv env(env_config);
        hpl::PpoConfig config;
        config.seed = seed;
        config.learning_rate = learning_rate;
        config.update_frequency = update_frequency;
        if (hidden1 > 0) config.hidden1 = hidden1;
        if (hidden2 > 0) config.hidden2 = hidden2;
        if (hidden1 <= 0 && env_config.n_modes == 6) {
          config.hidden1 = 150;
          config.hidden2 = 90;
        }
        hpl::PpoTrainer trainer(env, config);
        hpl::TrainResult result;
        {
          py::gil_scoped_release release;
          result = trainer.train(env, episodes);
        }
        return py::make_tuple(result.best, result.chsh_trace);
      },
      py::arg("config"), py::arg("episodes"), py::arg("seed") = 1,
      py::arg("learning_rate") = 3e-4, py::arg("update_frequency") = 64, py::arg("hidden1") = 0,
      py::arg("hidden2") = 0,
      "Train a PPO agent; returns (best episode, per-episode CHSH trace)");

  m.def(
      "fock_moments",
      [](const hpl::Circuit& circuit, int cutoff) {
        hpl::FockState state = hpl::FockState::vacuum(circuit.n_modes, cutoff);
        for (const hpl::Gate& gate : circuit.gates) {
          state = hpl::fock_apply(gate, state, cutoff);
        }
        const auto [mean, cov] = hpl::fock_moments(state);
        return py::make_tuple(std::vector<double>(mean.begin(), mean.end()), matrix_rows(cov));
      },
      py::arg("circuit"), py::arg("cutoff") = 12,
      "Quadrature mean and covariance from a truncated number-basis simulation");
}
