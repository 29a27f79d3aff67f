// Command-line surface: evaluate circuit files, optimize their
// parameters, run random searches and PPO training, and sweep distance
// or detector efficiency. Reports are JSON on stdout; sweeps and traces
// are CSV files. Exit codes: 0 success, 2 bad input, 3 impossible
// detection outcome.

#include "hpl/circuit_io.hpp"
#include "hpl/fock.hpp"
#include "hpl/optimize.hpp"
#include "hpl/ppo.hpp"
#include "hpl/rng.hpp"
#include "hpl/search_env.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

namespace {

using hpl::Circuit;
using hpl::CircuitFile;
using nlohmann::json;

constexpr int kReportFormat = 1;

std::string format_sig(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12e", value);  // 13 significant digits
  return buf;
}

json gates_to_json(const Circuit& circuit) {
  json gates = json::array();
  for (const hpl::Gate& g : circuit.gates) {
    json modes = json::array();
    modes.push_back(g.modes[0]);
    if (hpl::is_two_mode(g.kind)) modes.push_back(g.modes[1]);
    gates.push_back({{"kind", hpl::kind_name(g.kind)}, {"modes", modes}, {"param", g.param}});
  }
  return gates;
}

json squeezing_report(const Circuit& circuit) {
  json out = json::array();
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    const hpl::Gate& g = circuit.gates[i];
    if (hpl::is_squeezer(g.kind)) {
      out.push_back({{"gate", i + 1},
                     {"kind", hpl::kind_name(g.kind)},
                     {"r", g.param},
                     {"db", hpl::squeeze_db(std::abs(g.param))}});
    }
  }
  return out;
}

void emit_report(const json& report, const std::string& out_path) {
  std::cout << report.dump(2) << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      throw std::runtime_error("cannot write report: " + out_path);
    }
    out << report.dump(2) << "\n";
  }
}

std::string default_optimized_path(const std::string& input) {
  const std::string suffix = ".json";
  if (input.size() > suffix.size() &&
      input.compare(input.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return input.substr(0, input.size() - suffix.size()) + ".optimized.json";
  }
  return input + ".optimized";
}

hpl::HeraldScheme parse_scheme_flag(const std::string& name) {
  if (name == "click") return hpl::HeraldScheme::Click;
  if (name == "single_photon_projection") return hpl::HeraldScheme::SinglePhotonProjection;
  throw std::invalid_argument("unknown herald scheme: " + name);
}

int cmd_eval(const std::string& path, std::uint64_t seed, const std::string& out_path) {
  const CircuitFile file = hpl::load_circuit_file(path);
  const hpl::EvalResult result = hpl::evaluate_circuit(file.circuit, file.measurement);
  json report = {
      {"format", kReportFormat},
      {"command", "eval"},
      {"seed", seed},
      {"chsh", result.chsh},
      {"herald_probability", result.herald_probability},
      {"correlators",
       {{"e00", result.correlators[0]},
        {"e01", result.correlators[1]},
        {"e10", result.correlators[2]},
        {"e11", result.correlators[3]}}},
      {"squeezing_db", squeezing_report(file.circuit)},
  };
  emit_report(report, out_path);
  return 0;
}

int cmd_optimize(const std::string& path, double cap_db, double herald_floor, bool floor_set,
                 std::uint64_t seed, std::string out_path) {
  const CircuitFile file = hpl::load_circuit_file(path);
  hpl::OptimizeConfig config;
  config.squeeze_cap_db = cap_db;
  config.seed = seed;

  const hpl::EvalResult before = hpl::evaluate_circuit(file.circuit, file.measurement);
  const hpl::OptimizedCircuit best =
      floor_set ? hpl::maximize_herald_prob(file.circuit, file.measurement, herald_floor, config)
                : hpl::maximize_chsh(file.circuit, file.measurement, config);

  const bool improved = floor_set ? best.herald_probability > before.herald_probability + 1e-15
                                  : best.chsh > before.chsh + 1e-12;
  if (!improved) {
    std::cerr << "warning: optimization did not improve on the input parameters\n";
  }

  if (out_path.empty()) out_path = default_optimized_path(path);
  CircuitFile optimized = file;
  optimized.circuit = best.circuit;
  hpl::save_circuit_file(out_path, optimized);

  json report = {
      {"format", kReportFormat},
      {"command", "optimize"},
      {"seed", seed},
      {"chsh", best.chsh},
      {"herald_probability", best.herald_probability},
      {"cap_db", cap_db},
      {"output", out_path},
      {"squeezing_db", squeezing_report(best.circuit)},
  };
  if (floor_set) report["herald_floor"] = herald_floor;
  emit_report(report, "");
  return 0;
}

int cmd_search(int strategy, int n_modes, int depth, int episodes, const std::string& scheme,
               double eta, std::uint64_t seed, int workers, double nm_tol, int nm_iters,
               const std::string& out_path) {
  hpl::EnvConfig config;
  config.strategy = strategy;
  config.n_modes = n_modes;
  config.n_circuit = depth;
  config.scheme = parse_scheme_flag(scheme);
  config.eta = eta;
  config.optimize.simplex_tolerance = nm_tol;
  config.optimize.max_iterations = nm_iters;
  config.optimize.seed = hpl::split_seed(seed, 0xA11);

  const std::vector<hpl::EpisodeRecord> records =
      hpl::random_search(config, episodes, seed, workers);

  json results = json::array();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const hpl::EpisodeRecord& r = records[i];
    results.push_back({{"rank", i + 1},
                       {"chsh", r.chsh},
                       {"herald_probability", r.herald_probability},
                       {"reward", r.reward},
                       {"actions", r.actions},
                       {"gates", gates_to_json(r.circuit)}});
  }
  json report = {
      {"format", kReportFormat},
      {"command", "search"},
      {"seed", seed},
      {"strategy", strategy},
      {"n_modes", n_modes},
      {"n_circuit", depth},
      {"herald_scheme", scheme},
      {"eta", eta},
      {"episodes", episodes},
      {"best_chsh", records.empty() ? 0.0 : records.front().chsh},
      {"results", results},
  };
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      throw std::runtime_error("cannot write results: " + out_path);
    }
    out << report.dump(2) << "\n";
    json summary = report;
    summary.erase("results");
    summary["out"] = out_path;
    std::cout << summary.dump(2) << "\n";
  } else {
    std::cout << report.dump(2) << "\n";
  }
  return 0;
}

int cmd_train(int strategy, int n_modes, int depth, int episodes, const std::string& scheme,
              double eta, std::uint64_t seed, double nm_tol, int nm_iters,
              hpl::PpoConfig ppo_config, bool hidden_set, const std::string& trace_path,
              const std::string& best_path, const std::string& checkpoint_path,
              const std::string& resume_path) {
  hpl::EnvConfig env_config;
  env_config.strategy = strategy;
  env_config.n_modes = n_modes;
  env_config.n_circuit = depth;
  env_config.scheme = parse_scheme_flag(scheme);
  env_config.eta = eta;
  env_config.optimize.simplex_tolerance = nm_tol;
  env_config.optimize.max_iterations = nm_iters;
  env_config.optimize.seed = hpl::split_seed(seed, 0xA11);

  hpl::SearchEnv env(env_config);

  if (!hidden_set && n_modes == 6) {
    ppo_config.hidden1 = 150;  // wide net for the larger observation
    ppo_config.hidden2 = 90;
  }
  ppo_config.seed = seed;

  hpl::PpoTrainer trainer = resume_path.empty() ? hpl::PpoTrainer(env, ppo_config)
                                                : hpl::load_checkpoint(resume_path, env);
  const hpl::TrainResult result = trainer.train(env, episodes);

  std::ofstream trace(trace_path);
  if (!trace) {
    throw std::runtime_error("cannot write trace: " + trace_path);
  }
  trace << "episode,chsh,best_chsh\n";
  double best_so_far = 0.0;
  for (std::size_t i = 0; i < result.chsh_trace.size(); ++i) {
    best_so_far = std::max(best_so_far, result.chsh_trace[i]);
    trace << (trainer.episodes_done - static_cast<long>(result.chsh_trace.size()) +
              static_cast<long>(i) + 1)
          << "," << format_sig(result.chsh_trace[i]) << "," << format_sig(best_so_far) << "\n";
  }
  trace.close();

  CircuitFile best_file;
  best_file.circuit = result.best.circuit;
  best_file.measurement = env_config.measurement;
  if (best_file.circuit.n_modes >= 2) {
    hpl::save_circuit_file(best_path, best_file);
  }
  if (!checkpoint_path.empty()) {
    hpl::save_checkpoint(checkpoint_path, trainer);
  }

  json report = {
      {"format", kReportFormat},
      {"command", "train"},
      {"seed", seed},
      {"strategy", strategy},
      {"n_modes", n_modes},
      {"n_circuit", depth},
      {"herald_scheme", scheme},
      {"episodes", episodes},
      {"episodes_done", trainer.episodes_done},
      {"best_chsh", result.best.chsh},
      {"best_herald_probability", result.best.herald_probability},
      {"trace", trace_path},
      {"best_circuit", best_path},
  };
  if (!checkpoint_path.empty()) report["checkpoint"] = checkpoint_path;
  emit_report(report, "");
  return 0;
}

int cmd_sweep(const std::string& kind, const std::string& path, double max_km, double step_km,
              double eta_min, double eta_max, double eta_step, std::uint64_t seed,
              const std::string& out_path) {
  const CircuitFile file = hpl::load_circuit_file(path);
  hpl::OptimizeConfig config;
  config.seed = seed;

  hpl::SweepResult sweep;
  std::string x_name;
  if (kind == "distance") {
    x_name = "distance_km";
    sweep = hpl::sweep_distance(file.circuit, file.measurement, max_km, step_km, config);
  } else if (kind == "efficiency") {
    x_name = "eta";
    if (!(eta_step > 0.0) || eta_min > eta_max) {
      throw std::invalid_argument("need eta-min <= eta-max and eta-step > 0");
    }
    std::vector<double> grid;
    for (double eta = eta_min; eta <= eta_max + 1e-12; eta += eta_step) {
      grid.push_back(std::min(eta, 1.0));
    }
    sweep = hpl::sweep_efficiency(file.circuit, file.measurement, grid);
  } else {
    throw std::invalid_argument("sweep kind must be distance or efficiency");
  }

  std::ofstream out(out_path);
  if (!out) {
    throw std::runtime_error("cannot write sweep: " + out_path);
  }
  out << x_name << ",chsh,herald_probability\n";
  for (const hpl::SweepPoint& p : sweep.points) {
    out << format_sig(p.x) << "," << format_sig(p.chsh) << "," << format_sig(p.herald_probability)
        << "\n";
  }
  out.close();

  json report = {
      {"format", kReportFormat}, {"command", "sweep"}, {"seed", seed},
      {"kind", kind},            {"points", sweep.points.size()}, {"out", out_path},
  };
  emit_report(report, "");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photonic Bell-test circuit simulator and search engine"};
  app.require_subcommand(1);
  app.fallthrough();  // --seed may follow the subcommand

  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "Random seed embedded in every report")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a circuit file: CHSH and herald probability");
  std::string eval_path, eval_out;
  eval->add_option("circuit", eval_path, "Circuit file (JSON)")->required();
  eval->add_option("--out", eval_out, "Also write the report to this path");

  // optimize
  auto* optimize = app.add_subcommand("optimize", "Tune gate parameters of a circuit file");
  std::string opt_path, opt_out;
  double cap_db = 10.0, herald_floor = 0.0;
  optimize->add_option("circuit", opt_path, "Circuit file (JSON)")->required();
  optimize->add_option("--cap-db", cap_db, "Squeezing cap in dB")->capture_default_str();
  auto* floor_opt = optimize->add_option(
      "--herald-floor", herald_floor,
      "Maximize herald probability subject to CHSH staying above this floor");
  optimize->add_option("--out", opt_out, "Output circuit path (default: next to the input)");

  // search
  auto* search = app.add_subcommand("search", "Random search over circuit constructions");
  int strategy = 3, n_modes = 4, depth = 5, episodes = 100, workers = 0, nm_iters = 2000;
  double eta = 1.0, nm_tol = 1e-5;
  std::string scheme = "click", search_out;
  search->add_option("--strategy", strategy, "Exploration strategy 1..5")->required();
  search->add_option("--modes", n_modes, "Mode count")->capture_default_str();
  search->add_option("--depth", depth, "Total gate count per episode (including initialization)")
      ->capture_default_str();
  search->add_option("--episodes", episodes, "Episode budget")->required();
  search->add_option("--herald-scheme", scheme, "click or single_photon_projection")
      ->capture_default_str();
  search->add_option("--eta", eta, "Detector efficiency")->capture_default_str();
  search->add_option("--workers", workers, "Worker threads (0 = HPL_THREADS or hardware)")
      ->capture_default_str();
  search->add_option("--nm-tol", nm_tol, "Episode optimizer simplex tolerance")
      ->capture_default_str();
  search->add_option("--nm-iters", nm_iters, "Episode optimizer iteration cap")
      ->capture_default_str();
  search->add_option("--out", search_out, "Write the full ranked results here");

  // train
  auto* train = app.add_subcommand("train", "Train a PPO agent on circuit construction");
  hpl::PpoConfig ppo_config;
  std::string trace_path = "train_trace.csv", best_path = "train_best.json";
  std::string checkpoint_path, resume_path;
  train->add_option("--strategy", strategy, "Exploration strategy 1..5")->required();
  train->add_option("--modes", n_modes, "Mode count")->capture_default_str();
  train->add_option("--depth", depth, "Total gate count per episode (including initialization)")
      ->capture_default_str();
  train->add_option("--episodes", episodes, "Episode budget")->required();
  train->add_option("--herald-scheme", scheme, "click or single_photon_projection")
      ->capture_default_str();
  train->add_option("--eta", eta, "Detector efficiency")->capture_default_str();
  train->add_option("--nm-tol", nm_tol, "Episode optimizer simplex tolerance")
      ->capture_default_str();
  train->add_option("--nm-iters", nm_iters, "Episode optimizer iteration cap")
      ->capture_default_str();
  train->add_option("--lr", ppo_config.learning_rate, "Learning rate")->capture_default_str();
  train->add_option("--clip", ppo_config.clip_ratio, "Clip ratio")->capture_default_str();
  train->add_option("--discount", ppo_config.discount, "Discount factor")->capture_default_str();
  train->add_option("--gae-lambda", ppo_config.gae_lambda, "GAE lambda")->capture_default_str();
  train->add_option("--epochs", ppo_config.epochs_per_update, "Epochs per update")
      ->capture_default_str();
  train->add_option("--entropy-coef", ppo_config.entropy_coefficient, "Entropy bonus weight")
      ->capture_default_str();
  train->add_option("--value-coef", ppo_config.value_coefficient, "Value loss weight")
      ->capture_default_str();
  train->add_option("--update-freq", ppo_config.update_frequency, "Steps between updates")
      ->capture_default_str();
  train->add_option("--capacity", ppo_config.trajectory_capacity, "Trajectory ring capacity")
      ->capture_default_str();
  auto* h1_opt =
      train->add_option("--hidden1", ppo_config.hidden1, "First hidden width")->capture_default_str();
  auto* h2_opt = train->add_option("--hidden2", ppo_config.hidden2, "Second hidden width")
                     ->capture_default_str();
  train->add_option("--trace", trace_path, "Per-episode CHSH trace CSV")->capture_default_str();
  train->add_option("--best-out", best_path, "Best circuit file")->capture_default_str();
  train->add_option("--checkpoint", checkpoint_path, "Save the trainer state here at the end");
  train->add_option("--resume", resume_path, "Resume from a saved checkpoint");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Distance or efficiency sweep to CSV");
  std::string sweep_kind = "distance", sweep_path, sweep_out = "sweep.csv";
  double max_km = 12.0, step_km = 0.5, eta_min = 0.05, eta_max = 1.0, eta_step = 0.05;
  sweep->add_option("--kind", sweep_kind, "distance or efficiency")->capture_default_str();
  sweep->add_option("circuit", sweep_path, "Circuit file (JSON)")->required();
  sweep->add_option("--max-km", max_km, "Distance sweep end")->capture_default_str();
  sweep->add_option("--step-km", step_km, "Distance sweep step")->capture_default_str();
  sweep->add_option("--eta-min", eta_min, "Efficiency grid start")->capture_default_str();
  sweep->add_option("--eta-max", eta_max, "Efficiency grid end")->capture_default_str();
  sweep->add_option("--eta-step", eta_step, "Efficiency grid step")->capture_default_str();
  sweep->add_option("--out", sweep_out, "Output CSV path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help
    }
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(eval)) {
      return cmd_eval(eval_path, seed, eval_out);
    }
    if (app.got_subcommand(optimize)) {
      return cmd_optimize(opt_path, cap_db, herald_floor, floor_opt->count() > 0, seed, opt_out);
    }
    if (app.got_subcommand(search)) {
      return cmd_search(strategy, n_modes, depth, episodes, scheme, eta, seed, workers, nm_tol,
                        nm_iters, search_out);
    }
    if (app.got_subcommand(train)) {
      const bool hidden_set = h1_opt->count() > 0 || h2_opt->count() > 0;
      return cmd_train(strategy, n_modes, depth, episodes, scheme, eta, seed, nm_tol, nm_iters,
                       ppo_config, hidden_set, trace_path, best_path, checkpoint_path,
                       resume_path);
    }
    if (app.got_subcommand(sweep)) {
      return cmd_sweep(sweep_kind, sweep_path, max_km, step_km, eta_min, eta_max, eta_step, seed,
                       sweep_out);
    }
  } catch (const hpl::HeraldImpossible& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const hpl::OptimizationInfeasible& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const hpl::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
