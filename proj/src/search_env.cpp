#include "hpl/search_env.hpp"

#include "hpl/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

namespace hpl {

namespace {

void check_strategy(int strategy) {
  if (strategy < 1 || strategy > 5) {
    throw std::invalid_argument("strategy must be 1..5");
  }
}

}  // namespace

bool strategy_passive_only(int strategy) {
  check_strategy(strategy);
  return strategy != 1;
}

std::vector<Gate> strategy_init(int strategy, int n_modes, double default_squeeze) {
  check_strategy(strategy);
  if (n_modes < 2) {
    throw std::invalid_argument("strategy_init: n_modes must be at least 2");
  }
  std::vector<Gate> gates;
  switch (strategy) {
    case 1:
      break;  // vacuum start
    case 2:
      gates.push_back(gate_s2(1, 2, default_squeeze));
      break;
    case 3:
      if (n_modes % 2 != 0) {
        throw std::invalid_argument("strategy 3 needs an even mode count");
      }
      for (int m = 1; m < n_modes; m += 2) {
        gates.push_back(gate_s2(m, m + 1, default_squeeze));
      }
      break;
    case 4:
      gates.push_back(gate_s1(1, default_squeeze));
      gates.push_back(gate_s1(2, default_squeeze));
      break;
    case 5:
      for (int m = 1; m <= n_modes; ++m) {
        gates.push_back(gate_s1(m, default_squeeze));
      }
      break;
  }
  return gates;
}

std::vector<ActionSpec> action_space(int strategy, int n_modes) {
  check_strategy(strategy);
  if (n_modes < 2) {
    throw std::invalid_argument("action_space: n_modes must be at least 2");
  }
  const bool passive = strategy_passive_only(strategy);
  const std::vector<GateKind> kinds =
      passive ? std::vector<GateKind>{GateKind::PhaseShifter, GateKind::BeamSplitter}
              : std::vector<GateKind>{GateKind::PhaseShifter, GateKind::SingleModeSqueezer,
                                      GateKind::BeamSplitter, GateKind::TwoModeSqueezer};
  std::vector<ActionSpec> actions;
  for (GateKind kind : kinds) {
    if (is_two_mode(kind)) {
      for (int a = 1; a <= n_modes; ++a) {
        for (int b = a + 1; b <= n_modes; ++b) {
          actions.push_back(ActionSpec{kind, {a, b}});
        }
      }
    } else {
      for (int m = 1; m <= n_modes; ++m) {
        actions.push_back(ActionSpec{kind, {m, 0}});
      }
    }
  }
  return actions;
}

EnvConfig::EnvConfig() { measurement = default_measurement(); }

Circuit init_circuit(int strategy, const EnvConfig& config) {
  Circuit circuit;
  circuit.n_modes = config.n_modes;
  circuit.gates = strategy_init(strategy, config.n_modes, config.default_squeeze);
  circuit.herald = HeraldSpec::uniform(config.n_modes, config.scheme, config.eta);
  validate_circuit(circuit);
  return circuit;
}

Vec encode_state(const LcgState& state, int n_modes) {
  if (state.n_modes != 2) {
    throw std::invalid_argument("encode_state: state must have exactly 2 modes");
  }
  if (n_modes < 2) {
    throw std::invalid_argument("encode_state: n_modes must be at least 2");
  }
  const std::size_t slots = std::size_t{1} << (n_modes - 2);
  if (state.components.size() > slots) {
    throw std::invalid_argument("encode_state: more components than slots");
  }
  Vec out = Vec::Zero(static_cast<Eigen::Index>(slots * 11));
  for (std::size_t k = 0; k < state.components.size(); ++k) {
    const LcgComponent& comp = state.components[k];
    Eigen::Index at = static_cast<Eigen::Index>(k * 11);
    for (int i = 0; i < 4; ++i) {
      for (int j = i; j < 4; ++j) {
        out(at++) = comp.state.sigma(i, j);
      }
    }
    out(at) = comp.weight;
  }
  return out;
}

double reward_fn(double chsh) {
  if (chsh < 2.0) return chsh / 4.0 - 1.0;
  return std::exp2(10.0 * (chsh - 2.0)) - 1.0;
}

SearchEnv::SearchEnv(EnvConfig config) : config_(std::move(config)) {
  check_strategy(config_.strategy);
  if (config_.n_circuit < 1) {
    throw std::invalid_argument("SearchEnv: n_circuit must be at least 1");
  }
  actions_ = action_space(config_.strategy, config_.n_modes);
  circuit_ = init_circuit(config_.strategy, config_);
  if (static_cast<int>(circuit_.gates.size()) > config_.n_circuit) {
    throw std::invalid_argument(
        "SearchEnv: n_circuit smaller than the strategy's initialization");
  }
}

int SearchEnv::observation_size() const {
  return static_cast<int>((std::size_t{1} << (config_.n_modes - 2)) * 11);
}

Vec SearchEnv::reset() {
  circuit_ = init_circuit(config_.strategy, config_);
  taken_.clear();
  done_ = false;
  record_ = EpisodeRecord{};
  return observe();
}

Vec SearchEnv::observe() const {
  // Herald the circuit built so far, watching each stage's probability.
  // Any failed stage (or an outright impossible outcome) replaces the
  // observation with the two-mode vacuum.
  LcgState two_mode;
  bool failed = false;
  try {
    LcgState state = LcgState::from_gaussian(run_gates(circuit_));
    std::vector<HeraldMode> plan = circuit_.herald.modes;
    std::sort(plan.begin(), plan.end(),
              [](const HeraldMode& a, const HeraldMode& b) { return a.mode > b.mode; });
    for (const HeraldMode& h : plan) {
      const Conditioned stage = (h.scheme == HeraldScheme::Click)
                                    ? condition_click(state, h.mode, h.eta)
                                    : herald_single_photon_projection(state, h.mode, h.eta);
      if (stage.probability < config_.herald_failure_threshold) {
        failed = true;
        break;
      }
      state = stage.state;
    }
    if (!failed) two_mode = state;
  } catch (const HeraldImpossible&) {
    failed = true;
  }
  if (failed) {
    two_mode = LcgState::from_gaussian(vacuum_state(2));
  }
  return encode_state(two_mode, config_.n_modes);
}

StepResult SearchEnv::step(int action_index) {
  if (done_) {
    throw std::logic_error("SearchEnv::step: episode already finished; call reset()");
  }
  if (action_index < 0 || action_index >= static_cast<int>(actions_.size())) {
    throw std::out_of_range("SearchEnv::step: action index out of range");
  }

  const ActionSpec& action = actions_[static_cast<std::size_t>(action_index)];
  Gate gate;
  gate.kind = action.kind;
  gate.modes = action.modes;
  gate.param = is_squeezer(action.kind) ? config_.default_squeeze : config_.default_angle;
  circuit_.gates.push_back(gate);
  taken_.push_back(action_index);

  StepResult result;
  result.observation = observe();
  result.done = static_cast<int>(circuit_.gates.size()) >= config_.n_circuit;
  if (result.done) {
    done_ = true;
    finish_episode();
    result.reward = record_.reward;
  }
  return result;
}

void SearchEnv::finish_episode() {
  record_.actions = taken_;
  record_.circuit = circuit_;
  record_.chsh = 0.0;
  record_.herald_probability = 0.0;
  try {
    const OptimizedCircuit best =
        maximize_chsh(circuit_, config_.measurement, config_.optimize);
    record_.circuit = best.circuit;
    record_.chsh = best.chsh;
    record_.herald_probability = best.herald_probability;
  } catch (const OptimizationInfeasible&) {
    // Heralding failed at every restart: score the episode as chsh 0.
  }
  record_.reward = reward_fn(record_.chsh);
}

int default_worker_count() {
  if (const char* env = std::getenv("HPL_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

// Exact uniform draw in [0, n) by rejection, identical on every platform.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t span = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % span);
}

}  // namespace

std::vector<EpisodeRecord> random_search(const EnvConfig& config, int episodes,
                                         std::uint64_t seed, int workers) {
  if (episodes < 1) {
    throw std::invalid_argument("random_search: episodes must be at least 1");
  }
  if (workers <= 0) workers = default_worker_count();
  workers = std::min(workers, episodes);

  std::vector<EpisodeRecord> records(static_cast<std::size_t>(episodes));
  std::atomic<int> next{0};

  auto run_worker = [&] {
    SearchEnv env(config);
    const std::size_t n_actions = env.actions().size();
    for (;;) {
      const int episode = next.fetch_add(1);
      if (episode >= episodes) break;
      // Per-episode generator: results do not depend on the worker count.
      std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(episode)));
      env.reset();
      while (!env.done()) {
        env.step(static_cast<int>(uniform_index(rng, n_actions)));
      }
      records[static_cast<std::size_t>(episode)] = env.last_episode();
    }
  };

  if (workers == 1) {
    run_worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run_worker);
    for (std::thread& t : pool) t.join();
  }

  std::stable_sort(records.begin(), records.end(),
                   [](const EpisodeRecord& a, const EpisodeRecord& b) { return a.chsh > b.chsh; });
  return records;
}

}  // namespace hpl
