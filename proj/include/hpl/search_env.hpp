#pragma once

#include "hpl/circuit.hpp"
#include "hpl/optimize.hpp"

#include <cstdint>

namespace hpl {

// Circuit exploration strategies:
//   1: empty start, all four gate kinds available
//   2: S2 on modes (1,2), passive gates (R, B) only
//   3: S2 on every mode pair (1,2),(3,4),..., passive only (needs even N)
//   4: S1 on modes 1 and 2, passive only
//   5: S1 on every mode, passive only
bool strategy_passive_only(int strategy);
std::vector<Gate> strategy_init(int strategy, int n_modes, double default_squeeze);

struct ActionSpec {
  GateKind kind = GateKind::PhaseShifter;
  std::array<int, 2> modes{0, 0};
};

// Every (kind, modes) pair the strategy allows, in canonical order:
// kinds ordered R, S1, B, S2; mode tuples lexicographic.
std::vector<ActionSpec> action_space(int strategy, int n_modes);

struct EnvConfig {
  int strategy = 3;
  int n_modes = 4;
  // Total gate count at which an episode terminates, counting the
  // strategy's initialization gates; actions per episode is n_circuit
  // minus the initialization size.
  int n_circuit = 5;
  // Gate parameters used while building (re-optimized at episode end).
  double default_angle = 0.7853981633974483;  // pi/4
  double default_squeeze = 0.45;
  // A heralding stage below this probability counts as failed and the
  // agent observes the two-mode vacuum instead.
  double herald_failure_threshold = 1e-10;
  HeraldScheme scheme = HeraldScheme::Click;
  double eta = 1.0;
  BellMeasurement measurement;
  OptimizeConfig optimize;

  EnvConfig();
};

Circuit init_circuit(int strategy, const EnvConfig& config);

// Flattens a 2-mode state into 2^(N-2) slots of 11 reals: the 10
// row-major upper-triangular entries of each component's 4x4 covariance
// followed by its weight; unused slots are zero. (The displacement is
// identically zero for every circuit built here and is omitted.)
Vec encode_state(const LcgState& state, int n_modes);

// chsh/4 - 1 below 2, else 2^(10 (chsh-2)) - 1.
double reward_fn(double chsh);

struct StepResult {
  Vec observation;
  double reward = 0.0;
  bool done = false;
};

struct EpisodeRecord {
  std::vector<int> actions;
  Circuit circuit;  // with optimized parameters
  double chsh = 0.0;
  double herald_probability = 0.0;
  double reward = -1.0;
};

// One episode-at-a-time environment. Actions append gates at default
// parameters; the final step optimizes all parameters and pays
// reward_fn(chsh); every other step pays zero.
class SearchEnv {
 public:
  explicit SearchEnv(EnvConfig config);

  const EnvConfig& config() const { return config_; }
  const std::vector<ActionSpec>& actions() const { return actions_; }
  int observation_size() const;

  Vec reset();
  StepResult step(int action_index);
  bool done() const { return done_; }

  // Valid after the final step of an episode.
  const EpisodeRecord& last_episode() const { return record_; }

 private:
  Vec observe() const;
  void finish_episode();

  EnvConfig config_;
  std::vector<ActionSpec> actions_;
  Circuit circuit_;
  std::vector<int> taken_;
  bool done_ = true;
  EpisodeRecord record_;
};

// Uniform i.i.d. action sampling per step; each completed circuit is
// scored via maximize_chsh and results are sorted by CHSH descending.
// Deterministic for a given seed regardless of the worker count, which
// defaults to the HPL_THREADS environment variable.
std::vector<EpisodeRecord> random_search(const EnvConfig& config, int episodes,
                                         std::uint64_t seed, int workers = 0);

// Worker count from HPL_THREADS, else hardware concurrency.
int default_worker_count();

}  // namespace hpl
