#pragma once

#include "hpl/search_env.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace hpl {

struct PpoConfig {
  int update_frequency = 64;     // environment steps between updates
  int trajectory_capacity = 256; // ring-buffer size (>= update_frequency)
  double clip_ratio = 0.2;
  double discount = 0.99;
  double gae_lambda = 0.95;
  double learning_rate = 3e-4;
  int epochs_per_update = 4;
  double entropy_coefficient = 0.01;
  double value_coefficient = 0.5;
  int hidden1 = 45;  // 150 for the 6-mode passive setting
  int hidden2 = 30;  // 90 for the 6-mode passive setting
  std::uint64_t seed = 1;
};

// Two-headed MLP: input -> h1 -> h2 (tanh) -> {policy logits, value}.
struct PolicyValueNet {
  int input_dim = 0;
  int n_actions = 0;
  Mat w1, w2, wp, wv;
  Vec b1, b2, bp;
  double bv = 0.0;

  static PolicyValueNet init(int input_dim, int h1, int h2, int n_actions,
                             std::uint64_t seed);
};

struct Forward {
  Vec probs;  // nonnegative, sums to 1
  double value = 0.0;
};

Forward forward(const PolicyValueNet& net, const Vec& observation);

struct Transition {
  Vec observation;
  int action = 0;
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
};

// Fixed-capacity ring buffer of transitions.
class Trajectory {
 public:
  explicit Trajectory(int capacity);
  void push(Transition t);
  int size() const { return static_cast<int>(filled_); }
  int capacity() const { return capacity_; }
  // The most recent n transitions, oldest first.
  std::vector<Transition> recent(int n) const;

 private:
  int capacity_ = 0;
  std::size_t filled_ = 0;
  std::size_t next_ = 0;
  std::vector<Transition> ring_;
};

// Adam moments for every parameter block of the net.
struct AdamState {
  Mat mw1, vw1, mw2, vw2, mwp, vwp, mwv, vwv;
  Vec mb1, vb1, mb2, vb2, mbp, vbp;
  double mbv = 0.0, vbv = 0.0;
  long step = 0;

  static AdamState zeros_like(const PolicyValueNet& net);
};

struct UpdateDiagnostics {
  double clip_objective = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

// Loss and analytic parameter gradients of the full objective (clipped
// surrogate + value regression + entropy bonus) on a batch with
// precomputed advantages and returns. The update loop runs on this; it is
// public so the gradients can be verified against finite differences.
struct PpoGradients {
  double loss = 0.0;
  double clip_objective = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  Mat w1, w2, wp, wv;
  Vec b1, b2, bp;
  double bv = 0.0;
};

PpoGradients ppo_loss_gradients(const PolicyValueNet& net, const std::vector<Transition>& batch,
                                const Vec& advantages, const Vec& returns,
                                const PpoConfig& config);

// Generalized advantage estimation over the batch (bootstrapped with
// last_value when the batch does not end an episode), then
// epochs_per_update full-batch steps on the clipped surrogate, value
// regression, and entropy bonus. Advantages are batch-standardized.
UpdateDiagnostics ppo_update(PolicyValueNet& net, const std::vector<Transition>& batch,
                             double last_value, const PpoConfig& config, AdamState& adam);

struct TrainResult {
  EpisodeRecord best;
  std::vector<double> chsh_trace;  // final CHSH per episode
};

// Full training state, checkpointable mid-run.
struct PpoTrainer {
  PpoConfig config;
  PolicyValueNet net;
  AdamState adam;
  Trajectory trajectory;
  std::vector<Transition> fresh;  // transitions since the last update
  std::mt19937_64 rng;
  long episodes_done = 0;

  PpoTrainer(const SearchEnv& env, PpoConfig config);

  // Runs `episodes` further episodes against env.
  TrainResult train(SearchEnv& env, int episodes);
};

// Versioned JSON checkpoint of everything needed to resume exactly:
// weights, Adam moments, pending transitions, and the RNG state.
void save_checkpoint(const std::string& path, const PpoTrainer& trainer);
PpoTrainer load_checkpoint(const std::string& path, const SearchEnv& env);

}  // namespace hpl
